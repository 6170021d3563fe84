use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lfc_core::cli::{run, CliError, Command};
use lfc_core::config::{parse_config, Config};

/// Load-frequency control of a wind-diesel-PV microgrid.
#[derive(Parser, Debug)]
#[command(name = "lfc", version)]
struct Args {
    /// Configuration file; defaults apply to every key it omits.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file for the command's artifact (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    command: Command,
    /// Overrides `system.include_solar`.
    #[arg(long)]
    include_solar: Option<bool>,
    /// Overrides `tune.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &Args) -> Result<Config, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => Config::default(),
    };
    if let Some(b) = args.include_solar {
        cfg.system.include_solar = b;
    }
    if let Some(s) = args.seed {
        cfg.tune.seed = s;
    }
    Ok(cfg)
}

fn execute(args: &Args) -> Result<(), CliError> {
    let cfg = load(args)?;
    let report = run(&cfg, args.command)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, &report.body)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            print!("{}", report.summary);
        }
        None => print!("{}", report.body),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
