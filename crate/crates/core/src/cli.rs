//! Command implementations behind the `lfc` binary.

use std::fmt::Write as _;

use thiserror::Error;

use crate::assembly::{AugmentedModel, ControllerGains, STABILITY_MARGIN};
use crate::config::{Config, ConfigError};
use crate::error::LfcError;
use crate::lti::{eigenvalues, StateSpaceModel};
use crate::sim::{input_vector, integrate, performance_index, steady_outputs, steady_state};
use crate::solar::pv::voltage_grid;
use crate::solar::{mppt_operating_point, solve_pv_current};
use crate::tuner::tune_gains;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Simulate,
    Steady,
    Eigen,
    Tune,
    Pvcurve,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] LfcError),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(e) => e.category(),
            CliError::Numeric(e) => e.category(),
            CliError::Io(_) => "Io",
        }
    }

    /// 2 configuration, 3 numeric failure, 4 step size too large.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(LfcError::UnstableStepSize { .. }) => 4,
            CliError::Numeric(LfcError::InvalidParameter(_) | LfcError::InvalidScenario(_)) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

/// Result of a command: the primary artifact plus optional summary lines.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub body: String,
    pub summary: String,
}

/// Scientific notation with 9 significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn run(cfg: &Config, command: Command) -> Result<Report, CliError> {
    match command {
        Command::Simulate => simulate(cfg),
        Command::Steady => steady(cfg),
        Command::Eigen => eigen(cfg),
        Command::Tune => tune(cfg),
        Command::Pvcurve => pvcurve(cfg),
    }
}

fn model(cfg: &Config) -> Result<AugmentedModel, LfcError> {
    let gains = if cfg.scenario.open_loop {
        ControllerGains::default()
    } else {
        cfg.gains
    };
    AugmentedModel::build(&cfg.system, &gains)
}

fn simulate(cfg: &Config) -> Result<Report, CliError> {
    let m = model(cfg)?;
    // open loop keeps the integrator states so the column layout is fixed
    let sys: &StateSpaceModel = if cfg.scenario.open_loop {
        m.augmented()
    } else {
        m.closed_loop()
    };
    let trace = integrate(sys, &cfg.scenario.scenario())?;
    let eta = performance_index(&trace, cfg.tune.index)?;

    let mut body = String::from("t");
    for l in trace.state_labels.iter().chain(&trace.output_labels) {
        body.push(',');
        body.push_str(l);
    }
    body.push('\n');
    for (k, t) in trace.times.iter().enumerate() {
        body.push_str(&sci(*t));
        for v in trace
            .states
            .row(k)
            .iter()
            .chain(trace.outputs.row(k).iter())
        {
            body.push(',');
            body.push_str(&sci(*v));
        }
        body.push('\n');
    }
    Ok(Report {
        body,
        summary: format!("rows = {}\neta = {}\n", trace.len(), sci(eta)),
    })
}

fn steady(cfg: &Config) -> Result<Report, CliError> {
    let m = model(cfg)?;
    let sys = if cfg.scenario.open_loop {
        m.open_loop()
    } else {
        m.closed_loop()
    };
    let w = input_vector(sys, &cfg.scenario.constant_inputs())?;
    let x = steady_state(sys, &w)?;
    let y = steady_outputs(sys, &x, &w);

    let mut body = String::new();
    for (l, v) in sys.state_labels().iter().zip(x.iter()) {
        writeln!(body, "{l} = {v:.6}").unwrap();
    }
    for (l, v) in sys.output_labels().iter().zip(y.iter()) {
        writeln!(body, "{l} = {v:.6}").unwrap();
    }
    let base = cfg.ratings.load_kw;
    for (l, v) in sys.output_labels().iter().zip(y.iter()) {
        writeln!(body, "{l}_kW = {:.6}", v * base).unwrap();
    }
    Ok(Report {
        body,
        summary: String::new(),
    })
}

fn eigen(cfg: &Config) -> Result<Report, CliError> {
    let m = model(cfg)?;
    let a = if cfg.scenario.open_loop {
        m.open_loop().a()
    } else {
        m.ahat()
    };
    let ev = eigenvalues(a)?;
    let mut body = String::from("re,im\n");
    for l in &ev {
        writeln!(body, "{},{}", sci(l.re), sci(l.im)).unwrap();
    }
    let stable = ev.iter().all(|l| l.re < STABILITY_MARGIN);
    writeln!(
        body,
        "verdict,{}",
        if stable { "STABLE" } else { "UNSTABLE" }
    )
    .unwrap();
    Ok(Report {
        body,
        summary: String::new(),
    })
}

fn tune(cfg: &Config) -> Result<Report, CliError> {
    let r = tune_gains(&cfg.system, &cfg.tune)?;
    let mut body = Config::gains_fragment(&r.gains);
    writeln!(body, "# eta = {}", r.eta).unwrap();
    writeln!(body, "# initial_eta = {}", r.initial_eta).unwrap();
    writeln!(body, "# evaluations = {}", r.evaluations).unwrap();
    Ok(Report {
        body,
        summary: format!("eta = {}\nevaluations = {}\n", sci(r.eta), r.evaluations),
    })
}

fn pvcurve(cfg: &Config) -> Result<Report, CliError> {
    let p = &cfg.pv;
    let mpp = mppt_operating_point(p, cfg.pv_v_step)?;
    let mut rows: Vec<(f64, f64, bool)> = Vec::new();
    for v in voltage_grid(p, cfg.pv_v_step) {
        rows.push((v, solve_pv_current(p, v)?, false));
    }
    let at = rows.partition_point(|r| r.0 < mpp.voltage);
    rows.insert(at, (mpp.voltage, mpp.current, true));

    let mut body = String::from("V,I,P,mpp\n");
    for (v, i, flag) in rows {
        writeln!(
            body,
            "{},{},{},{}",
            sci(v),
            sci(i),
            sci(v * i),
            u8::from(flag)
        )
        .unwrap();
    }
    Ok(Report {
        body,
        summary: format!(
            "mpp_voltage = {}\nmpp_power = {}\n",
            sci(mpp.voltage),
            sci(mpp.power)
        ),
    })
}
