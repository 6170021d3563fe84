//! Line-oriented `key = value` configuration with dotted keys.
//!
//! Every key has a default; a file only lists overrides. `#` starts a comment.

use thiserror::Error;

use crate::assembly::{ControllerGains, SystemParams};
use crate::error::LfcError;
use crate::lti::TransferFunction;
use crate::sim::{PerformanceIndex, Scenario};
use crate::solar::PvCellParams;
use crate::tuner::TuneSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value `{value}` for `{key}`")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("{0}")]
    InvariantViolation(String),
}

impl ConfigError {
    pub fn category(&self) -> &'static str {
        match self {
            ConfigError::UnknownKey { .. } => "UnknownKey",
            ConfigError::InvalidValue { .. } => "InvalidValue",
            ConfigError::Syntax { .. } => "Syntax",
            ConfigError::InvariantViolation(_) => "InvariantViolation",
        }
    }
}

impl From<LfcError> for ConfigError {
    fn from(e: LfcError) -> Self {
        ConfigError::InvariantViolation(e.to_string())
    }
}

/// Step magnitudes and onsets for the `simulate` and `steady` commands.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub t_end: f64,
    pub dt: f64,
    pub dpl: f64,
    pub dpl_onset: f64,
    pub dpiw: f64,
    pub dpiw_onset: f64,
    pub dpis: f64,
    pub dpis_onset: f64,
    /// Run without controllers; controls become the constants below.
    pub open_loop: bool,
    pub dpcd: f64,
    pub dpcu: f64,
    pub us: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            t_end: 60.0,
            dt: 1e-3,
            dpl: 0.01,
            dpl_onset: 1.0,
            dpiw: 0.0,
            dpiw_onset: 0.0,
            dpis: 0.0,
            dpis_onset: 0.0,
            open_loop: false,
            dpcd: 0.0,
            dpcu: 0.0,
            us: 0.0,
        }
    }
}

impl ScenarioConfig {
    /// Disturbance steps, plus constant controls in open loop. Zero steps are omitted.
    pub fn scenario(&self) -> Scenario {
        let mut sc = Scenario::new(self.t_end, self.dt);
        let mut steps = vec![
            ("dPl", self.dpl, self.dpl_onset),
            ("dPiw", self.dpiw, self.dpiw_onset),
            ("dPis", self.dpis, self.dpis_onset),
        ];
        if self.open_loop {
            steps.extend([
                ("dPcd", self.dpcd, 0.0),
                ("dPcu", self.dpcu, 0.0),
                ("us", self.us, 0.0),
            ]);
        }
        for (label, mag, onset) in steps {
            if mag != 0.0 {
                sc = sc.with_step(label, mag, onset);
            }
        }
        sc
    }

    /// Constant inputs for equilibrium analysis, `(label, value)`.
    pub fn constant_inputs(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![("dPl", self.dpl), ("dPiw", self.dpiw), ("dPis", self.dpis)];
        if self.open_loop {
            v.extend([("dPcd", self.dpcd), ("dPcu", self.dpcu), ("us", self.us)]);
        }
        v
    }
}

/// Nameplate ratings; the load is the per-unit power base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratings {
    pub wind_kw: f64,
    pub diesel_kw: f64,
    pub pv_kw: f64,
    pub load_kw: f64,
}

impl Default for Ratings {
    fn default() -> Self {
        Ratings {
            wind_kw: 150.0,
            diesel_kw: 150.0,
            pv_kw: 60.0,
            load_kw: 300.0,
        }
    }
}

/// Steps and onset of the tuner's evaluation scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneScenarioConfig {
    pub t_end: f64,
    pub dt: f64,
    pub dpl: f64,
    pub dpiw: f64,
    pub dpis: f64,
    pub onset: f64,
}

impl Default for TuneScenarioConfig {
    fn default() -> Self {
        TuneScenarioConfig {
            t_end: 60.0,
            dt: 1e-3,
            dpl: 0.01,
            dpiw: 0.01,
            dpis: 0.01,
            onset: 1.0,
        }
    }
}

impl TuneScenarioConfig {
    pub fn scenario(&self) -> Scenario {
        let mut sc = Scenario::new(self.t_end, self.dt);
        for (label, mag) in [("dPl", self.dpl), ("dPiw", self.dpiw), ("dPis", self.dpis)] {
            if mag != 0.0 {
                sc = sc.with_step(label, mag, self.onset);
            }
        }
        sc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub system: SystemParams,
    pub gains: ControllerGains,
    pub scenario: ScenarioConfig,
    pub tune: TuneSpec,
    pub tune_scenario: TuneScenarioConfig,
    pub pv: PvCellParams,
    pub pv_v_step: f64,
    pub ratings: Ratings,
}

impl Default for Config {
    fn default() -> Self {
        let tune_scenario = TuneScenarioConfig::default();
        Config {
            system: SystemParams::default(),
            gains: ControllerGains::default(),
            scenario: ScenarioConfig::default(),
            tune: TuneSpec {
                scenario: tune_scenario.scenario(),
                ..TuneSpec::default()
            },
            tune_scenario,
            pv: PvCellParams::default(),
            pv_v_step: 0.01,
            ratings: Ratings::default(),
        }
    }
}

enum Value<'a> {
    Real(&'a mut f64),
    Count(&'a mut usize),
    Seed(&'a mut u64),
    Flag(&'a mut bool),
    Coeffs(&'a mut Vec<f64>),
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn gain_index(name: &str) -> Option<usize> {
    ControllerGains::NAMES.iter().position(|n| *n == name)
}

/// Raw settings before the solar transfer function is rebuilt.
struct Draft {
    cfg: Config,
    gbc_num: Vec<f64>,
    gbc_den: Vec<f64>,
    gains: [f64; 6],
    include_dft: bool,
}

impl Draft {
    fn slot(&mut self, key: &str) -> Option<Value<'_>> {
        use Value::*;
        let c = &mut self.cfg;
        let (section, name) = key.split_once('.')?;
        Some(match (section, name) {
            ("diesel", "Kd") => Real(&mut c.system.diesel.kd),
            ("diesel", "Td1") => Real(&mut c.system.diesel.td1),
            ("diesel", "Td2") => Real(&mut c.system.diesel.td2),
            ("diesel", "Td3") => Real(&mut c.system.diesel.td3),
            ("diesel", "Td4") => Real(&mut c.system.diesel.td4),
            ("diesel", "Rd") => Real(&mut c.system.diesel.rd),
            ("wind", "Tw") => Real(&mut c.system.wind.tw),
            ("wind", "Kig") => Real(&mut c.system.wind.kig),
            ("wind", "Ktp") => Real(&mut c.system.wind.ktp),
            ("wind", "Kpc") => Real(&mut c.system.wind.kpc),
            ("wind", "Kp1") => Real(&mut c.system.wind.kp1),
            ("wind", "Kp2") => Real(&mut c.system.wind.kp2),
            ("wind", "Kp3") => Real(&mut c.system.wind.kp3),
            ("wind", "Tp1") => Real(&mut c.system.wind.tp1),
            ("wind", "Tp2") => Real(&mut c.system.wind.tp2),
            ("wind", "Tp3") => Real(&mut c.system.wind.tp3),
            ("solar", "Kgs") => Real(&mut c.system.solar.kgs),
            ("solar", "num") => Coeffs(&mut self.gbc_num),
            ("solar", "den") => Coeffs(&mut self.gbc_den),
            ("system", "Kp") => Real(&mut c.system.kp),
            ("system", "Tp") => Real(&mut c.system.tp),
            ("system", "F") => Real(&mut c.system.fs_nominal),
            ("system", "include_solar") => Flag(&mut c.system.include_solar),
            ("gains", g) => Real(&mut self.gains[gain_index(g)?]),
            ("scenario", "t_end") => Real(&mut c.scenario.t_end),
            ("scenario", "dt") => Real(&mut c.scenario.dt),
            ("scenario", "dPl") => Real(&mut c.scenario.dpl),
            ("scenario", "dPl_onset") => Real(&mut c.scenario.dpl_onset),
            ("scenario", "dPiw") => Real(&mut c.scenario.dpiw),
            ("scenario", "dPiw_onset") => Real(&mut c.scenario.dpiw_onset),
            ("scenario", "dPis") => Real(&mut c.scenario.dpis),
            ("scenario", "dPis_onset") => Real(&mut c.scenario.dpis_onset),
            ("scenario", "open_loop") => Flag(&mut c.scenario.open_loop),
            ("scenario", "dPcd") => Real(&mut c.scenario.dpcd),
            ("scenario", "dPcu") => Real(&mut c.scenario.dpcu),
            ("scenario", "us") => Real(&mut c.scenario.us),
            ("tune", "budget") => Count(&mut c.tune.budget),
            ("tune", "seed") => Seed(&mut c.tune.seed),
            ("tune", "per_loop") => Flag(&mut c.tune.per_loop),
            ("tune", "include_dFt") => Flag(&mut self.include_dft),
            ("tune", "t_end") => Real(&mut c.tune_scenario.t_end),
            ("tune", "dt") => Real(&mut c.tune_scenario.dt),
            ("tune", "dPl") => Real(&mut c.tune_scenario.dpl),
            ("tune", "dPiw") => Real(&mut c.tune_scenario.dpiw),
            ("tune", "dPis") => Real(&mut c.tune_scenario.dpis),
            ("tune", "onset") => Real(&mut c.tune_scenario.onset),
            ("tune", bound) => {
                let (gain, end) = bound.rsplit_once('_')?;
                let b = &mut c.tune.bounds[gain_index(gain)?];
                match end {
                    "min" => Real(&mut b.lo),
                    "max" => Real(&mut b.hi),
                    _ => return None,
                }
            }
            ("pv", "Isc") => Real(&mut c.pv.isc),
            ("pv", "KI") => Real(&mut c.pv.ki),
            ("pv", "Isat") => Real(&mut c.pv.isat),
            ("pv", "Rs") => Real(&mut c.pv.rs),
            ("pv", "Aq") => Real(&mut c.pv.aq),
            ("pv", "T") => Real(&mut c.pv.temperature),
            ("pv", "lambda") => Real(&mut c.pv.irradiance),
            ("pv", "v_step") => Real(&mut c.pv_v_step),
            ("rating", "wind_kw") => Real(&mut c.ratings.wind_kw),
            ("rating", "diesel_kw") => Real(&mut c.ratings.diesel_kw),
            ("rating", "pv_kw") => Real(&mut c.ratings.pv_kw),
            ("rating", "load_kw") => Real(&mut c.ratings.load_kw),
            _ => return None,
        })
    }
}

/// Parses a configuration file, applying its overrides on top of the defaults.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let defaults = Config::default();
    let mut draft = Draft {
        gbc_num: defaults.system.solar.gbc.num().coeffs().to_vec(),
        gbc_den: defaults.system.solar.gbc.den().coeffs().to_vec(),
        gains: defaults.gains.to_array(),
        include_dft: defaults.tune.index == PerformanceIndex::FrequencyAndTurbine,
        cfg: defaults,
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or(ConfigError::Syntax { line })?;
        let invalid = || ConfigError::InvalidValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        };
        let slot = draft.slot(key).ok_or_else(|| ConfigError::UnknownKey {
            line,
            key: key.to_string(),
        })?;
        match slot {
            Value::Real(r) => *r = parse_real(value).ok_or_else(invalid)?,
            Value::Count(n) => *n = value.parse().map_err(|_| invalid())?,
            Value::Seed(s) => *s = value.parse().map_err(|_| invalid())?,
            Value::Flag(b) => *b = parse_bool(value).ok_or_else(invalid)?,
            Value::Coeffs(v) => {
                *v = value
                    .split(',')
                    .map(|t| parse_real(t.trim()))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(invalid)?
            }
        }
    }

    let mut cfg = draft.cfg;
    cfg.system.solar.gbc = TransferFunction::from_coeffs(&draft.gbc_num, &draft.gbc_den)?;
    cfg.gains = ControllerGains::from_array(draft.gains);
    cfg.tune.index = if draft.include_dft {
        PerformanceIndex::FrequencyAndTurbine
    } else {
        PerformanceIndex::Frequency
    };
    cfg.tune.scenario = cfg.tune_scenario.scenario();
    cfg.validate()?;
    Ok(cfg)
}

impl Config {
    /// Checks every parameter invariant of the merged configuration.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.system.validate()?;
        self.scenario.scenario().validate()?;
        self.tune.validate()?;
        self.pv.validate()?;
        if !(self.pv_v_step > 0.0) {
            return Err(ConfigError::InvariantViolation("pv.v_step > 0".into()));
        }
        if !(self.ratings.load_kw > 0.0) {
            return Err(ConfigError::InvariantViolation("rating.load_kw > 0".into()));
        }
        Ok(())
    }

    /// Gains as a configuration fragment that [`parse_config`] reads back exactly.
    pub fn gains_fragment(gains: &ControllerGains) -> String {
        ControllerGains::NAMES
            .iter()
            .zip(gains.to_array())
            .map(|(n, v)| format!("gains.{n} = {v}\n"))
            .collect()
    }
}
