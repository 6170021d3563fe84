//! Diesel engine, speed governor and generation lag.
//!
//! The governor `Kd (1 + s Td1) / ((1 + s Td2)(1 + s Td3))` is split into two
//! first-order lags with residues `K1`, `K2`, driven by the speed-changer
//! command `dPcd` minus the droop feedback `dFs / Rd`. Their sum feeds the
//! generation lag `1 / (1 + s Td4)` producing `dPgd`.

use nalgebra::DMatrix;

use crate::error::{LfcError, Result};
use crate::lti::StateSpaceModel;

/// Time-constant difference below which the residues are considered degenerate.
pub const DEGENERATE_TOLERANCE: f64 = 1e-9;

pub const STATES: [&str; 3] = ["dXED11", "dXED21", "dPgd"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DieselParams {
    /// Share of the load supplied by the diesel unit, pu kW/Hz.
    pub kd: f64,
    pub td1: f64,
    pub td2: f64,
    pub td3: f64,
    /// Generation time constant, s.
    pub td4: f64,
    /// Speed regulation, Hz / pu kW.
    pub rd: f64,
}

impl Default for DieselParams {
    fn default() -> Self {
        DieselParams {
            kd: 0.3333,
            td1: 1.0,
            td2: 2.0,
            td3: 0.025,
            td4: 3.0,
            rd: 5.0,
        }
    }
}

impl DieselParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("diesel.Td2 > 0", self.td2),
            ("diesel.Td3 > 0", self.td3),
            ("diesel.Td4 > 0", self.td4),
            ("diesel.Rd > 0", self.rd),
        ];
        for (what, v) in positive {
            if !(v > 0.0) {
                return Err(LfcError::InvalidParameter(format!("{what} (got {v})")));
            }
        }
        if !self.kd.is_finite() || !self.td1.is_finite() {
            return Err(LfcError::InvalidParameter(
                "diesel.Kd and diesel.Td1 must be finite".into(),
            ));
        }
        if (self.td2 - self.td3).abs() < DEGENERATE_TOLERANCE {
            return Err(LfcError::DegenerateTimeConstants {
                td2: self.td2,
                td3: self.td3,
            });
        }
        Ok(())
    }
}

/// Partial-fraction residues `(K1, K2)` of the governor transfer function.
pub fn governor_residues(p: &DieselParams) -> Result<(f64, f64)> {
    if (p.td2 - p.td3).abs() < DEGENERATE_TOLERANCE {
        return Err(LfcError::DegenerateTimeConstants {
            td2: p.td2,
            td3: p.td3,
        });
    }
    let k1 = p.kd * (p.td2 - p.td1) / (p.td2 - p.td3);
    let k2 = p.kd * (p.td3 - p.td1) / (p.td3 - p.td2);
    Ok((k1, k2))
}

/// Three-state diesel model: states `[dXED11, dXED21, dPgd]`, control `dPcd`,
/// coupling input `dFs`.
pub fn build_diesel_subsystem(p: &DieselParams) -> Result<StateSpaceModel> {
    p.validate()?;
    let (k1, k2) = governor_residues(p)?;

    let mut a = DMatrix::zeros(3, 3);
    let mut b = DMatrix::zeros(3, 1);
    let mut g = DMatrix::zeros(3, 1);

    a[(0, 0)] = -1.0 / p.td2;
    b[(0, 0)] = k1 / p.td2;
    g[(0, 0)] = -k1 / (p.rd * p.td2);

    a[(1, 1)] = -1.0 / p.td3;
    b[(1, 0)] = k2 / p.td3;
    g[(1, 0)] = -k2 / (p.rd * p.td3);

    a[(2, 0)] = 1.0 / p.td4;
    a[(2, 1)] = 1.0 / p.td4;
    a[(2, 2)] = -1.0 / p.td4;

    StateSpaceModel::new(a, b, g, &STATES, &["dPcd"], &["dFs"])
}
