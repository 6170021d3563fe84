//! Solar PV generation: cell model, converter, and the small-signal channel
//! feeding the power balance.

pub mod boost;
pub mod pv;

use nalgebra::DMatrix;

use crate::error::{LfcError, Result};
use crate::lti::{tf_to_ss, StateSpaceModel, TransferFunction};

pub use boost::{boost_switched_step, BoostParams, BoostState, Switch};
pub use pv::{mppt_operating_point, photocurrent, solve_pv_current, OperatingPoint, PvCellParams};

/// Numerator of the lumped PV/converter block, ascending powers: `900 - 18 s`.
pub const DEFAULT_GBC_NUM: [f64; 2] = [900.0, -18.0];
/// Denominator, ascending powers: `50 + 100 s + s^2`.
pub const DEFAULT_GBC_DEN: [f64; 3] = [50.0, 100.0, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SolarChannelParams {
    /// PV share of the load, pu kW/Hz.
    pub kgs: f64,
    /// Lumped PV panel / MPPT / converter transfer function.
    pub gbc: TransferFunction,
}

impl Default for SolarChannelParams {
    fn default() -> Self {
        SolarChannelParams {
            kgs: 0.20,
            gbc: TransferFunction::from_coeffs(&DEFAULT_GBC_NUM, &DEFAULT_GBC_DEN)
                .expect("default block is proper"),
        }
    }
}

/// Small-signal PV channel, `dPgs = Kgs * G_BC(s) * (us + dPis)`.
///
/// States `xs1..xsn` come from the companion realization of `G_BC`, control
/// input `us` (solar controller output), exogenous input `dPis`, output `dPgs`.
pub fn build_solar_subsystem(p: &SolarChannelParams) -> Result<StateSpaceModel> {
    if !p.kgs.is_finite() {
        return Err(LfcError::InvalidParameter(
            "solar.Kgs must be finite".into(),
        ));
    }
    let r = tf_to_ss(&p.gbc)?;
    let n = r.model.n_states();
    let labels: Vec<String> = (1..=n).map(|i| format!("xs{i}")).collect();
    let input = r.model.b().clone();
    StateSpaceModel::from_parts(
        r.model.a().clone(),
        input.clone(),
        input,
        labels,
        vec!["us".into()],
        vec!["dPis".into()],
    )?
    .with_outputs(
        r.model.c() * p.kgs,
        DMatrix::from_element(1, 1, p.kgs * r.feedthrough),
        DMatrix::from_element(1, 1, p.kgs * r.feedthrough),
        vec!["dPgs".into()],
    )
}
