//! Wind turbine speed dynamics, induction-generator power coupling and the
//! blade pitch actuator chain.

use nalgebra::DMatrix;

use crate::error::{LfcError, Result};
use crate::lti::{StateSpaceModel, TransferFunction};

pub const TURBINE_STATES: [&str; 1] = ["dFt"];
pub const PITCH_STATES: [&str; 3] = ["dPcw", "dPC1", "dPC2"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindParams {
    /// Turbine time constant, s.
    pub tw: f64,
    /// Wind share of the load (slip dependent), pu kW/Hz.
    pub kig: f64,
    /// Slope coefficient of the turbine power curve, pu kW/Hz.
    pub ktp: f64,
    /// Blade characteristic constant, pu kW/deg.
    pub kpc: f64,
    pub kp1: f64,
    pub kp2: f64,
    pub kp3: f64,
    pub tp1: f64,
    pub tp2: f64,
    pub tp3: f64,
}

impl Default for WindParams {
    fn default() -> Self {
        WindParams {
            tw: 4.0,
            kig: 0.9969,
            ktp: 0.003333,
            kpc: 0.08,
            kp1: 1.25,
            kp2: 1.0,
            kp3: 1.4,
            tp1: 0.6,
            tp2: 0.041,
            tp3: 1.0,
        }
    }
}

impl WindParams {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("wind.Tw > 0", self.tw),
            ("wind.Tp2 > 0", self.tp2),
            ("wind.Tp3 > 0", self.tp3),
        ] {
            if !(v > 0.0) {
                return Err(LfcError::InvalidParameter(format!("{what} (got {v})")));
            }
        }
        let damping = 1.0 + self.kig - self.ktp;
        if !(damping > 0.0) {
            return Err(LfcError::InvalidParameter(format!(
                "1 + wind.Kig - wind.Ktp > 0 (got {damping})"
            )));
        }
        let rest = [self.kpc, self.kp1, self.kp2, self.kp3, self.tp1];
        if rest.iter().any(|v| !v.is_finite()) {
            return Err(LfcError::InvalidParameter(
                "wind gains must be finite".into(),
            ));
        }
        Ok(())
    }

    /// The full pitch chain `Kpc Kp3/(1+sTp3) * Kp2/(1+sTp2) * Kp1(1+sTp1)/(1+s)`.
    pub fn pitch_transfer_function(&self) -> Result<TransferFunction> {
        let response = TransferFunction::first_order_lag(self.kpc * self.kp3, self.tp3)?;
        let hydraulic = TransferFunction::first_order_lag(self.kp2, self.tp2)?;
        let lead = TransferFunction::from_coeffs(&[self.kp1, self.kp1 * self.tp1], &[1.0, 1.0])?;
        response.series(&hydraulic)?.series(&lead)
    }
}

/// Induction generator output deviation for a given turbine/system speed deviation.
pub fn wind_generation(kig: f64, dft: f64, dfs: f64) -> f64 {
    kig * (dft - dfs)
}

/// One-state turbine model for `dFt` with exogenous inputs `[dFs, dPiw, dPcw]`.
pub fn build_turbine_subsystem(p: &WindParams) -> Result<StateSpaceModel> {
    p.validate()?;
    let a = DMatrix::from_element(1, 1, -(1.0 + p.kig - p.ktp) / p.tw);
    let g = DMatrix::from_row_slice(1, 3, &[p.kig / p.tw, 1.0 / p.tw, 1.0 / p.tw]);
    StateSpaceModel::new(
        a,
        DMatrix::zeros(1, 0),
        g,
        &TURBINE_STATES,
        &[],
        &["dFs", "dPiw", "dPcw"],
    )
}

/// Three-state pitch chain `[dPcw, dPC1, dPC2]` driven by the controller output `dPcu`.
///
/// The lead block is split as `Kp1 (Tp1 + (1 - Tp1)/(1 + s))`: `dPC2` is the
/// hydraulic actuator output, `dPC1` the `(1 - Tp1)/(1 + s)` branch, and the
/// response unit lags `Kp1 (dPC1 + Tp1 dPC2)` with time constant `Tp3`. Both
/// couplings into `dPcw` are therefore divided by `Tp3`.
pub fn build_pitch_subsystem(p: &WindParams) -> Result<StateSpaceModel> {
    if !(p.tp2 > 0.0 && p.tp3 > 0.0) {
        return Err(LfcError::InvalidParameter(
            "wind.Tp2 > 0 and wind.Tp3 > 0".into(),
        ));
    }
    let gain = p.kpc * p.kp3 * p.kp1;
    let mut a = DMatrix::zeros(3, 3);
    a[(0, 0)] = -1.0 / p.tp3;
    a[(0, 1)] = gain / p.tp3;
    a[(0, 2)] = gain * p.tp1 / p.tp3;
    a[(1, 1)] = -1.0;
    a[(1, 2)] = 1.0 - p.tp1;
    a[(2, 2)] = -1.0 / p.tp2;
    let mut b = DMatrix::zeros(3, 1);
    b[(2, 0)] = p.kp2 / p.tp2;
    StateSpaceModel::new(a, b, DMatrix::zeros(3, 0), &PITCH_STATES, &["dPcu"], &[])?.with_outputs(
        DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]),
        DMatrix::zeros(1, 1),
        DMatrix::zeros(1, 0),
        vec!["dPcw".into()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{eigenvalues, tf_dc_gain};
    use nalgebra::{dvector, Complex};

    #[test]
    fn generation_coupling() {
        assert_eq!(wind_generation(0.9969, 0.3, 0.3), 0.0);
        assert_eq!(wind_generation(0.9969, 1.0, 0.0), 0.9969);
        let a = wind_generation(0.9969, 0.4, -0.1);
        let b = wind_generation(0.9969, 0.8, -0.2);
        assert!((b - 2.0 * a).abs() < 1e-15);
    }

    #[test]
    fn turbine_coefficients() {
        let p = WindParams::default();
        let m = build_turbine_subsystem(&p).unwrap();
        assert!((m.a()[(0, 0)] + 0.49839175).abs() < 1e-8);
        assert_eq!(m.g()[(0, 0)], 0.9969 / 4.0);
        assert_eq!(m.g()[(0, 1)], 0.25);
        assert_eq!(m.g()[(0, 2)], 0.25);
    }

    #[test]
    fn turbine_equilibrium() {
        let p = WindParams::default();
        let m = build_turbine_subsystem(&p).unwrap();
        let dfs = 0.3;
        let x = -m.g()[(0, 0)] * dfs / m.a()[(0, 0)];
        assert!((x - p.kig * dfs / (1.0 + p.kig - p.ktp)).abs() < 1e-14);
        let d = m.derivative(&dvector![0.0], &dvector![], &dvector![0.0, 0.0, 0.0]);
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn rejects_unstable_turbine_pole() {
        let p = WindParams {
            ktp: 2.5,
            ..Default::default()
        };
        assert!(build_turbine_subsystem(&p).is_err());
    }

    #[test]
    fn pitch_dc_gain() {
        let p = WindParams::default();
        let m = build_pitch_subsystem(&p).unwrap();
        let x = m.a().clone().lu().solve(&(-m.b().column(0))).unwrap();
        assert!((x[0] - 0.14).abs() < 1e-12);
        assert!((tf_dc_gain(&p.pitch_transfer_function().unwrap()).unwrap() - 0.14).abs() < 1e-12);
    }

    #[test]
    fn pitch_actuator_input_coefficient() {
        let m = build_pitch_subsystem(&WindParams::default()).unwrap();
        assert!((m.b()[(2, 0)] - 24.390243902439025).abs() < 1e-12);
    }

    #[test]
    fn pitch_has_unit_pole() {
        let m = build_pitch_subsystem(&WindParams::default()).unwrap();
        let ev = eigenvalues(m.a()).unwrap();
        assert!(ev.iter().any(|l| (l.re + 1.0).abs() < 1e-12));
    }

    #[test]
    fn pitch_matches_chain_transfer_function() {
        let p = WindParams::default();
        let m = build_pitch_subsystem(&p).unwrap();
        let tf = p.pitch_transfer_function().unwrap();
        for w in [0.05, 0.5, 1.0, 3.0, 25.0, 200.0] {
            let s = Complex::new(0.0, w);
            let got = m.frequency_response(0, 0, s);
            let want = tf.eval(s);
            assert!((got - want).norm() <= 1e-9 * want.norm());
        }
    }

    #[test]
    fn pitch_at_rest() {
        let m = build_pitch_subsystem(&WindParams::default()).unwrap();
        let d = m.derivative(&dvector![0.0, 0.0, 0.0], &dvector![0.0], &dvector![]);
        assert_eq!(d.norm(), 0.0);
    }
}
