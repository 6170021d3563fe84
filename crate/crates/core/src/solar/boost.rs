//! Boost converter between the PV array and the DC link: exact switched
//! dynamics per switch position, plus the duty-cycle averaged model.

use crate::error::{LfcError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostParams {
    /// Inductance, H.
    pub inductance: f64,
    /// Output capacitance, F.
    pub capacitance: f64,
    /// Load resistance, ohm.
    pub resistance: f64,
    /// Switching period, s.
    pub period: f64,
    /// Fraction of the period the switch conducts, in `[0, 1)`.
    pub duty: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            inductance: 1e-3,
            capacitance: 100e-6,
            resistance: 10.0,
            period: 1e-5,
            duty: 0.5,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.inductance > 0.0
            && self.capacitance > 0.0
            && self.resistance > 0.0
            && self.period > 0.0
            && (0.0..1.0).contains(&self.duty);
        if ok {
            Ok(())
        } else {
            Err(LfcError::InvalidParameter(
                "boost: L, C, R, Ts > 0 and 0 <= duty < 1".into(),
            ))
        }
    }

    pub fn rc(&self) -> f64 {
        self.resistance * self.capacitance
    }
}

/// Switch position. `On`: IGBT conducts, diode blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoostState {
    /// Inductor current, A.
    pub il: f64,
    /// Output voltage, V.
    pub vo: f64,
}

fn switched_derivative(p: &BoostParams, s: BoostState, vpv: f64, sw: Switch) -> BoostState {
    match sw {
        Switch::On => BoostState {
            il: vpv / p.inductance,
            vo: -s.vo / (p.resistance * p.capacitance),
        },
        Switch::Off => BoostState {
            il: (vpv - s.vo) / p.inductance,
            vo: (s.il - s.vo / p.resistance) / p.capacitance,
        },
    }
}

/// Averaged dynamics: the two switched vector fields weighted by the duty cycle.
pub fn averaged_derivative(p: &BoostParams, s: BoostState, vpv: f64) -> BoostState {
    let on = switched_derivative(p, s, vpv, Switch::On);
    let off = switched_derivative(p, s, vpv, Switch::Off);
    BoostState {
        il: p.duty * on.il + (1.0 - p.duty) * off.il,
        vo: p.duty * on.vo + (1.0 - p.duty) * off.vo,
    }
}

/// Equilibrium of the averaged model: `vo = Vpv/(1-d)`, `iL = vo / (R (1-d))`.
pub fn averaged_steady_state(p: &BoostParams, vpv: f64) -> BoostState {
    let vo = vpv / (1.0 - p.duty);
    BoostState {
        il: vo / (p.resistance * (1.0 - p.duty)),
        vo,
    }
}

/// One classical RK4 step of the linear ODE for a fixed switch position.
pub fn boost_switched_step(
    p: &BoostParams,
    s: BoostState,
    vpv: f64,
    sw: Switch,
    dt: f64,
) -> BoostState {
    debug_assert!(dt > 0.0);
    let add = |a: BoostState, b: BoostState, h: f64| BoostState {
        il: a.il + h * b.il,
        vo: a.vo + h * b.vo,
    };
    let k1 = switched_derivative(p, s, vpv, sw);
    let k2 = switched_derivative(p, add(s, k1, dt / 2.0), vpv, sw);
    let k3 = switched_derivative(p, add(s, k2, dt / 2.0), vpv, sw);
    let k4 = switched_derivative(p, add(s, k3, dt), vpv, sw);
    BoostState {
        il: s.il + dt / 6.0 * (k1.il + 2.0 * k2.il + 2.0 * k3.il + k4.il),
        vo: s.vo + dt / 6.0 * (k1.vo + 2.0 * k2.vo + 2.0 * k3.vo + k4.vo),
    }
}

/// Result of a multi-period switched run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchedRun {
    pub last: BoostState,
    /// Output voltage averaged over the final switching period.
    pub mean_vo_last_period: f64,
    pub mean_il_last_period: f64,
}

/// Simulates `periods` switching periods, each split into `substeps` RK4
/// steps. A substep is switched on when its midpoint falls inside the duty
/// fraction of the period.
pub fn run_switched(
    p: &BoostParams,
    vpv: f64,
    initial: BoostState,
    periods: usize,
    substeps: usize,
) -> Result<SwitchedRun> {
    p.validate()?;
    if periods == 0 || substeps == 0 {
        return Err(LfcError::InvalidParameter(
            "periods and substeps must be positive".into(),
        ));
    }
    let dt = p.period / substeps as f64;
    let pattern: Vec<Switch> = (0..substeps)
        .map(|i| {
            if (i as f64 + 0.5) / (substeps as f64) < p.duty {
                Switch::On
            } else {
                Switch::Off
            }
        })
        .collect();
    let mut s = initial;
    let (mut sum_vo, mut sum_il) = (0.0, 0.0);
    for period in 0..periods {
        let last = period + 1 == periods;
        for &sw in &pattern {
            let next = boost_switched_step(p, s, vpv, sw, dt);
            if last {
                // trapezoid over the substep
                sum_vo += 0.5 * (s.vo + next.vo);
                sum_il += 0.5 * (s.il + next.il);
            }
            s = next;
        }
    }
    Ok(SwitchedRun {
        last: s,
        mean_vo_last_period: sum_vo / substeps as f64,
        mean_il_last_period: sum_il / substeps as f64,
    })
}
