//! Single-diode PV cell model and maximum power point search.

use crate::error::{LfcError, Result};

pub const ELECTRON_CHARGE: f64 = 1.602e-19;
pub const BOLTZMANN: f64 = 1.380649e-23;
const KELVIN_OFFSET: f64 = 273.15;

/// Newton iteration cap for the implicit current equation.
pub const MAX_NEWTON_ITERATIONS: usize = 100;
/// Relative residual target (scaled by the photocurrent).
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Golden-section termination width for the MPP refinement, V.
pub const MPP_VOLTAGE_TOLERANCE: f64 = 1e-6;

/// Cell parameters. The numeric defaults are a generic silicon cell used for
/// configuration only; they are not taken from any published data set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvCellParams {
    /// Short-circuit current at 1000 W/m² and 25 °C, A.
    pub isc: f64,
    /// Short-circuit current temperature coefficient, A/°C.
    pub ki: f64,
    /// Diode saturation current, A.
    pub isat: f64,
    /// Series resistance, ohm.
    pub rs: f64,
    /// Diode quality factor.
    pub aq: f64,
    /// Cell temperature, °C.
    pub temperature: f64,
    /// Irradiance, W/m².
    pub irradiance: f64,
    pub q: f64,
    pub k: f64,
}

impl Default for PvCellParams {
    fn default() -> Self {
        PvCellParams {
            isc: 3.8,
            ki: 0.0024,
            isat: 3.6e-9,
            rs: 0.05,
            aq: 1.3,
            temperature: 25.0,
            irradiance: 1000.0,
            q: ELECTRON_CHARGE,
            k: BOLTZMANN,
        }
    }
}

impl PvCellParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("pv.Isc > 0", self.isc > 0.0),
            ("pv.Isat > 0", self.isat > 0.0),
            ("pv.lambda >= 0", self.irradiance >= 0.0),
            ("pv.Aq > 0", self.aq > 0.0),
            ("pv.Rs >= 0", self.rs >= 0.0),
            ("pv.q > 0", self.q > 0.0),
            ("pv.k > 0", self.k > 0.0),
            (
                "pv.T above absolute zero",
                self.temperature + KELVIN_OFFSET > 0.0,
            ),
            ("pv.KI finite", self.ki.is_finite()),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((what, _)) => Err(LfcError::InvalidParameter(what.to_string())),
            None => Ok(()),
        }
    }

    /// Diode thermal voltage scaled by the quality factor, `Aq k T / q`, V.
    pub fn thermal_voltage(&self) -> f64 {
        self.aq * self.k * (self.temperature + KELVIN_OFFSET) / self.q
    }
}

/// Light-generated current, linear in irradiance.
pub fn photocurrent(p: &PvCellParams) -> f64 {
    (p.irradiance / 1000.0) * (p.isc + p.ki * (p.temperature - 25.0))
}

/// Voltage at which the terminal current is zero.
pub fn open_circuit_voltage(p: &PvCellParams) -> f64 {
    let iph = photocurrent(p);
    if iph <= 0.0 {
        return 0.0;
    }
    p.thermal_voltage() * (iph / p.isat).ln_1p()
}

/// Residual of the implicit single-diode equation, `Iph - Isat (e^x - 1) - I`.
pub fn current_residual(p: &PvCellParams, voltage: f64, current: f64) -> f64 {
    let x = (voltage + current * p.rs) / p.thermal_voltage();
    photocurrent(p) - p.isat * x.exp_m1() - current
}

/// Terminal current at `voltage`, from the implicit single-diode equation.
///
/// Safeguarded Newton: iterates stay inside a sign-change bracket starting at
/// `[-Isat, Iph]` (widened downwards if the voltage is past open circuit) and
/// fall back to bisection whenever a Newton step leaves it.
pub fn solve_pv_current(p: &PvCellParams, voltage: f64) -> Result<f64> {
    let iph = photocurrent(p);
    let vt = p.thermal_voltage();
    let f = |i: f64| current_residual(p, voltage, i);
    let tol = RESIDUAL_TOLERANCE * iph.max(p.isat);

    let mut hi = iph;
    let mut lo = -p.isat;
    let mut widen = 0;
    while f(lo) < 0.0 {
        lo = hi - 2.0 * (hi - lo);
        widen += 1;
        if widen > 200 {
            return Err(LfcError::NoConvergence { voltage });
        }
    }

    // f is decreasing and concave in I, so Newton from the upper end moves
    // monotonically towards the root.
    let mut i = hi;
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let r = f(i);
        if r.abs() <= tol {
            return Ok(i);
        }
        if r > 0.0 {
            lo = i;
        } else {
            hi = i;
        }
        let x = (voltage + i * p.rs) / vt;
        let slope = -p.isat * p.rs / vt * x.exp() - 1.0;
        let newton = i - r / slope;
        i = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
    }
    let r = f(i);
    if r.abs() <= tol {
        Ok(i)
    } else {
        Err(LfcError::NoConvergence { voltage })
    }
}

/// Operating point on the I-V curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub voltage: f64,
    pub current: f64,
    pub power: f64,
}

fn operating_point(p: &PvCellParams, voltage: f64) -> Result<OperatingPoint> {
    let current = solve_pv_current(p, voltage)?;
    Ok(OperatingPoint {
        voltage,
        current,
        power: voltage * current,
    })
}

/// Voltage grid `0, step, 2 step, ...` up to and including open circuit.
pub fn voltage_grid(p: &PvCellParams, v_step: f64) -> Vec<f64> {
    let voc = open_circuit_voltage(p);
    let mut grid: Vec<f64> = (0..)
        .map(|k| k as f64 * v_step)
        .take_while(|&v| v < voc)
        .collect();
    grid.push(voc);
    grid
}

/// Maximum power point: coarse scan on a `v_step` grid followed by a
/// golden-section refinement around the best grid sample.
pub fn mppt_operating_point(p: &PvCellParams, v_step: f64) -> Result<OperatingPoint> {
    if !(v_step > 0.0) {
        return Err(LfcError::InvalidParameter(format!(
            "voltage step must be positive (got {v_step})"
        )));
    }
    p.validate()?;
    let voc = open_circuit_voltage(p);
    if voc <= 0.0 {
        return Ok(OperatingPoint {
            voltage: 0.0,
            current: 0.0,
            power: 0.0,
        });
    }

    let grid = voltage_grid(p, v_step);
    let mut best_idx = 0;
    let mut best = operating_point(p, grid[0])?;
    for (idx, &v) in grid.iter().enumerate().skip(1) {
        let pt = operating_point(p, v)?;
        if pt.power > best.power {
            best = pt;
            best_idx = idx;
        }
    }

    let mut a = grid[best_idx.saturating_sub(1)];
    let mut b = grid[(best_idx + 1).min(grid.len() - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut pc = operating_point(p, c)?.power;
    let mut pd = operating_point(p, d)?.power;
    while b - a > MPP_VOLTAGE_TOLERANCE {
        if pc > pd {
            b = d;
            d = c;
            pd = pc;
            c = b - inv_phi * (b - a);
            pc = operating_point(p, c)?.power;
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + inv_phi * (b - a);
            pd = operating_point(p, d)?.power;
        }
    }
    let refined = operating_point(p, 0.5 * (a + b))?;
    Ok(if refined.power >= best.power {
        refined
    } else {
        best
    })
}
