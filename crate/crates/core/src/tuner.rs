//! PI gain search minimizing the integral-squared-error index.
//!
//! Compass (coordinate pattern) search: every sweep polls `x +- step_i` along
//! each active coordinate, moves to the best strictly improving candidate, and
//! halves the steps when none improves. Unstable closed loops cost `+inf`, so
//! every accepted point is stable. Candidates of one sweep are evaluated in
//! parallel; the acceptance rule only depends on their fixed poll order.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assembly::{AugmentedModel, ControllerGains, SystemParams, STABILITY_MARGIN};
use crate::error::{LfcError, Result};
use crate::sim::{integrate, performance_index, PerformanceIndex, Scenario};

/// Steps stop shrinking below this fraction of the parameter range.
pub const MIN_STEP_FRACTION: f64 = 1e-6;
/// Initial step as a fraction of the parameter range.
pub const INITIAL_STEP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainBounds {
    pub lo: f64,
    pub hi: f64,
}

impl GainBounds {
    pub fn new(lo: f64, hi: f64) -> Self {
        GainBounds { lo, hi }
    }

    fn range(&self) -> f64 {
        self.hi - self.lo
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneSpec {
    /// Bounds in [`ControllerGains::NAMES`] order.
    pub bounds: [GainBounds; 6],
    /// Scenario the index is evaluated on.
    pub scenario: Scenario,
    /// Maximum number of cost evaluations, including the initial guess.
    pub budget: usize,
    /// Seeds the coordinate poll order.
    pub seed: u64,
    pub index: PerformanceIndex,
    /// Tune diesel, pitch and PV loops one after another instead of jointly.
    pub per_loop: bool,
    /// Starting point; 0.5 on every gain when `None`.
    pub initial: Option<ControllerGains>,
}

/// Default evaluation scenario: 0.01 pu steps of load, wind input and solar
/// input at t = 1 s, observed for 60 s. Exciting all three channels keeps the
/// pitch integral from collapsing to a near-marginal mode.
pub fn default_tuning_scenario() -> Scenario {
    Scenario::new(60.0, 1e-3)
        .with_step("dPl", 0.01, 1.0)
        .with_step("dPiw", 0.01, 1.0)
        .with_step("dPis", 0.01, 1.0)
}

impl Default for TuneSpec {
    fn default() -> Self {
        let p = GainBounds::new(0.0, 100.0);
        let i = GainBounds::new(0.0, 50.0);
        TuneSpec {
            bounds: [p, i, p, i, p, i],
            scenario: default_tuning_scenario(),
            budget: 300,
            seed: 0,
            index: PerformanceIndex::Frequency,
            per_loop: false,
            initial: None,
        }
    }
}

impl TuneSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, b) in ControllerGains::NAMES.iter().zip(&self.bounds) {
            if !(b.lo.is_finite() && b.hi.is_finite() && b.lo <= b.hi) {
                return Err(LfcError::InvalidParameter(format!(
                    "tune bounds for {name}: require finite lo <= hi (got [{}, {}])",
                    b.lo, b.hi
                )));
            }
        }
        if self.budget < 1 {
            return Err(LfcError::InvalidParameter("tune.budget >= 1".into()));
        }
        self.scenario.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub gains: ControllerGains,
    pub eta: f64,
    pub evaluations: usize,
    /// Cost of the starting point.
    pub initial_eta: f64,
}

/// Closed-loop cost of a gain set; `+inf` when the loop is not stable or the
/// scenario cannot be integrated at its step size.
pub fn evaluate_gains(
    params: &SystemParams,
    gains: &ControllerGains,
    scenario: &Scenario,
    index: PerformanceIndex,
) -> f64 {
    let cost = || -> Result<f64> {
        let model = AugmentedModel::build(params, gains)?;
        let stable = model.eigenvalues()?.iter().all(|l| l.re < STABILITY_MARGIN);
        if !stable {
            return Ok(f64::INFINITY);
        }
        let trace = integrate(model.closed_loop(), scenario)?;
        performance_index(&trace, index)
    };
    match cost() {
        Ok(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    }
}

fn initial_guess(params: &SystemParams, spec: &TuneSpec) -> [f64; 6] {
    let mut x = spec
        .initial
        .unwrap_or(ControllerGains::uniform(0.5))
        .to_array();
    if !params.include_solar {
        x[4] = 0.0;
        x[5] = 0.0;
    }
    for (v, b) in x.iter_mut().zip(&spec.bounds) {
        *v = b.clamp(*v);
    }
    x
}

/// Searches controller gains minimizing the performance index on `spec.scenario`.
pub fn tune_gains(params: &SystemParams, spec: &TuneSpec) -> Result<TuneResult> {
    spec.validate()?;
    params.validate()?;

    let mut active: Vec<usize> = (0..6).filter(|&i| spec.bounds[i].range() > 0.0).collect();
    if !params.include_solar {
        active.retain(|&i| i < 4);
    }
    let groups: Vec<Vec<usize>> = if spec.per_loop {
        [[0, 1], [2, 3], [4, 5]]
            .iter()
            .map(|g| g.iter().copied().filter(|i| active.contains(i)).collect())
            .filter(|g: &Vec<usize>| !g.is_empty())
            .collect()
    } else {
        vec![active]
    };

    let cost = |x: &[f64; 6]| {
        evaluate_gains(
            params,
            &ControllerGains::from_array(*x),
            &spec.scenario,
            spec.index,
        )
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x = initial_guess(params, spec);
    let mut f = cost(&x);
    let initial_eta = f;
    let mut evaluations = 1;

    'groups: for group in groups {
        let mut step: Vec<f64> = group
            .iter()
            .map(|&i| INITIAL_STEP_FRACTION * spec.bounds[i].range())
            .collect();
        loop {
            if evaluations >= spec.budget {
                break 'groups;
            }
            let converged = group
                .iter()
                .zip(&step)
                .all(|(&i, &s)| s <= MIN_STEP_FRACTION * spec.bounds[i].range());
            if converged {
                break;
            }

            let mut order: Vec<usize> = (0..group.len()).collect();
            order.shuffle(&mut rng);
            let mut candidates: Vec<[f64; 6]> = Vec::with_capacity(2 * group.len());
            for &slot in &order {
                let i = group[slot];
                for dir in [1.0, -1.0] {
                    let mut y = x;
                    y[i] = spec.bounds[i].clamp(x[i] + dir * step[slot]);
                    if y[i] != x[i] {
                        candidates.push(y);
                    }
                }
            }
            let remaining = spec.budget - evaluations;
            let truncated = candidates.len() > remaining;
            candidates.truncate(remaining);

            let costs: Vec<f64> = candidates.par_iter().map(cost).collect();
            evaluations += candidates.len();

            let mut best: Option<usize> = None;
            for (j, &c) in costs.iter().enumerate() {
                let bar = best.map_or(f, |b| costs[b]);
                if c < bar {
                    best = Some(j);
                }
            }
            match best {
                Some(j) => {
                    x = candidates[j];
                    f = costs[j];
                }
                None => step.iter_mut().for_each(|s| *s *= 0.5),
            }
            if truncated {
                break 'groups;
            }
        }
    }

    if !f.is_finite() {
        return Err(LfcError::NoStableGainsFound { evaluations });
    }
    Ok(TuneResult {
        gains: ControllerGains::from_array(x),
        eta: f,
        evaluations,
        initial_eta,
    })
}
