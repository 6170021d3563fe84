//! Fixed-step simulation of linear models under step inputs, equilibrium
//! solving, and the integral-squared-error performance index.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{LfcError, Result};
use crate::lti::{spectral_radius, StateSpaceModel};

/// `|lambda_max| dt` above which a warning is logged.
pub const STEP_WARN_LIMIT: f64 = 2.5;
/// `|lambda_max| dt` above which integration is refused (RK4 real-axis stability bound).
pub const STEP_HARD_LIMIT: f64 = 2.785;
/// Relative pivot magnitude under which a system matrix is treated as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

// Slack for float division when mapping times onto the sample grid.
const GRID_SLACK: f64 = 1e-9;

/// Step change of one input.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInput {
    /// Control or disturbance label of the simulated model.
    pub input: String,
    pub magnitude: f64,
    /// Onset time, s; rounded down to the sample grid.
    pub onset: f64,
}

impl StepInput {
    pub fn new(input: impl Into<String>, magnitude: f64, onset: f64) -> Self {
        StepInput {
            input: input.into(),
            magnitude,
            onset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub t_end: f64,
    pub dt: f64,
    pub steps: Vec<StepInput>,
    /// Initial state; zero when `None`.
    pub initial: Option<DVector<f64>>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            t_end: 60.0,
            dt: 1e-3,
            steps: Vec::new(),
            initial: None,
        }
    }
}

impl Scenario {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Scenario {
            t_end,
            dt,
            ..Default::default()
        }
    }

    pub fn with_step(mut self, input: &str, magnitude: f64, onset: f64) -> Self {
        self.steps.push(StepInput::new(input, magnitude, onset));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= self.t_end && self.t_end.is_finite()) {
            return Err(LfcError::InvalidScenario(format!(
                "require 0 < dt <= t_end (dt = {}, t_end = {})",
                self.dt, self.t_end
            )));
        }
        for s in &self.steps {
            if !(0.0..=self.t_end).contains(&s.onset) {
                return Err(LfcError::InvalidScenario(format!(
                    "onset of {} at {} outside [0, {}]",
                    s.input, s.onset, self.t_end
                )));
            }
            if !s.magnitude.is_finite() {
                return Err(LfcError::InvalidScenario(format!(
                    "non-finite magnitude for {}",
                    s.input
                )));
            }
        }
        Ok(())
    }

    /// Number of integration steps; the trace has one more row.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt + GRID_SLACK).floor() as usize
    }

    fn onset_index(&self, onset: f64) -> usize {
        (onset / self.dt + GRID_SLACK).floor() as usize
    }
}

/// Sampled trajectory: one row per time point, states then derived outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub state_labels: Vec<String>,
    pub output_labels: Vec<String>,
    pub states: DMatrix<f64>,
    pub outputs: DMatrix<f64>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Column of a state or derived output.
    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        if let Some(j) = self.state_labels.iter().position(|l| l == label) {
            return Some(self.states.column(j).iter().copied().collect());
        }
        self.output_labels
            .iter()
            .position(|l| l == label)
            .map(|j| self.outputs.column(j).iter().copied().collect())
    }

    pub fn final_state(&self) -> DVector<f64> {
        self.states.row(self.len() - 1).transpose()
    }

    pub fn final_value(&self, label: &str) -> Option<f64> {
        self.column(label).and_then(|c| c.last().copied())
    }
}

/// Concatenated input labels `[controls..., disturbances...]` of a model.
pub fn input_labels(model: &StateSpaceModel) -> Vec<String> {
    model
        .control_labels()
        .iter()
        .chain(model.disturbance_labels())
        .cloned()
        .collect()
}

/// Builds the stacked input vector `[u; p]` from labelled values.
pub fn input_vector(model: &StateSpaceModel, values: &[(&str, f64)]) -> Result<DVector<f64>> {
    let labels = input_labels(model);
    let mut w = DVector::zeros(labels.len());
    for (label, v) in values {
        let i = labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| LfcError::UnknownInput(label.to_string()))?;
        w[i] += v;
    }
    Ok(w)
}

fn stacked_input_matrix(model: &StateSpaceModel) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = model.n_states();
    let (m, k) = (model.n_controls(), model.n_disturbances());
    let mut e = DMatrix::zeros(n, m + k);
    e.columns_mut(0, m).copy_from(model.b());
    e.columns_mut(m, k).copy_from(model.g());
    let q = model.n_outputs();
    let mut d = DMatrix::zeros(q, m + k);
    d.columns_mut(0, m).copy_from(model.dc());
    d.columns_mut(m, k).copy_from(model.dg());
    (e, d)
}

/// Checks `|lambda_max| dt` against the RK4 stability bound.
pub fn check_step_size(a: &DMatrix<f64>, dt: f64) -> Result<f64> {
    let product = spectral_radius(a)? * dt;
    if product > STEP_HARD_LIMIT {
        return Err(LfcError::UnstableStepSize {
            product,
            limit: STEP_HARD_LIMIT,
        });
    }
    if product > STEP_WARN_LIMIT {
        warn!("|lambda_max| * dt = {product:.3} is close to the RK4 stability limit");
    }
    Ok(product)
}

/// Classical RK4 with inputs held constant over each step.
pub fn integrate(model: &StateSpaceModel, scenario: &Scenario) -> Result<SimulationTrace> {
    scenario.validate()?;
    let a = model.a();
    let n = model.n_states();
    check_step_size(a, scenario.dt)?;

    let labels = input_labels(model);
    let mut schedule: Vec<(usize, usize, f64)> = Vec::with_capacity(scenario.steps.len());
    for s in &scenario.steps {
        let i = labels
            .iter()
            .position(|l| *l == s.input)
            .ok_or_else(|| LfcError::UnknownInput(s.input.clone()))?;
        schedule.push((scenario.onset_index(s.onset), i, s.magnitude));
    }
    let input_at = |k: usize| {
        let mut w = DVector::zeros(labels.len());
        for &(start, i, mag) in &schedule {
            if k >= start {
                w[i] += mag;
            }
        }
        w
    };

    let (e, d) = stacked_input_matrix(model);
    let steps = scenario.n_steps();
    let h = scenario.dt;
    let mut x = match &scenario.initial {
        Some(x0) if x0.len() == n => x0.clone(),
        Some(x0) => {
            return Err(LfcError::DimensionMismatch(format!(
                "initial state has {} entries, model has {n} states",
                x0.len()
            )))
        }
        None => DVector::zeros(n),
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = DMatrix::zeros(steps + 1, n);
    let mut outputs = DMatrix::zeros(steps + 1, model.n_outputs());
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
    );

    let mut w = input_at(0);
    let mut forcing = &e * &w;
    for k in 0..=steps {
        let t = k as f64 * h;
        if k > 0 && schedule.iter().any(|&(start, _, _)| start == k) {
            w = input_at(k);
            forcing = &e * &w;
        }
        times.push(t);
        states.row_mut(k).copy_from(&x.transpose());
        if model.n_outputs() > 0 {
            let y = model.c() * &x + &d * &w;
            outputs.row_mut(k).copy_from(&y.transpose());
        }
        if k == steps {
            break;
        }

        k1.gemv(1.0, a, &x, 0.0);
        k1 += &forcing;
        tmp.copy_from(&x);
        tmp.axpy(0.5 * h, &k1, 1.0);
        k2.gemv(1.0, a, &tmp, 0.0);
        k2 += &forcing;
        tmp.copy_from(&x);
        tmp.axpy(0.5 * h, &k2, 1.0);
        k3.gemv(1.0, a, &tmp, 0.0);
        k3 += &forcing;
        tmp.copy_from(&x);
        tmp.axpy(h, &k3, 1.0);
        k4.gemv(1.0, a, &tmp, 0.0);
        k4 += &forcing;

        x.axpy(h / 6.0, &k1, 1.0);
        x.axpy(h / 3.0, &k2, 1.0);
        x.axpy(h / 3.0, &k3, 1.0);
        x.axpy(h / 6.0, &k4, 1.0);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LfcError::NonFiniteState { time: t + h });
        }
    }

    Ok(SimulationTrace {
        times,
        state_labels: model.state_labels().to_vec(),
        output_labels: model.output_labels().to_vec(),
        states,
        outputs,
    })
}

/// Solves `A x = rhs` by LU with partial pivoting, refusing near-singular `A`.
pub fn solve_linear(a: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let lu = a.clone().lu();
    let pivot = lu.u().diagonal().amin();
    if pivot <= PIVOT_TOLERANCE * scale {
        return Err(LfcError::SingularSystem { pivot });
    }
    lu.solve(rhs).ok_or(LfcError::SingularSystem { pivot })
}

/// Equilibrium under constant stacked inputs `[u; p]`: `A x = -(B u + G p)`.
pub fn steady_state(model: &StateSpaceModel, inputs: &DVector<f64>) -> Result<DVector<f64>> {
    let (e, _) = stacked_input_matrix(model);
    if inputs.len() != e.ncols() {
        return Err(LfcError::DimensionMismatch(format!(
            "{} inputs given, model has {}",
            inputs.len(),
            e.ncols()
        )));
    }
    solve_linear(model.a(), &-(e * inputs))
}

/// Derived outputs at an equilibrium.
pub fn steady_outputs(
    model: &StateSpaceModel,
    x: &DVector<f64>,
    inputs: &DVector<f64>,
) -> DVector<f64> {
    let (_, d) = stacked_input_matrix(model);
    model.c() * x + d * inputs
}

/// Which squared deviations enter the performance index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerformanceIndex {
    /// `integral dFs^2 dt`
    #[default]
    Frequency,
    /// `integral (dFs^2 + dFt^2) dt`
    FrequencyAndTurbine,
}

fn trapezoid(times: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    times
        .windows(2)
        .zip(v.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

/// Integral of squared deviation, trapezoidal rule over the trace samples.
pub fn performance_index(trace: &SimulationTrace, index: PerformanceIndex) -> Result<f64> {
    let col = |l: &str| {
        trace
            .column(l)
            .ok_or_else(|| LfcError::MissingFrequencyState(l.to_string()))
    };
    let fs = col("dFs")?;
    let eta = trapezoid(&trace.times, fs.iter().map(|v| v * v));
    Ok(match index {
        PerformanceIndex::Frequency => eta,
        PerformanceIndex::FrequencyAndTurbine => {
            let ft = col("dFt")?;
            eta + trapezoid(&trace.times, ft.iter().map(|v| v * v))
        }
    })
}

/// Integral squared error of `dFs`.
pub fn ise(trace: &SimulationTrace) -> Result<f64> {
    performance_index(trace, PerformanceIndex::Frequency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn decay() -> StateSpaceModel {
        StateSpaceModel::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::zeros(1, 0),
            DMatrix::from_element(1, 1, 1.0),
            &["dFs"],
            &[],
            &["p"],
        )
        .unwrap()
    }

    fn decay_from_one(dt: f64) -> f64 {
        let mut sc = Scenario::new(1.0, dt);
        sc.initial = Some(dvector![1.0]);
        integrate(&decay(), &sc)
            .unwrap()
            .final_value("dFs")
            .unwrap()
    }

    #[test]
    fn exponential_decay() {
        assert!((decay_from_one(0.1) - (-1f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = (-1f64).exp();
        let ratio = (decay_from_one(0.1) - exact).abs() / (decay_from_one(0.05) - exact).abs();
        assert!((14.0..=18.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn zero_input_zero_trace() {
        let tr = integrate(&decay(), &Scenario::new(2.0, 0.01)).unwrap();
        assert_eq!(tr.len(), 201);
        assert_eq!(tr.states.norm(), 0.0);
    }

    #[test]
    fn row_count_and_spacing() {
        let tr = integrate(&decay(), &Scenario::new(1.0, 0.3)).unwrap();
        assert_eq!(tr.len(), 4);
        let tr = integrate(&decay(), &Scenario::new(1.0, 0.001)).unwrap();
        assert_eq!(tr.len(), 1001);
        assert!((tr.times[1000] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_onset_on_grid() {
        let sc = Scenario::new(1.0, 0.1).with_step("p", 1.0, 0.35);
        let tr = integrate(&decay(), &sc).unwrap();
        let x = tr.column("dFs").unwrap();
        assert_eq!(x[3], 0.0);
        assert!(x[4] > 0.0 && x[4] < 0.1);
        assert_eq!(&x[..4], &[0.0; 4]);
    }

    #[test]
    fn unknown_input() {
        let sc = Scenario::new(1.0, 0.1).with_step("nope", 1.0, 0.0);
        assert_eq!(
            integrate(&decay(), &sc),
            Err(LfcError::UnknownInput("nope".into()))
        );
    }

    #[test]
    fn invalid_scenarios() {
        assert!(Scenario::new(1.0, 0.0).validate().is_err());
        assert!(Scenario::new(1.0, 2.0).validate().is_err());
        assert!(Scenario::new(1.0, 0.1)
            .with_step("p", 1.0, 1.5)
            .validate()
            .is_err());
    }

    #[test]
    fn step_size_limits() {
        let fast = StateSpaceModel::new(
            DMatrix::from_element(1, 1, -100.0),
            DMatrix::zeros(1, 0),
            DMatrix::zeros(1, 0),
            &["dFs"],
            &[],
            &[],
        )
        .unwrap();
        assert!(integrate(&fast, &Scenario::new(1.0, 0.026)).is_ok());
        assert!(matches!(
            integrate(&fast, &Scenario::new(1.0, 0.03)),
            Err(LfcError::UnstableStepSize { .. })
        ));
    }

    #[test]
    fn steady_state_and_singular() {
        let m = decay();
        let x = steady_state(&m, &dvector![2.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15);
        assert_eq!(steady_state(&m, &dvector![0.0]).unwrap()[0], 0.0);
        let singular = StateSpaceModel::new(
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, 0),
            DMatrix::from_element(1, 1, 1.0),
            &["x"],
            &[],
            &["p"],
        )
        .unwrap();
        assert!(matches!(
            steady_state(&singular, &dvector![1.0]),
            Err(LfcError::SingularSystem { .. })
        ));
    }

    #[test]
    fn ise_constants_and_exponential() {
        let mut sc = Scenario::new(3.0, 0.5);
        sc.initial = Some(dvector![0.0]);
        let mut tr = integrate(&decay(), &sc).unwrap();
        assert_eq!(ise(&tr).unwrap(), 0.0);
        tr.states.fill(0.2);
        assert!((ise(&tr).unwrap() - 0.04 * 3.0).abs() < 1e-15);

        // e^{-t} sampled at 1 ms over [0, 20]
        let times: Vec<f64> = (0..=20000).map(|k| k as f64 * 1e-3).collect();
        let vals = DMatrix::from_fn(times.len(), 1, |i, _| (-times[i]).exp());
        let tr = SimulationTrace {
            times,
            state_labels: vec!["dFs".into()],
            output_labels: vec![],
            states: vals,
            outputs: DMatrix::zeros(20001, 0),
        };
        assert!((ise(&tr).unwrap() - 0.5).abs() < 1e-4);
    }
}
