use std::collections::HashSet;

use nalgebra::{Complex, DMatrix, DVector};

use super::poly::TransferFunction;
use crate::error::{LfcError, Result};

/// Linear time-invariant model
///
/// ```text
/// dx/dt = A x + B u + G p
///     y = C x + Dc u + Dg p
/// ```
///
/// `u` are control inputs, `p` exogenous inputs (disturbances, or coupling
/// signals of a subsystem that are wired up during assembly). The output
/// equation is optional: a model without outputs has zero rows in `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    g: DMatrix<f64>,
    c: DMatrix<f64>,
    dc: DMatrix<f64>,
    dg: DMatrix<f64>,
    state_labels: Vec<String>,
    control_labels: Vec<String>,
    disturbance_labels: Vec<String>,
    output_labels: Vec<String>,
}

fn owned(labels: &[&str]) -> Vec<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

fn check_shape(name: &str, m: &DMatrix<f64>, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(LfcError::DimensionMismatch(format!(
            "{name} is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_unique(kind: &str, labels: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(LfcError::DimensionMismatch(format!(
                "duplicate {kind} label `{l}`"
            )));
        }
    }
    Ok(())
}

impl StateSpaceModel {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        g: DMatrix<f64>,
        state_labels: &[&str],
        control_labels: &[&str],
        disturbance_labels: &[&str],
    ) -> Result<Self> {
        Self::from_parts(
            a,
            b,
            g,
            owned(state_labels),
            owned(control_labels),
            owned(disturbance_labels),
        )
    }

    pub fn from_parts(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        g: DMatrix<f64>,
        state_labels: Vec<String>,
        control_labels: Vec<String>,
        disturbance_labels: Vec<String>,
    ) -> Result<Self> {
        let n = state_labels.len();
        let m = control_labels.len();
        let k = disturbance_labels.len();
        check_shape("A", &a, n, n)?;
        check_shape("B", &b, n, m)?;
        check_shape("G", &g, n, k)?;
        check_unique("state", &state_labels)?;
        check_unique("control", &control_labels)?;
        check_unique("disturbance", &disturbance_labels)?;
        Ok(StateSpaceModel {
            a,
            b,
            g,
            c: DMatrix::zeros(0, n),
            dc: DMatrix::zeros(0, m),
            dg: DMatrix::zeros(0, k),
            state_labels,
            control_labels,
            disturbance_labels,
            output_labels: Vec::new(),
        })
    }

    /// Attaches an output equation, replacing any previous one.
    pub fn with_outputs(
        mut self,
        c: DMatrix<f64>,
        dc: DMatrix<f64>,
        dg: DMatrix<f64>,
        output_labels: Vec<String>,
    ) -> Result<Self> {
        let q = output_labels.len();
        check_shape("C", &c, q, self.n_states())?;
        check_shape("Dc", &dc, q, self.n_controls())?;
        check_shape("Dg", &dg, q, self.n_disturbances())?;
        check_unique("output", &output_labels)?;
        self.c = c;
        self.dc = dc;
        self.dg = dg;
        self.output_labels = output_labels;
        Ok(self)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn dc(&self) -> &DMatrix<f64> {
        &self.dc
    }
    pub fn dg(&self) -> &DMatrix<f64> {
        &self.dg
    }

    pub fn n_states(&self) -> usize {
        self.state_labels.len()
    }
    pub fn n_controls(&self) -> usize {
        self.control_labels.len()
    }
    pub fn n_disturbances(&self) -> usize {
        self.disturbance_labels.len()
    }
    pub fn n_outputs(&self) -> usize {
        self.output_labels.len()
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }
    pub fn control_labels(&self) -> &[String] {
        &self.control_labels
    }
    pub fn disturbance_labels(&self) -> &[String] {
        &self.disturbance_labels
    }
    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.state_labels.iter().position(|l| l == label)
    }
    pub fn control_index(&self, label: &str) -> Option<usize> {
        self.control_labels.iter().position(|l| l == label)
    }
    pub fn disturbance_index(&self, label: &str) -> Option<usize> {
        self.disturbance_labels.iter().position(|l| l == label)
    }
    pub fn output_index(&self, label: &str) -> Option<usize> {
        self.output_labels.iter().position(|l| l == label)
    }

    /// Time derivative for given state and inputs.
    pub fn derivative(&self, x: &DVector<f64>, u: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b * u + &self.g * p
    }

    pub fn outputs(&self, x: &DVector<f64>, u: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
        &self.c * x + &self.dc * u + &self.dg * p
    }

    /// Transfer matrix entry from control `input` to output `output`, evaluated at `s`.
    ///
    /// Dense complex solve of `(sI - A) z = B[:, input]`; intended for
    /// verification of small models, not for frequency sweeps of large ones.
    pub fn frequency_response(&self, input: usize, output: usize, s: Complex<f64>) -> Complex<f64> {
        let n = self.n_states();
        let si_a = DMatrix::<Complex<f64>>::from_fn(n, n, |i, j| {
            let diag = if i == j { s } else { Complex::new(0.0, 0.0) };
            diag - Complex::new(self.a[(i, j)], 0.0)
        });
        let rhs = DVector::<Complex<f64>>::from_fn(n, |i, _| Complex::new(self.b[(i, input)], 0.0));
        let z = si_a.lu().solve(&rhs).expect("s is a pole of the model");
        let mut y = Complex::new(self.dc[(output, input)], 0.0);
        for i in 0..n {
            y += z[i] * self.c[(output, i)];
        }
        y
    }
}

/// Single-input single-output realization of a transfer function.
#[derive(Debug, Clone, PartialEq)]
pub struct SisoRealization {
    /// States `x1..xn`, control `u`, output `y`; the output row carries the
    /// strictly proper part only.
    pub model: StateSpaceModel,
    /// Direct feedthrough `y = ... + d u`.
    pub feedthrough: f64,
}

/// Realizes a proper transfer function in companion (controllable canonical) form.
///
/// For `b(s)/a(s)` with `a` normalized monic of degree `n`, the state matrix is
/// the companion matrix of `a` (ones on the superdiagonal, `-a_0..-a_{n-1}` on
/// the last row). The numerator enters through the input vector `beta`, built
/// from the recursion
///
/// ```text
/// beta_0 = b_n
/// beta_k = b_{n-k} - sum_{j=1..k} a_{n-j} beta_{k-j}
/// ```
///
/// so that the output is the first state, `y = x1 + beta_0 u`. For a first
/// order lag `K/(1+sT)` this yields `dx/dt = -x/T + (K/T) u`, `y = x`, i.e.
/// the state is the physical block output.
pub fn tf_to_ss(tf: &TransferFunction) -> Result<SisoRealization> {
    let den = tf.den();
    let n = match den.degree() {
        Some(0) | None => {
            return Err(LfcError::InvalidPolynomial(
                "denominator degree must be at least 1",
            ))
        }
        Some(n) => n,
    };
    let lead = den.leading();
    // a_k and b_k of the monic-normalized ratio, ascending powers.
    let a: Vec<f64> = (0..=n).map(|k| den.coeff(k) / lead).collect();
    let b: Vec<f64> = (0..=n).map(|k| tf.num().coeff(k) / lead).collect();

    let mut beta = vec![0.0; n + 1];
    beta[0] = b[n];
    for k in 1..=n {
        let mut v = b[n - k];
        for j in 1..=k {
            v -= a[n - j] * beta[k - j];
        }
        beta[k] = v;
    }

    let mut am = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        am[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        am[(n - 1, j)] = -a[j];
    }
    let bm = DMatrix::from_fn(n, 1, |i, _| beta[i + 1]);
    let mut cm = DMatrix::zeros(1, n);
    cm[(0, 0)] = 1.0;

    let labels: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let model = StateSpaceModel::from_parts(
        am,
        bm,
        DMatrix::zeros(n, 0),
        labels,
        vec!["u".into()],
        Vec::new(),
    )?
    .with_outputs(
        cm,
        DMatrix::zeros(1, 1),
        DMatrix::zeros(1, 0),
        vec!["y".into()],
    )?;
    Ok(SisoRealization {
        model,
        feedthrough: beta[0],
    })
}
