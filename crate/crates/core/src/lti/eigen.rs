use std::cmp::Ordering;

use nalgebra::{Complex, DMatrix, Schur};

use crate::error::{LfcError, Result};

/// Iteration cap per matrix dimension for the Schur (shifted QR) iteration.
pub const ITERATIONS_PER_DIM: usize = 100;

/// Eigenvalues of a real square matrix, with multiplicity, sorted by real
/// part descending (imaginary part descending on ties).
///
/// Computed from the real Schur form (Hessenberg reduction followed by
/// shifted QR sweeps), capped at `100 * n` iterations.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if !m.is_square() {
        return Err(LfcError::NonSquareMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(LfcError::InvalidParameter(
            "matrix has non-finite entries".into(),
        ));
    }
    let cap = ITERATIONS_PER_DIM * n;
    let schur = Schur::try_new(m.clone(), f64::EPSILON, cap)
        .ok_or(LfcError::ConvergenceFailure { iterations: cap })?;
    let mut ev: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
    });
    Ok(ev)
}

/// Largest real part; `-inf` for an empty matrix.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Largest eigenvalue magnitude.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|l| l.norm()).fold(0.0, f64::max))
}
