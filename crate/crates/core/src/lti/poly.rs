use nalgebra::Complex;

use crate::error::{LfcError, Result};

/// Real polynomial in the Laplace variable, coefficients in ascending powers of `s`.
///
/// Trailing (highest-order) zeros are trimmed on construction, so the zero
/// polynomial has an empty coefficient list.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `s^k`; zero beyond the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn eval_complex(&self, s: Complex<f64>) -> Complex<f64> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::new(Vec::new());
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// Rational function `num(s) / den(s)`, always proper.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    num: Polynomial,
    den: Polynomial,
}

impl TransferFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        let den_deg = den
            .degree()
            .ok_or(LfcError::InvalidPolynomial("zero denominator"))?;
        if let Some(num_deg) = num.degree() {
            if num_deg > den_deg {
                return Err(LfcError::ImproperTransferFunction {
                    num: num_deg,
                    den: den_deg,
                });
            }
        }
        if !num
            .coeffs()
            .iter()
            .chain(den.coeffs())
            .all(|c| c.is_finite())
        {
            return Err(LfcError::InvalidPolynomial("non-finite coefficient"));
        }
        Ok(TransferFunction { num, den })
    }

    /// Convenience constructor from ascending coefficient slices.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        TransferFunction::new(Polynomial::new(num), Polynomial::new(den))
    }

    /// `gain / (1 + s*tau)`.
    pub fn first_order_lag(gain: f64, tau: f64) -> Result<Self> {
        TransferFunction::from_coeffs(&[gain], &[1.0, tau])
    }

    /// `kp + ki/s`.
    pub fn pi_controller(kp: f64, ki: f64) -> Result<Self> {
        TransferFunction::from_coeffs(&[ki, kp], &[0.0, 1.0])
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn eval(&self, s: Complex<f64>) -> Complex<f64> {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    /// Series connection.
    pub fn series(&self, other: &TransferFunction) -> Result<TransferFunction> {
        TransferFunction::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }
}

/// Steady-state gain `num(0)/den(0)`.
pub fn tf_dc_gain(tf: &TransferFunction) -> Result<f64> {
    let den0 = tf.den().coeff(0);
    if den0 == 0.0 {
        return Err(LfcError::ZeroDcDenominator);
    }
    Ok(tf.num().coeff(0) / den0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_high_order_zeros() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        assert!(Polynomial::new(vec![0.0]).is_zero());
        assert_eq!(Polynomial::new(vec![0.0]).degree(), None);
    }

    #[test]
    fn horner_eval() {
        let p = Polynomial::new(vec![50.0, 100.0, 1.0]);
        assert_eq!(p.eval(2.0), 50.0 + 200.0 + 4.0);
        let z = p.eval_complex(Complex::new(0.0, 1.0));
        assert_eq!(z, Complex::new(49.0, 100.0));
    }

    #[test]
    fn dc_gain_of_unit_lag() {
        let tf = TransferFunction::first_order_lag(1.0, 4.0).unwrap();
        assert_eq!(tf_dc_gain(&tf).unwrap(), 1.0);
    }

    #[test]
    fn dc_gain_of_boost_block() {
        let tf = TransferFunction::from_coeffs(&[900.0, -18.0], &[50.0, 100.0, 1.0]).unwrap();
        assert_eq!(tf_dc_gain(&tf).unwrap(), 18.0);
    }

    #[test]
    fn dc_gain_rejects_integrator() {
        let tf = TransferFunction::pi_controller(2.0, 3.0).unwrap();
        assert_eq!(tf_dc_gain(&tf), Err(LfcError::ZeroDcDenominator));
    }

    #[test]
    fn rejects_zero_denominator_and_improper() {
        assert!(matches!(
            TransferFunction::from_coeffs(&[1.0], &[0.0]),
            Err(LfcError::InvalidPolynomial(_))
        ));
        assert_eq!(
            TransferFunction::from_coeffs(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]),
            Err(LfcError::ImproperTransferFunction { num: 3, den: 2 })
        );
    }

    #[test]
    fn series_multiplies() {
        let a = TransferFunction::first_order_lag(2.0, 1.0).unwrap();
        let b = TransferFunction::first_order_lag(3.0, 2.0).unwrap();
        let ab = a.series(&b).unwrap();
        assert_eq!(ab.num().coeffs(), &[6.0]);
        assert_eq!(ab.den().coeffs(), &[1.0, 3.0, 2.0]);
    }
}
