//! Discrete Fourier transform and the squared-error losses in the time and
//! frequency domains.
//!
//! Indexing is zero-based (`t, k = 0..L-1`). The forward transform is
//! unnormalized and the inverse carries the `1/L` factor, so that
//! `loss_freq(dft(y), dft(y_hat)) == L * loss_time(y, y_hat)`.

use std::ops::Index;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};

/// A non-empty sequence of finite complex values.
///
/// Used for time-domain signals and for spectra alike. Real signals are
/// stored with zero imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence(Vec<Complex64>);

impl ComplexSequence {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("sequence must have length >= 1"));
        }
        if let Some(pos) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid(format!("non-finite value at index {pos}")));
        }
        Ok(Self(values))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|v| v * factor).collect())
    }

    /// Largest `|x_k - conj(x_{L-k})|`; zero for spectra of real signals.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|k| (self.0[k] - self.0[(n - k) % n].conj()).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexSequence {
    type Output = Complex64;

    fn index(&self, idx: usize) -> &Complex64 {
        &self.0[idx]
    }
}

impl<'a> IntoIterator for &'a ComplexSequence {
    type Item = &'a Complex64;
    type IntoIter = std::slice::Iter<'a, Complex64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// `X_k = sum_t x_t exp(-j 2 pi k t / L)`.
pub fn dft(x: &ComplexSequence) -> ComplexSequence {
    let mut buf = x.0.clone();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    ComplexSequence(buf)
}

/// Inverse of [`dft`], including the `1/L` normalization.
pub fn idft(x: &ComplexSequence) -> ComplexSequence {
    let mut buf = x.0.clone();
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    ComplexSequence(buf)
}

fn squared_error(lhs: &ComplexSequence, rhs: &ComplexSequence) -> Result<f64> {
    if lhs.len() != rhs.len() {
        return Err(invalid(format!(
            "length mismatch: {} vs {}",
            lhs.len(),
            rhs.len()
        )));
    }
    Ok(lhs.iter().zip(rhs).map(|(a, b)| (a - b).norm_sqr()).sum())
}

/// Time-domain squared error `sum_t |y_t - y_hat_t|^2`.
pub fn loss_time(y: &ComplexSequence, y_hat: &ComplexSequence) -> Result<f64> {
    squared_error(y, y_hat)
}

/// Frequency-domain squared error `sum_k |Y_hat_k - Y_k|^2`.
pub fn loss_freq(y: &ComplexSequence, y_hat: &ComplexSequence) -> Result<f64> {
    squared_error(y_hat, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(values: &[f64]) -> ComplexSequence {
        ComplexSequence::from_real(values).unwrap()
    }

    fn assert_close(lhs: &ComplexSequence, rhs: &ComplexSequence, tol: f64) {
        assert_eq!(lhs.len(), rhs.len());
        for (a, b) in lhs.iter().zip(rhs) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = tol);
            assert_abs_diff_eq!(a.im, b.im, epsilon = tol);
        }
    }

    #[test]
    fn empty_and_non_finite_rejected() {
        assert!(matches!(
            ComplexSequence::new(vec![]),
            Err(crate::Error::InvalidArgument(_))
        ));
        assert!(ComplexSequence::new(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexSequence::new(vec![c(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn impulse_and_constant() {
        assert_close(&dft(&real(&[1.0, 0.0, 0.0, 0.0])), &real(&[1.0; 4]), 1e-15);
        assert_close(&dft(&real(&[1.0; 4])), &real(&[4.0, 0.0, 0.0, 0.0]), 1e-15);
    }

    #[test]
    fn inverse_examples() {
        assert_close(&idft(&real(&[4.0, 0.0, 0.0, 0.0])), &real(&[1.0; 4]), 1e-15);
        assert_close(&idft(&real(&[0.0; 4])), &real(&[0.0; 4]), 0.0);
    }

    #[test]
    fn length_one_is_identity() {
        let x = ComplexSequence::new(vec![c(0.3, -2.0)]).unwrap();
        assert_close(&dft(&x), &x, 1e-15);
        assert_close(&idft(&x), &x, 1e-15);
    }

    #[test]
    fn loss_examples() {
        let y = real(&[1.0, 0.0]);
        assert_eq!(loss_time(&y, &y).unwrap(), 0.0);
        assert_eq!(loss_time(&y, &real(&[0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(loss_freq(&real(&[2.0, 0.0]), &real(&[0.0, 0.0])).unwrap(), 4.0);
        assert!(loss_time(&y, &real(&[1.0])).is_err());
        assert!(loss_freq(&y, &real(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn real_signal_spectrum_is_conjugate_symmetric() {
        let x = real(&[0.5, -1.0, 2.0, 0.25, 3.0]);
        assert!(dft(&x).conjugate_symmetry_defect() < 1e-14);
    }
}
