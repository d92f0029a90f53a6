//! Input/output covariance summaries in the frequency domain.
//!
//! Two aggregate conventions coexist and callers always pick one:
//!
//! * [`Weighting::Plain`]: `sigma = sum_k Y_k conj(U_k)`, `eta = sum_k |U_k|^2`.
//!   Used by the fixed-`A,B` closed forms for learning `C`.
//! * [`Weighting::GWeighted`]: `sigma = sum_k Y_k conj(G_k) conj(U_k)`,
//!   `eta = sum_k |U_k|^2 |G_k|^2` with `G_k = g(a, k, L)`. Used by the
//!   balanced scalar and symmetric N-dimensional closed forms.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::spectrum::ComplexSequence;
use crate::ssm::{g_factor, g_unchecked};

/// Relative tolerance on the imaginary part of an aggregate before it is
/// accepted as a real scalar.
pub const REAL_PART_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    Plain,
    GWeighted { a: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub sigma: Complex64,
    pub eta: Complex64,
    /// `Y_k conj(U_k)`.
    pub sigma_k: ComplexSequence,
    /// `|U_k|^2`, stored as complex with zero imaginary part.
    pub eta_k: ComplexSequence,
    pub weighting: Weighting,
}

fn check_lengths(u: &ComplexSequence, y: &ComplexSequence) -> Result<()> {
    if u.len() != y.len() {
        return Err(invalid(format!(
            "input and output spectra differ in length: {} vs {}",
            u.len(),
            y.len()
        )));
    }
    Ok(())
}

fn per_bin(u: &ComplexSequence, y: &ComplexSequence) -> (ComplexSequence, ComplexSequence) {
    let sigma_k = u.iter().zip(y).map(|(u, y)| y * u.conj()).collect();
    let eta_k = u.iter().map(|u| Complex64::new(u.norm_sqr(), 0.0)).collect();
    (
        ComplexSequence::new(sigma_k).expect("finite products"),
        ComplexSequence::new(eta_k).expect("finite products"),
    )
}

/// Per-bin statistics, with Plain aggregates.
pub fn per_bin_stats(u: &ComplexSequence, y: &ComplexSequence) -> Result<SufficientStats> {
    aggregate(u, y, Weighting::Plain)
}

pub fn aggregate(
    u: &ComplexSequence,
    y: &ComplexSequence,
    weighting: Weighting,
) -> Result<SufficientStats> {
    check_lengths(u, y)?;
    let (sigma_k, eta_k) = per_bin(u, y);
    let (sigma, eta) = match weighting {
        Weighting::Plain => (sigma_k.iter().sum(), eta_k.iter().sum()),
        Weighting::GWeighted { a } => {
            g_factor(a, 0, 1)?;
            let len = u.len();
            let mut sigma = Complex64::new(0.0, 0.0);
            let mut eta = 0.0;
            for (k, (s, e)) in sigma_k.iter().zip(&eta_k).enumerate() {
                let g = g_unchecked(a, k, len);
                sigma += s * g.conj();
                eta += e.re * g.norm_sqr();
            }
            (sigma, Complex64::new(eta, 0.0))
        }
    };
    Ok(SufficientStats {
        sigma,
        eta,
        sigma_k,
        eta_k,
        weighting,
    })
}

/// Real part of `z`, refusing values whose imaginary part is not negligible.
pub fn real_part_checked(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > REAL_PART_TOLERANCE * z.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(format!(
            "{what} has non-negligible imaginary part {} (real part {})",
            z.im, z.re
        )));
    }
    Ok(z.re)
}

impl SufficientStats {
    pub fn len(&self) -> usize {
        self.sigma_k.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sigma_real(&self) -> Result<f64> {
        real_part_checked(self.sigma, "sigma")
    }

    pub fn eta_real(&self) -> Result<f64> {
        real_part_checked(self.eta, "eta")
    }

    /// `sigma / eta`, the limiting value of the balanced product dynamics.
    pub fn fixed_point(&self) -> Result<f64> {
        let eta = self.eta_real()?;
        if eta <= 0.0 {
            return Err(Error::Domain("eta must be positive".into()));
        }
        Ok(self.sigma_real()? / eta)
    }
}
