//! Diagonal single-input single-output linear SSMs.
//!
//! A layer evolves as `x_t = A x_{t-1} + B u_t`, `y_t = C x_t` with
//! `A = diag(a)`. In the frequency domain the layer acts bin by bin through
//! `H_k = sum_i c_i g_{ki} b_i`, `g_{ki} = (1 - e^{-j 2 pi k / L} a_i)^{-1}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::spectrum::ComplexSequence;

/// `e^{-j 2 pi k / L}`.
pub fn bin_phase(k: usize, len: usize) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64)
}

pub(crate) fn g_unchecked(a: f64, k: usize, len: usize) -> Complex64 {
    (Complex64::new(1.0, 0.0) - bin_phase(k, len) * a).inv()
}

/// Diagonal entry of `G_k = (I - e^{-j 2 pi k / L} A)^{-1}` for one latent
/// dimension with transition coefficient `a`.
pub fn g_factor(a: f64, k: usize, len: usize) -> Result<Complex64> {
    check_stable(0, a)?;
    if len == 0 || k >= len {
        return Err(invalid(format!("bin {k} out of range for length {len}")));
    }
    Ok(g_unchecked(a, k, len))
}

fn check_stable(index: usize, a: f64) -> Result<()> {
    if a.is_finite() && a.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Unstable { index, value: a })
    }
}

/// Anything with a per-bin complex gain.
pub trait FrequencyResponse {
    /// Gain at bin `k` of an `len`-point transform. `k` is taken modulo `len`.
    fn response(&self, k: usize, len: usize) -> Complex64;

    /// `Y_hat_k = H_k U_k` for every bin of `spectrum`.
    fn simulate_freq(&self, spectrum: &ComplexSequence) -> ComplexSequence {
        let len = spectrum.len();
        let out = spectrum
            .iter()
            .enumerate()
            .map(|(k, u)| self.response(k, len) * u)
            .collect();
        ComplexSequence::new(out).expect("finite gain times finite input")
    }

    fn response_curve(&self, len: usize) -> Vec<Complex64> {
        (0..len).map(|k| self.response(k, len)).collect()
    }
}

/// One stable diagonal layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSsm {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl DiagonalSsm {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(invalid("latent size must be >= 1"));
        }
        if b.len() != a.len() || c.len() != a.len() {
            return Err(invalid(format!(
                "parameter lengths differ: a={}, b={}, c={}",
                a.len(),
                b.len(),
                c.len()
            )));
        }
        for (i, &ai) in a.iter().enumerate() {
            check_stable(i, ai)?;
        }
        if b.iter().chain(&c).any(|v| !v.is_finite()) {
            return Err(invalid("b and c must be finite"));
        }
        Ok(Self { a, b, c })
    }

    pub fn scalar(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(vec![a], vec![b], vec![c])
    }

    /// `A = a I`, `B = b 1`, `C = c 1`.
    pub fn symmetric(n: usize, a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(vec![a; n], vec![b; n], vec![c; n])
    }

    pub fn latent_size(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn spectral_radius(&self) -> f64 {
        self.a.iter().fold(0.0, |m, a| f64::max(m, a.abs()))
    }

    /// `sum_i c_i b_i`, the zero-memory part of the gain.
    pub fn gain_product(&self) -> f64 {
        self.c.iter().zip(&self.b).map(|(c, b)| c * b).sum()
    }

    pub fn frequency_response(&self, k: usize, len: usize) -> Complex64 {
        self.a
            .iter()
            .zip(&self.b)
            .zip(&self.c)
            .map(|((&a, &b), &c)| g_unchecked(a, k, len) * (b * c))
            .sum()
    }

    /// Impulse response `h_m = sum_i c_i a_i^m b_i` for `m < len`.
    pub fn impulse_response(&self, len: usize) -> Vec<f64> {
        let mut pow: Vec<f64> = vec![1.0; self.latent_size()];
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(
                pow.iter()
                    .zip(&self.b)
                    .zip(&self.c)
                    .map(|((p, b), c)| c * p * b)
                    .sum(),
            );
            pow.iter_mut().zip(&self.a).for_each(|(p, a)| *p *= a);
        }
        out
    }

    /// Runs the recurrence from `x_0 = 0`; output length equals input length.
    pub fn simulate_time(&self, u: &ComplexSequence) -> ComplexSequence {
        let mut state = vec![Complex64::new(0.0, 0.0); self.latent_size()];
        let out = u
            .iter()
            .map(|&ut| {
                let mut yt = Complex64::new(0.0, 0.0);
                for (i, x) in state.iter_mut().enumerate() {
                    *x = *x * self.a[i] + ut * self.b[i];
                    yt += *x * self.c[i];
                }
                yt
            })
            .collect();
        ComplexSequence::new(out).expect("stable recurrence of finite input is finite")
    }
}

impl FrequencyResponse for DiagonalSsm {
    fn response(&self, k: usize, len: usize) -> Complex64 {
        self.frequency_response(k, len)
    }
}

/// Layers composed in series; the overall gain is the product of the
/// per-layer gains.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedSsm {
    layers: Vec<DiagonalSsm>,
}

impl StackedSsm {
    pub fn new(layers: Vec<DiagonalSsm>) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("a stacked model needs at least one layer"));
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[DiagonalSsm] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn composite_response(&self, k: usize, len: usize) -> Complex64 {
        self.layers
            .iter()
            .map(|l| l.frequency_response(k, len))
            .product()
    }

    /// Product over layers of `sum_i c_i b_i`.
    pub fn gain_product(&self) -> f64 {
        self.layers.iter().map(DiagonalSsm::gain_product).product()
    }

    pub fn simulate_time(&self, u: &ComplexSequence) -> ComplexSequence {
        self.layers
            .iter()
            .fold(u.clone(), |signal, layer| layer.simulate_time(&signal))
    }
}

impl From<DiagonalSsm> for StackedSsm {
    fn from(layer: DiagonalSsm) -> Self {
        Self {
            layers: vec![layer],
        }
    }
}

impl FrequencyResponse for StackedSsm {
    fn response(&self, k: usize, len: usize) -> Complex64 {
        self.composite_response(k, len)
    }
}
