//! Closed-form learning trajectories and the reduced ODEs they solve.
//!
//! Balanced product `Lambda = C B` with `A` fixed (G-weighted statistics):
//!
//! ```text
//! tau dLambda/dt = 2 Lambda (sigma - Lambda eta)
//! Lambda(t) = (sigma/eta) e^{2 sigma t/tau} / (e^{2 sigma t/tau} - 1 + (sigma/eta)/Lambda_0)
//! ```
//!
//! and its N-dimensional counterpart with exponent `2 N sigma t / tau` and
//! `-N` in the denominator. With `A` and `B = 1` fixed and only `C` learned
//! at a single frequency bin (plain statistics):
//!
//! ```text
//! tau dc/dt = N/(1-a) (sigma - N c eta/(1-a))
//! tau da/dt = N c/(1-a)^2 (sigma - N c eta/(1-a))
//! ```

use crate::error::{domain, invalid, Result};
use crate::suffstats::{SufficientStats, Weighting};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedScalarSetup {
    pub sigma: f64,
    pub eta: f64,
    pub tau: f64,
    pub lambda0: f64,
    pub n: usize,
}

impl ReducedScalarSetup {
    pub fn new(sigma: f64, eta: f64, tau: f64, lambda0: f64, n: usize) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(invalid(format!("eta must be positive, got {eta}")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(invalid(format!("tau must be positive, got {tau}")));
        }
        if !sigma.is_finite() || !lambda0.is_finite() {
            return Err(invalid("sigma and lambda0 must be finite"));
        }
        if n == 0 {
            return Err(invalid("latent size must be >= 1"));
        }
        Ok(Self {
            sigma,
            eta,
            tau,
            lambda0,
            n,
        })
    }

    /// Requires G-weighted statistics.
    pub fn from_stats(stats: &SufficientStats, tau: f64, lambda0: f64, n: usize) -> Result<Self> {
        if !matches!(stats.weighting, Weighting::GWeighted { .. }) {
            return Err(invalid(
                "balanced-product closed forms need G-weighted statistics",
            ));
        }
        Self::new(stats.sigma_real()?, stats.eta_real()?, tau, lambda0, n)
    }

    /// `sigma / eta`.
    pub fn limit(&self) -> f64 {
        self.sigma / self.eta
    }

    fn check_growth_regime(&self) -> Result<()> {
        if self.sigma <= 0.0 {
            return Err(domain(format!(
                "sigma = {} <= 0: the closed form only covers the growth regime sigma > 0",
                self.sigma
            )));
        }
        if self.lambda0 == 0.0 {
            return Err(domain(
                "lambda0 = 0 is a stationary point; the closed form is undefined there",
            ));
        }
        Ok(())
    }
}

/// `K / (1 + e^{-x} (K/Lambda_0 - offset))`, the overflow-free form of
/// `K e^x / (e^x - offset + K/Lambda_0)`.
fn logistic_form(s: &ReducedScalarSetup, x: f64, offset: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(format!("time must be >= 0, got {t}")));
    }
    s.check_growth_regime()?;
    let k = s.limit();
    let denom = 1.0 + (-x).exp() * (k / s.lambda0 - offset);
    if !(denom > 0.0) {
        return Err(domain(format!(
            "denominator {denom} <= 0 at t = {t}: lambda0 = {} with limit {k} and offset {offset} \
             lies outside the regime where the trajectory stays finite",
            s.lambda0
        )));
    }
    Ok(k / denom)
}

/// Balanced scalar product `Lambda(t)`.
pub fn lambda_scalar(t: f64, s: &ReducedScalarSetup) -> Result<f64> {
    let x = 2.0 * s.sigma * t / s.tau;
    logistic_form(s, x, 1.0, t)
}

/// N-dimensional symmetric product as printed: exponent `2 N sigma t / tau`,
/// offset `N`. Only for `N = 1` does `Lambda(0)` equal `lambda0`.
pub fn lambda_ndim(t: f64, s: &ReducedScalarSetup) -> Result<f64> {
    let n = s.n as f64;
    let x = 2.0 * n * s.sigma * t / s.tau;
    logistic_form(s, x, n, t)
}

/// Decay rate `2 N sigma / tau` of [`lambda_ndim`] toward its limit.
pub fn ndim_rate(s: &ReducedScalarSetup) -> f64 {
    2.0 * s.n as f64 * s.sigma / s.tau
}

/// `tau / (2 sigma)`.
pub fn time_constant_scalar(s: &ReducedScalarSetup) -> Result<f64> {
    if s.sigma <= 0.0 {
        return Err(domain(format!(
            "time constant needs sigma > 0, got {}",
            s.sigma
        )));
    }
    Ok(s.tau / (2.0 * s.sigma))
}

/// Fixed `A = a I`, `B = 1`, learning `C = c 1` at one frequency bin.
///
/// `c0` is the initial `c`; when used with [`time_to_a`] it is the fixed `c`
/// and `a` is the initial `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedAbSetup {
    pub a: f64,
    pub b_fixed: f64,
    pub c0: f64,
    pub sigma: f64,
    pub eta: f64,
    pub tau: f64,
    pub n: usize,
}

impl FixedAbSetup {
    pub fn new(a: f64, c0: f64, sigma: f64, eta: f64, tau: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && a.abs() < 1.0) {
            return Err(invalid(format!("|a| must be below 1, got {a}")));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(invalid(format!("eta must be positive, got {eta}")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(invalid(format!("tau must be positive, got {tau}")));
        }
        if !sigma.is_finite() || !c0.is_finite() {
            return Err(invalid("sigma and c0 must be finite"));
        }
        if n == 0 {
            return Err(invalid("latent size must be >= 1"));
        }
        Ok(Self {
            a,
            b_fixed: 1.0,
            c0,
            sigma,
            eta,
            tau,
            n,
        })
    }

    /// Requires plain statistics.
    pub fn from_stats(
        stats: &SufficientStats,
        a: f64,
        c0: f64,
        tau: f64,
        n: usize,
    ) -> Result<Self> {
        if stats.weighting != Weighting::Plain {
            return Err(invalid("fixed-A,B closed forms need plain statistics"));
        }
        Self::new(a, c0, stats.sigma_real()?, stats.eta_real()?, tau, n)
    }

    /// Stationary `c` of the `dc/dt` ODE, `(1 - a) sigma / (N eta)`.
    pub fn c_fixed_point(&self) -> f64 {
        (1.0 - self.a) * self.sigma / (self.n as f64 * self.eta)
    }

    /// Stationary `a` of the `da/dt` ODE for fixed `c = c0`, `1 - N c eta / sigma`.
    pub fn a_fixed_point(&self) -> f64 {
        1.0 - self.n as f64 * self.c0 * self.eta / self.sigma
    }

    /// Decay rate `N^2 eta / (tau (1 - a)^2)` of `c(t)`.
    pub fn c_rate(&self) -> f64 {
        let n = self.n as f64;
        n * n * self.eta / (self.tau * (1.0 - self.a).powi(2))
    }
}

pub fn c_of_t(t: f64, s: &FixedAbSetup) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(format!("time must be >= 0, got {t}")));
    }
    let n = s.n as f64;
    let offset = (s.a - 1.0) * s.sigma;
    Ok(((-t * s.c_rate()).exp() * (offset + n * s.c0 * s.eta) - offset) / (n * s.eta))
}

/// Time at which `c(t)` reaches `c_f`.
pub fn time_to_c(c_f: f64, s: &FixedAbSetup) -> Result<f64> {
    let n = s.n as f64;
    let offset = (s.a - 1.0) * s.sigma;
    let ratio = (offset + n * c_f * s.eta) / (offset + n * s.c0 * s.eta);
    if !(ratio > 0.0 && ratio <= 1.0) || !ratio.is_finite() {
        let fixed = s.c_fixed_point();
        let (lo, hi) = if s.c0 <= fixed {
            (s.c0, fixed)
        } else {
            (fixed, s.c0)
        };
        return Err(domain(format!(
            "target c = {c_f} is not reachable from c0 = {}; admissible targets lie in [{lo}, {hi})",
            s.c0
        )));
    }
    Ok(-s.tau * (1.0 - s.a).powi(2) / (n * n * s.eta) * ratio.ln())
}

/// Time for `a` to travel from `s.a` to `a_f` with `c = s.c0` fixed.
pub fn time_to_a(a_f: f64, s: &FixedAbSetup) -> Result<f64> {
    if !(a_f.is_finite() && a_f.abs() < 1.0) {
        return Err(domain(format!("|a_f| must be below 1, got {a_f}")));
    }
    if s.sigma == 0.0 || s.c0 == 0.0 {
        return Err(domain("a does not move when sigma = 0 or c = 0"));
    }
    let (a0, c, sigma, eta) = (s.a, s.c0, s.sigma, s.eta);
    let n = s.n as f64;
    let nce = n * c * eta;
    let num = (a0 - 1.0) * sigma + nce;
    let den = (a_f - 1.0) * sigma + nce;
    let fixed = s.a_fixed_point();
    let toward = (a_f - a0) * (fixed - a0) > 0.0;
    let before = (fixed - a_f) * (fixed - a0) > 0.0;
    if a_f != a0 && !(toward && before) {
        return Err(domain(format!(
            "a_f = {a_f} is not on the monotone path from a0 = {a0} toward the stationary point {fixed}"
        )));
    }
    let ratio = num / den;
    if !(ratio > 0.0) {
        return Err(domain(format!("log argument {ratio} is not positive")));
    }
    let cubic = |x: f64| {
        let d = x - 1.0;
        d * (-3.0 * d * nce * sigma + 2.0 * d * d * sigma * sigma + 6.0 * nce * nce)
    };
    let bracket = 6.0 * nce.powi(3) * ratio.ln() + sigma * (cubic(a_f) - cubic(a0));
    Ok(s.tau / (6.0 * n * c * sigma.powi(4)) * bracket)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedOde {
    /// `tau dB/dt = (sigma - C B eta) C`, state `[b, c]`.
    ScalarB,
    /// `tau dC/dt = (sigma - C B eta) B`, state `[b, c]`.
    ScalarC,
    /// Fixed `a, B = 1`: `tau dc/dt`, state `[c]`.
    FixedAbC,
    /// Fixed `c, B = 1`: `tau da/dt`, state `[a]`.
    FixedCbA,
    /// `tau dLambda/dt = 2 Lambda (sigma - Lambda eta)`, state `[Lambda]`.
    Lambda,
}

impl std::str::FromStr for ReducedOde {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "scalar_b" => ReducedOde::ScalarB,
            "scalar_c" => ReducedOde::ScalarC,
            "fixed_ab_c" => ReducedOde::FixedAbC,
            "fixed_cb_a" => ReducedOde::FixedCbA,
            "lambda" => ReducedOde::Lambda,
            other => return Err(invalid(format!("unknown reduced ODE '{other}'"))),
        })
    }
}

/// Coefficients shared by the reduced ODEs. `a` is read by `FixedAbC`, `c` by
/// `FixedCbA`, `n` by both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCoefficients {
    pub sigma: f64,
    pub eta: f64,
    pub n: usize,
    pub a: f64,
    pub c: f64,
}

impl From<&ReducedScalarSetup> for ReducedCoefficients {
    fn from(s: &ReducedScalarSetup) -> Self {
        Self {
            sigma: s.sigma,
            eta: s.eta,
            n: s.n,
            a: 0.0,
            c: 0.0,
        }
    }
}

impl From<&FixedAbSetup> for ReducedCoefficients {
    fn from(s: &FixedAbSetup) -> Self {
        Self {
            sigma: s.sigma,
            eta: s.eta,
            n: s.n,
            a: s.a,
            c: s.c0,
        }
    }
}

/// Right-hand side of the selected reduced ODE, before the `1/tau` factor.
pub fn reduced_ode_rhs(kind: ReducedOde, state: &[f64], p: &ReducedCoefficients) -> Result<f64> {
    let want = match kind {
        ReducedOde::ScalarB | ReducedOde::ScalarC => 2,
        _ => 1,
    };
    if state.len() != want {
        return Err(invalid(format!(
            "{kind:?} expects a state of length {want}, got {}",
            state.len()
        )));
    }
    let n = p.n as f64;
    Ok(match kind {
        ReducedOde::ScalarB => {
            let (b, c) = (state[0], state[1]);
            (p.sigma - c * b * p.eta) * c
        }
        ReducedOde::ScalarC => {
            let (b, c) = (state[0], state[1]);
            (p.sigma - c * b * p.eta) * b
        }
        ReducedOde::FixedAbC => {
            let c = state[0];
            let g = 1.0 / (1.0 - p.a);
            n * g * (p.sigma - n * c * g * p.eta)
        }
        ReducedOde::FixedCbA => {
            let a = state[0];
            let g = 1.0 / (1.0 - a);
            n * p.c * g * g * (p.sigma - n * p.c * g * p.eta)
        }
        ReducedOde::Lambda => {
            let l = state[0];
            2.0 * l * (p.sigma - l * p.eta)
        }
    })
}

/// First time at which `values[i] / limit >= alpha`, linearly interpolated
/// between samples. `None` if never reached.
pub fn time_to_fraction(times: &[f64], values: &[f64], limit: f64, alpha: f64) -> Option<f64> {
    let frac: Vec<f64> = values.iter().map(|v| v / limit).collect();
    if frac.first()? >= &alpha {
        return Some(times[0]);
    }
    frac.windows(2).enumerate().find_map(|(i, w)| {
        (w[1] >= alpha).then(|| times[i] + (alpha - w[0]) / (w[1] - w[0]) * (times[i + 1] - times[i]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn unit(lambda0: f64, n: usize) -> ReducedScalarSetup {
        ReducedScalarSetup::new(1.0, 1.0, 1.0, lambda0, n).unwrap()
    }

    #[test]
    fn lambda_scalar_examples() {
        let s = unit(0.1, 1);
        assert_relative_eq!(lambda_scalar(0.0, &s).unwrap(), 0.1, max_relative = 1e-15);
        let fixed = unit(1.0, 1);
        for t in [0.0, 0.5, 3.0, 100.0] {
            assert_relative_eq!(lambda_scalar(t, &fixed).unwrap(), 1.0, max_relative = 1e-15);
        }
        // e^2 / (e^2 + 9), evaluated at 30 digits
        assert_abs_diff_eq!(lambda_scalar(1.0, &s).unwrap(), 0.450_853_060_379_283_8, epsilon = 1e-14);
    }

    #[test]
    fn lambda_scalar_large_time_does_not_overflow() {
        let s = unit(0.1, 1);
        assert_eq!(lambda_scalar(1e6, &s).unwrap(), 1.0);
    }

    #[test]
    fn lambda_domain_errors() {
        let s = ReducedScalarSetup::new(-1.0, 1.0, 1.0, 0.1, 1).unwrap();
        assert!(matches!(lambda_scalar(1.0, &s), Err(crate::Error::Domain(_))));
        assert!(matches!(lambda_scalar(1.0, &unit(0.0, 1)), Err(crate::Error::Domain(_))));
        assert!(matches!(time_constant_scalar(&s), Err(crate::Error::Domain(_))));
        // offset N exceeds K/lambda0 + 1: denominator negative at t = 0.
        assert!(matches!(lambda_ndim(0.0, &unit(0.5, 8)), Err(crate::Error::Domain(_))));
        assert!(ReducedScalarSetup::new(1.0, 0.0, 1.0, 0.1, 1).is_err());
        assert!(ReducedScalarSetup::new(1.0, 1.0, -1.0, 0.1, 1).is_err());
    }

    #[test]
    fn lambda_ndim_matches_direct_expression() {
        let s = unit(0.1, 4);
        for i in 0..=40 {
            let t = i as f64 * 0.05;
            let e = (8.0 * t).exp();
            let direct = e / (e - 4.0 + 10.0);
            assert_relative_eq!(lambda_ndim(t, &s).unwrap(), direct, max_relative = 1e-13);
        }
        assert_relative_eq!(lambda_ndim(1e3, &s).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn time_constant_examples() {
        assert_eq!(time_constant_scalar(&unit(0.1, 1)).unwrap(), 0.5);
        let s = ReducedScalarSetup::new(4.0, 1.0, 2.0, 0.1, 1).unwrap();
        assert_eq!(time_constant_scalar(&s).unwrap(), 0.25);
        let s2 = ReducedScalarSetup::new(8.0, 1.0, 2.0, 0.1, 1).unwrap();
        assert_eq!(
            time_constant_scalar(&s2).unwrap(),
            0.5 * time_constant_scalar(&s).unwrap()
        );
    }

    #[test]
    fn c_of_t_examples() {
        let s = FixedAbSetup::new(0.0, 0.0, 1.0, 1.0, 1.0, 1).unwrap();
        assert_eq!(c_of_t(0.0, &s).unwrap(), 0.0);
        assert_abs_diff_eq!(c_of_t(1.0, &s).unwrap(), 0.632_120_558_828_557_7, epsilon = 1e-14);
        let s = FixedAbSetup::new(0.4, -0.3, 2.0, 0.5, 1.5, 3).unwrap();
        assert_eq!(c_of_t(0.0, &s).unwrap(), -0.3);
        assert_relative_eq!(c_of_t(1e4, &s).unwrap(), 0.6 * 2.0 / 1.5, max_relative = 1e-12);
    }

    #[test]
    fn time_to_c_examples() {
        let s = FixedAbSetup::new(0.3, 0.1, 1.2, 0.8, 1.0, 2).unwrap();
        assert_eq!(time_to_c(0.1, &s).unwrap(), 0.0);
        let target = 0.4;
        let t = time_to_c(target, &s).unwrap();
        assert_relative_eq!(c_of_t(t, &s).unwrap(), target, max_relative = 1e-12);
        assert!(matches!(time_to_c(5.0, &s), Err(crate::Error::Domain(_))));
        assert!(time_to_c(-1.0, &s).is_err());
    }

    #[test]
    fn time_to_a_examples() {
        let s = FixedAbSetup::new(0.0, 0.5, 1.0, 1.0, 1.0, 1).unwrap();
        assert_eq!(time_to_a(0.0, &s).unwrap(), 0.0);
        assert!(time_to_a(0.3, &s).unwrap() > 0.0);
        // Past the stationary point 0.5, and the wrong direction.
        assert!(time_to_a(0.6, &s).is_err());
        assert!(time_to_a(-0.2, &s).is_err());
        // Starting at the stationary point nothing moves.
        let stuck = FixedAbSetup::new(0.0, 1.0, 1.0, 1.0, 1.0, 1).unwrap();
        assert!(time_to_a(0.3, &stuck).is_err());
    }

    #[test]
    fn reduced_rhs_fixed_points() {
        let p = ReducedCoefficients {
            sigma: 1.5,
            eta: 0.5,
            n: 3,
            a: 0.25,
            c: 0.2,
        };
        assert_eq!(reduced_ode_rhs(ReducedOde::Lambda, &[3.0], &p).unwrap(), 0.0);
        assert_eq!(reduced_ode_rhs(ReducedOde::ScalarB, &[1.5, 2.0], &p).unwrap(), 0.0);
        assert_eq!(reduced_ode_rhs(ReducedOde::ScalarC, &[2.0, 1.5], &p).unwrap(), 0.0);
        let c_star = (1.0 - 0.25) * 1.5 / (3.0 * 0.5);
        assert_abs_diff_eq!(
            reduced_ode_rhs(ReducedOde::FixedAbC, &[c_star], &p).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert!(reduced_ode_rhs(ReducedOde::Lambda, &[1.0, 2.0], &p).is_err());
        assert!("eq7".parse::<ReducedOde>().is_err());
        assert_eq!("fixed_cb_a".parse::<ReducedOde>().unwrap(), ReducedOde::FixedCbA);
    }

    #[test]
    fn fraction_crossing() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let v = [0.0, 0.5, 1.0, 1.0];
        assert_eq!(time_to_fraction(&t, &v, 1.0, 0.75), Some(1.5));
        assert_eq!(time_to_fraction(&t, &v, 2.0, 0.75), None);
        assert_eq!(time_to_fraction(&t, &v, 1.0, 0.0), Some(0.0));
    }
}
