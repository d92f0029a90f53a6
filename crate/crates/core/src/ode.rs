//! Fixed-step explicit integrators for autonomous systems `dx/dt = f(x)`.

/// Stepping rule used by [`crate::graddyn::integrate`] and the reduced-ODE
/// checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Plain gradient descent when applied to a gradient field.
    #[default]
    Euler,
    Rk4,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Euler => "euler",
            Integrator::Rk4 => "rk4",
        }
    }
}

impl std::str::FromStr for Integrator {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "euler" => Ok(Integrator::Euler),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown integrator '{other}' (expected euler or rk4)"
            ))),
        }
    }
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(x, k)| x + h * k).collect()
}

pub fn euler_step<F>(x: &[f64], h: f64, mut f: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    axpy(x, h, &f(x))
}

pub fn rk4_step<F>(x: &[f64], h: f64, mut f: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let k1 = f(x);
    let k2 = f(&axpy(x, 0.5 * h, &k1));
    let k3 = f(&axpy(x, 0.5 * h, &k2));
    let k4 = f(&axpy(x, h, &k3));
    x.iter()
        .enumerate()
        .map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

pub fn step<F>(method: Integrator, x: &[f64], h: f64, f: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    match method {
        Integrator::Euler => euler_step(x, h, f),
        Integrator::Rk4 => rk4_step(x, h, f),
    }
}

/// Integrates a scalar ODE until `x` first crosses `target`, returning the
/// crossing time (linearly interpolated inside the final step).
///
/// Gives up with `None` after `max_steps` steps or on a non-finite state.
pub fn time_to_reach<F>(x0: f64, target: f64, h: f64, max_steps: usize, mut f: F) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    if x0 == target {
        return Some(0.0);
    }
    let up = target > x0;
    let mut x = x0;
    for n in 0..max_steps {
        let next = rk4_step(&[x], h, |s| vec![f(s[0])])[0];
        if !next.is_finite() {
            return None;
        }
        let crossed = if up { next >= target } else { next <= target };
        if crossed {
            let frac = (target - x) / (next - x);
            return Some((n as f64 + frac) * h);
        }
        x = next;
    }
    None
}
