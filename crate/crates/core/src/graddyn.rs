//! Explicit gradients of the frequency-domain squared loss and gradient-flow
//! integration.
//!
//! For a real parameter `theta` of a stacked model with overall gain
//! `H_k = prod_l H_k^(l)`,
//!
//! ```text
//! -dL/dtheta = 2 Re sum_k (sigma_k - H_k eta_k) conj(dH_k/dtheta)
//! ```
//!
//! with `sigma_k = Y_k conj(U_k)` and `eta_k = |U_k|^2`. [`grad`] and
//! [`grad_stacked`] return exactly this. The flow integrated by
//! [`integrate`] is `tau dtheta/dt = Re sum_k (...)`, i.e. half of it, which
//! is the convention under which the reduced dynamics `tau dC/dt =
//! (sigma - CB eta) B` and their closed forms hold.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::ode::{self, Integrator};
use crate::spectrum::{loss_freq, ComplexSequence};
use crate::ssm::{bin_phase, g_unchecked, DiagonalSsm, FrequencyResponse, StackedSsm};
use crate::suffstats::per_bin_stats;

/// Loss above which a run is declared diverged.
pub const DIVERGENCE_LOSS: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamKind {
    A,
    B,
    C,
}

impl ParamKind {
    pub const ALL: [ParamKind; 3] = [ParamKind::A, ParamKind::B, ParamKind::C];

    pub fn name(self) -> &'static str {
        match self {
            ParamKind::A => "a",
            ParamKind::B => "b",
            ParamKind::C => "c",
        }
    }
}

/// `dH_k / d(which)_i` for one layer.
///
/// `dH/da_i = c_i b_i e^{-j w} g_{ki}^2`, `dH/db_i = c_i g_{ki}`,
/// `dH/dc_i = g_{ki} b_i`, with `w = 2 pi k / L`.
pub fn partial_h(
    model: &DiagonalSsm,
    which: ParamKind,
    i: usize,
    k: usize,
    len: usize,
) -> Result<Complex64> {
    let n = model.latent_size();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, size: n });
    }
    if len == 0 || k >= len {
        return Err(invalid(format!("bin {k} out of range for length {len}")));
    }
    Ok(partial_unchecked(model, which, i, k, len))
}

fn partial_unchecked(
    model: &DiagonalSsm,
    which: ParamKind,
    i: usize,
    k: usize,
    len: usize,
) -> Complex64 {
    let g = g_unchecked(model.a()[i], k, len);
    match which {
        ParamKind::A => bin_phase(k, len) * g * g * (model.c()[i] * model.b()[i]),
        ParamKind::B => g * model.c()[i],
        ParamKind::C => g * model.b()[i],
    }
}

/// Which parameters of one layer are learned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerMask {
    pub learn_a: bool,
    pub learn_b: bool,
    pub learn_c: bool,
}

impl LayerMask {
    pub const ALL: LayerMask = LayerMask::new(true, true, true);
    /// `A` frozen, `B` and `C` learned.
    pub const BC: LayerMask = LayerMask::new(false, true, true);
    pub const C_ONLY: LayerMask = LayerMask::new(false, false, true);
    pub const A_ONLY: LayerMask = LayerMask::new(true, false, false);
    pub const NONE: LayerMask = LayerMask::new(false, false, false);

    pub const fn new(learn_a: bool, learn_b: bool, learn_c: bool) -> Self {
        Self {
            learn_a,
            learn_b,
            learn_c,
        }
    }

    pub fn learns(&self, which: ParamKind) -> bool {
        match which {
            ParamKind::A => self.learn_a,
            ParamKind::B => self.learn_b,
            ParamKind::C => self.learn_c,
        }
    }

    fn any(&self) -> bool {
        self.learn_a || self.learn_b || self.learn_c
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreezeMask {
    layers: Vec<LayerMask>,
}

impl FreezeMask {
    /// At least one parameter must be learned somewhere.
    pub fn new(layers: Vec<LayerMask>) -> Result<Self> {
        if !layers.iter().any(LayerMask::any) {
            return Err(invalid("freeze mask leaves nothing to learn"));
        }
        Ok(Self { layers })
    }

    pub fn uniform(depth: usize, mask: LayerMask) -> Result<Self> {
        Self::new(vec![mask; depth])
    }

    pub fn layers(&self) -> &[LayerMask] {
        &self.layers
    }

    fn check_depth(&self, depth: usize) -> Result<()> {
        if self.layers.len() != depth {
            return Err(invalid(format!(
                "freeze mask has {} layers, model has {depth}",
                self.layers.len()
            )));
        }
        Ok(())
    }
}

/// Per-layer real parameter vector (a gradient, a flow direction, or a
/// difference of models). Frozen entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl LayerGradient {
    fn zeros(n: usize) -> Self {
        Self {
            a: vec![0.0; n],
            b: vec![0.0; n],
            c: vec![0.0; n],
        }
    }

    pub fn get(&self, which: ParamKind) -> &[f64] {
        match which {
            ParamKind::A => &self.a,
            ParamKind::B => &self.b,
            ParamKind::C => &self.c,
        }
    }

    fn get_mut(&mut self, which: ParamKind) -> &mut Vec<f64> {
        match which {
            ParamKind::A => &mut self.a,
            ParamKind::B => &mut self.b,
            ParamKind::C => &mut self.c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<LayerGradient>,
}

impl Gradient {
    /// Layer by layer, `a` then `b` then `c` (the [`flatten_params`] order).
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.a.iter().chain(&l.b).chain(&l.c).copied())
            .collect()
    }
}

/// Complex sums `sum_k (sigma_k - H_k eta_k) conj(dH_k/dtheta)` before the
/// real part is taken, per layer and parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSums {
    pub layers: Vec<[Vec<Complex64>; 3]>,
}

impl ComplexSums {
    /// Largest `|Im| / max(|Re|, floor)` across all learned entries.
    pub fn max_relative_imag(&self, floor: f64) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.iter().flatten())
            .map(|z| z.im.abs() / z.re.abs().max(floor))
            .fold(0.0, f64::max)
    }
}

fn check_data(u: &ComplexSequence, y: &ComplexSequence) -> Result<()> {
    if u.len() != y.len() {
        return Err(invalid(format!(
            "input and target spectra differ in length: {} vs {}",
            u.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Pre-real-part gradient sums for a stacked model.
pub fn gradient_sums(
    model: &StackedSsm,
    u: &ComplexSequence,
    y: &ComplexSequence,
    mask: &FreezeMask,
) -> Result<ComplexSums> {
    check_data(u, y)?;
    mask.check_depth(model.depth())?;
    let stats = per_bin_stats(u, y)?;
    let len = u.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut sums: Vec<[Vec<Complex64>; 3]> = model
        .layers()
        .iter()
        .map(|l| {
            let n = l.latent_size();
            [vec![zero; n], vec![zero; n], vec![zero; n]]
        })
        .collect();
    let mut gains = vec![zero; model.depth()];
    for k in 0..len {
        for (g, layer) in gains.iter_mut().zip(model.layers()) {
            *g = layer.frequency_response(k, len);
        }
        let total: Complex64 = gains.iter().product();
        let residual = stats.sigma_k[k] - total * stats.eta_k[k];
        for (m, (layer, lmask)) in model.layers().iter().zip(mask.layers()).enumerate() {
            let cofactor: Complex64 = gains
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != m)
                .map(|(_, g)| g.conj())
                .product();
            let weight = residual * cofactor;
            for (slot, which) in ParamKind::ALL.into_iter().enumerate() {
                if !lmask.learns(which) {
                    continue;
                }
                for (i, acc) in sums[m][slot].iter_mut().enumerate() {
                    *acc += weight * partial_unchecked(layer, which, i, k, len).conj();
                }
            }
        }
    }
    Ok(ComplexSums { layers: sums })
}

fn real_gradient(sums: &ComplexSums, factor: f64) -> Gradient {
    Gradient {
        layers: sums
            .layers
            .iter()
            .map(|[a, b, c]| LayerGradient {
                a: a.iter().map(|z| factor * z.re).collect(),
                b: b.iter().map(|z| factor * z.re).collect(),
                c: c.iter().map(|z| factor * z.re).collect(),
            })
            .collect(),
    }
}

/// `-dL/dtheta` for a single layer; frozen entries are zero.
pub fn grad(
    model: &DiagonalSsm,
    u: &ComplexSequence,
    y: &ComplexSequence,
    mask: &FreezeMask,
) -> Result<Gradient> {
    grad_stacked(&StackedSsm::from(model.clone()), u, y, mask)
}

/// `-dL/dtheta` for every layer of a stacked model.
pub fn grad_stacked(
    model: &StackedSsm,
    u: &ComplexSequence,
    y: &ComplexSequence,
    mask: &FreezeMask,
) -> Result<Gradient> {
    Ok(real_gradient(&gradient_sums(model, u, y, mask)?, 2.0))
}

/// Right-hand side of `tau dtheta/dt`, equal to half of [`grad_stacked`].
pub fn flow_rhs(
    model: &StackedSsm,
    u: &ComplexSequence,
    y: &ComplexSequence,
    mask: &FreezeMask,
) -> Result<Gradient> {
    Ok(real_gradient(&gradient_sums(model, u, y, mask)?, 1.0))
}

/// `sum_k |Y_k - H_k U_k|^2`.
pub fn model_loss<M: FrequencyResponse>(
    model: &M,
    u: &ComplexSequence,
    y: &ComplexSequence,
) -> Result<f64> {
    check_data(u, y)?;
    loss_freq(y, &model.simulate_freq(u))
}

/// Parameters of every layer, layer by layer, `a` then `b` then `c`.
pub fn flatten_params(model: &StackedSsm) -> Vec<f64> {
    model
        .layers()
        .iter()
        .flat_map(|l| l.a().iter().chain(l.b()).chain(l.c()).copied())
        .collect()
}

/// Inverse of [`flatten_params`] given each layer's latent size.
pub fn unflatten_params(sizes: &[usize], flat: &[f64]) -> Result<StackedSsm> {
    let expected: usize = sizes.iter().map(|n| 3 * n).sum();
    if flat.len() != expected {
        return Err(invalid(format!(
            "expected {expected} parameters, got {}",
            flat.len()
        )));
    }
    let mut offset = 0;
    let mut layers = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let chunk = &flat[offset..offset + 3 * n];
        layers.push(DiagonalSsm::new(
            chunk[..n].to_vec(),
            chunk[n..2 * n].to_vec(),
            chunk[2 * n..].to_vec(),
        )?);
        offset += 3 * n;
    }
    StackedSsm::new(layers)
}

pub fn layer_sizes(model: &StackedSsm) -> Vec<usize> {
    model.layers().iter().map(DiagonalSsm::latent_size).collect()
}

/// `-dL/dtheta` by central differences of [`model_loss`] with step `h`.
pub fn finite_diff_grad(
    model: &StackedSsm,
    u: &ComplexSequence,
    y: &ComplexSequence,
    mask: &FreezeMask,
    h: f64,
) -> Result<Gradient> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("finite-difference step must be positive, got {h}")));
    }
    check_data(u, y)?;
    mask.check_depth(model.depth())?;
    let sizes = layer_sizes(model);
    let base = flatten_params(model);
    let mut out = Gradient {
        layers: sizes.iter().map(|&n| LayerGradient::zeros(n)).collect(),
    };
    let mut offset = 0;
    for (m, &n) in sizes.iter().enumerate() {
        for (slot, which) in ParamKind::ALL.into_iter().enumerate() {
            if !mask.layers()[m].learns(which) {
                continue;
            }
            for i in 0..n {
                let idx = offset + slot * n + i;
                let mut plus = base.clone();
                plus[idx] += h;
                let mut minus = base.clone();
                minus[idx] -= h;
                let lp = model_loss(&unflatten_params(&sizes, &plus)?, u, y)?;
                let lm = model_loss(&unflatten_params(&sizes, &minus)?, u, y)?;
                out.layers[m].get_mut(which)[i] = -(lp - lm) / (2.0 * h);
            }
        }
        offset += 3 * n;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSchedule {
    /// Time constant `tau > 0`.
    pub tau: f64,
    /// Integration step in the same time units as `tau`.
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    pub integrator: Integrator,
}

impl TrainSchedule {
    pub fn euler(tau: f64, dt: f64, steps: usize, record_every: usize) -> Self {
        Self {
            tau,
            dt,
            steps,
            record_every,
            integrator: Integrator::Euler,
        }
    }

    /// Step count covering `[0, t_end]` at the given `dt`.
    pub fn covering(tau: f64, dt: f64, t_end: f64, record_every: usize) -> Self {
        Self::euler(tau, dt, (t_end / dt).round() as usize, record_every)
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub step: usize,
    pub t: f64,
    pub params: Vec<f64>,
    pub loss_freq: f64,
    /// Product over layers of `sum_i c_i b_i`.
    pub lambda: f64,
    pub response: Option<ComplexSequence>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Diverged { step: usize, reason: String },
}

impl RunStatus {
    pub fn is_diverged(&self) -> bool {
        matches!(self, RunStatus::Diverged { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub layer_sizes: Vec<usize>,
    pub records: Vec<Record>,
    pub status: RunStatus,
}

impl Trajectory {
    pub fn last(&self) -> &Record {
        self.records.last().expect("trajectory always holds the initial record")
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.lambda).collect()
    }

    /// Values of one parameter over the records.
    pub fn param_series(&self, layer: usize, which: ParamKind, i: usize) -> Vec<f64> {
        let offset: usize = self.layer_sizes[..layer].iter().map(|n| 3 * n).sum();
        let n = self.layer_sizes[layer];
        let slot = ParamKind::ALL.iter().position(|&w| w == which).unwrap();
        let idx = offset + slot * n + i;
        self.records.iter().map(|r| r.params[idx]).collect()
    }

    pub fn model_at(&self, record: usize) -> Result<StackedSsm> {
        unflatten_params(&self.layer_sizes, &self.records[record].params)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecordOptions {
    /// Store the composite frequency response with every record.
    pub response: bool,
}

fn make_record(
    step: usize,
    t: f64,
    model: &StackedSsm,
    u: &ComplexSequence,
    y: &ComplexSequence,
    opts: RecordOptions,
) -> Result<Record> {
    let len = u.len();
    Ok(Record {
        step,
        t,
        params: flatten_params(model),
        loss_freq: model_loss(model, u, y)?,
        lambda: model.gain_product(),
        response: if opts.response {
            Some(ComplexSequence::new(model.response_curve(len))?)
        } else {
            None
        },
    })
}

/// Integrates `tau dtheta/dt = flow_rhs(theta)` with a fixed step.
///
/// Records step 0, every `record_every`-th step, and the final step. Stops
/// early with [`RunStatus::Diverged`] when the loss exceeds
/// [`DIVERGENCE_LOSS`], a parameter becomes non-finite, or some `|a_i|`
/// reaches 1; the offending state is not recorded.
pub fn integrate(
    model: &StackedSsm,
    u: &ComplexSequence,
    y: &ComplexSequence,
    mask: &FreezeMask,
    schedule: &TrainSchedule,
    opts: RecordOptions,
) -> Result<Trajectory> {
    schedule.validate()?;
    check_data(u, y)?;
    mask.check_depth(model.depth())?;
    let sizes = layer_sizes(model);
    let h = schedule.dt / schedule.tau;
    let mut current = model.clone();
    let mut theta = flatten_params(model);
    let mut records = vec![make_record(0, 0.0, model, u, y, opts)?];
    let mut status = RunStatus::Completed;

    let rhs = |params: &[f64]| -> Vec<f64> {
        match unflatten_params(&sizes, params).and_then(|m| flow_rhs(&m, u, y, mask)) {
            Ok(g) => g.flatten(),
            Err(_) => vec![f64::NAN; params.len()],
        }
    };

    for step in 1..=schedule.steps {
        let next = ode::step(schedule.integrator, &theta, h, rhs);
        let reason = if next.iter().any(|v| !v.is_finite()) {
            Some("non-finite parameters".to_string())
        } else {
            match unflatten_params(&sizes, &next) {
                Err(Error::Unstable { index, value }) => {
                    Some(format!("|a[{index}]| = {} reached the stability boundary", value.abs()))
                }
                Err(e) => return Err(e),
                Ok(m) => {
                    let loss = model_loss(&m, u, y)?;
                    if !(loss <= DIVERGENCE_LOSS) {
                        Some(format!("loss {loss:e} exceeded {DIVERGENCE_LOSS:e}"))
                    } else {
                        current = m;
                        None
                    }
                }
            }
        };
        if let Some(reason) = reason {
            status = RunStatus::Diverged { step, reason };
            break;
        }
        theta = next;
        if step % schedule.record_every == 0 || step == schedule.steps {
            records.push(make_record(
                step,
                step as f64 * schedule.dt,
                &current,
                u,
                y,
                opts,
            )?);
        }
    }

    Ok(Trajectory {
        layer_sizes: sizes,
        records,
        status,
    })
}
