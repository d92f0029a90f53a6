//! Browser demo. Three operations, each a plain function plus a thin
//! `wasm_bindgen` wrapper:
//!
//! * `learning_curve`: gradient flow of a scalar SSM next to the closed form.
//! * `latent_sweep`: normalized curves for symmetric inits over latent sizes.
//! * `frequency_response`: magnitude and phase of a diagonal SSM.

use ssm_dynamics::analytic::{lambda_ndim, lambda_scalar, ReducedScalarSetup};
use ssm_dynamics::graddyn::{integrate, FreezeMask, LayerMask, RecordOptions, TrainSchedule};
use ssm_dynamics::spectrum::dft;
use ssm_dynamics::suffstats::{aggregate, Weighting};
use ssm_dynamics::{ComplexSequence, DiagonalSsm, FrequencyResponse, Result};
use wasm_bindgen::prelude::*;

const LEN: usize = 16;
const POINTS: usize = 200;

/// Fixed multi-tone input, rescaled so the G-weighted `eta` at `a` is 1,
/// and the output of a scalar teacher `(a, 1, gain)`.
pub fn teacher_data(a: f64, gain: f64) -> Result<(ComplexSequence, ComplexSequence)> {
    let w = std::f64::consts::TAU / LEN as f64;
    let u: Vec<f64> = (0..LEN)
        .map(|t| {
            let t = t as f64;
            1.0 + (w * t).cos() + 0.5 * (3.0 * w * t + 0.3).sin() - 0.25 * (5.0 * w * t).cos()
        })
        .collect();
    let u = dft(&ComplexSequence::from_real(&u)?);
    let eta = aggregate(&u, &u, Weighting::GWeighted { a })?.eta.re;
    let u = u.scale(eta.sqrt().recip());
    let y = DiagonalSsm::scalar(a, 1.0, gain)?.simulate_freq(&u);
    Ok((u, y))
}

fn schedule(tau: f64, t_end: f64) -> TrainSchedule {
    let dt = tau * 1e-3;
    let steps = (t_end / dt).ceil() as usize;
    TrainSchedule::euler(tau, dt, steps, (steps / POINTS).max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    pub t: Vec<f64>,
    pub flow: Vec<f64>,
    pub closed: Vec<f64>,
}

/// Balanced init `b = c = init`, `a` frozen, teacher gain `gain`.
pub fn learning_curve(a: f64, init: f64, gain: f64, tau: f64) -> Result<Curves> {
    let (u, y) = teacher_data(a, gain)?;
    let stats = aggregate(&u, &y, Weighting::GWeighted { a })?;
    let lambda0 = init * init;
    let setup = ReducedScalarSetup::new(stats.sigma_real()?, stats.eta_real()?, tau, lambda0, 1)?;
    // Sixteen time constants, or a fixed window when there is no growth.
    let t_end = if setup.sigma > 0.0 { 8.0 * tau / setup.sigma } else { 8.0 * tau };
    let model = DiagonalSsm::scalar(a, init, init)?;
    let traj = integrate(
        &model.into(),
        &u,
        &y,
        &FreezeMask::uniform(1, LayerMask::BC)?,
        &schedule(tau, t_end),
        RecordOptions::default(),
    )?;
    let t = traj.times();
    let closed = t
        .iter()
        .map(|&t| lambda_scalar(t, &setup).unwrap_or(f64::NAN))
        .collect();
    Ok(Curves {
        flow: traj.lambdas(),
        t,
        closed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub t: Vec<f64>,
    pub n_values: Vec<usize>,
    /// Row-major, one row per latent size, each normalized by its limit.
    pub flow: Vec<f64>,
    pub closed: Vec<f64>,
}

/// Symmetric init `b = c = init` for `N = 1, 2, 4, ... <= n_max`, unit
/// teacher gain.
pub fn latent_sweep(a: f64, init: f64, n_max: usize, tau: f64) -> Result<Sweep> {
    let (u, y) = teacher_data(a, 1.0)?;
    let stats = aggregate(&u, &y, Weighting::GWeighted { a })?;
    let (sigma, eta) = (stats.sigma_real()?, stats.eta_real()?);
    let n_values: Vec<usize> = std::iter::successors(Some(1usize), |n| Some(n * 2))
        .take_while(|&n| n <= n_max.max(1))
        .collect();
    let sched = schedule(tau, 4.0 * tau / sigma);
    let mut t = Vec::new();
    let mut flow = Vec::new();
    let mut closed = Vec::new();
    for &n in &n_values {
        let model = DiagonalSsm::symmetric(n, a, init, init)?;
        let traj = integrate(
            &model.into(),
            &u,
            &y,
            &FreezeMask::uniform(1, LayerMask::BC)?,
            &sched,
            RecordOptions::default(),
        )?;
        t = traj.times();
        flow.extend(traj.lambdas().iter().map(|l| l * eta / sigma));
        let setup = ReducedScalarSetup::new(sigma, eta, tau, init * init, n)?;
        closed.extend(
            t.iter()
                .map(|&t| lambda_ndim(t, &setup).map_or(f64::NAN, |v| v / setup.limit())),
        );
    }
    Ok(Sweep {
        t,
        n_values,
        flow,
        closed,
    })
}

/// `[|H_0|, ..., |H_{L-1}|, arg H_0, ..., arg H_{L-1}]`.
pub fn frequency_response(a: &[f64], b: &[f64], c: &[f64], len: usize) -> Result<Vec<f64>> {
    let model = DiagonalSsm::new(a.to_vec(), b.to_vec(), c.to_vec())?;
    let h = model.response_curve(len);
    Ok(h.iter().map(|z| z.norm()).chain(h.iter().map(|z| z.arg())).collect())
}

fn js(e: ssm_dynamics::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = CurveSet)]
pub struct JsCurves(Curves);

#[wasm_bindgen(js_class = CurveSet)]
impl JsCurves {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.0.t.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn flow(&self) -> Vec<f64> {
        self.0.flow.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn closed(&self) -> Vec<f64> {
        self.0.closed.clone()
    }
}

#[wasm_bindgen(js_name = SweepSet)]
pub struct JsSweep(Sweep);

#[wasm_bindgen(js_class = SweepSet)]
impl JsSweep {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.0.t.clone()
    }
    #[wasm_bindgen(getter, js_name = nValues)]
    pub fn n_values(&self) -> Vec<u32> {
        self.0.n_values.iter().map(|&n| n as u32).collect()
    }
    #[wasm_bindgen(getter)]
    pub fn flow(&self) -> Vec<f64> {
        self.0.flow.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn closed(&self) -> Vec<f64> {
        self.0.closed.clone()
    }
}

#[wasm_bindgen(js_name = learningCurve)]
pub fn learning_curve_js(a: f64, init: f64, gain: f64, tau: f64) -> std::result::Result<JsCurves, JsError> {
    learning_curve(a, init, gain, tau).map(JsCurves).map_err(js)
}

#[wasm_bindgen(js_name = latentSweep)]
pub fn latent_sweep_js(a: f64, init: f64, n_max: u32, tau: f64) -> std::result::Result<JsSweep, JsError> {
    latent_sweep(a, init, n_max as usize, tau).map(JsSweep).map_err(js)
}

#[wasm_bindgen(js_name = frequencyResponse)]
pub fn frequency_response_js(
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    len: u32,
) -> std::result::Result<Vec<f64>, JsError> {
    frequency_response(&a, &b, &c, len as usize).map_err(js)
}
