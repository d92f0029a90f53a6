//! The lab's commands as library functions. Each writes into its own output
//! directory and finishes with a `manifest.json`.

use std::path::Path;

use chrono::Utc;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use ssm_dynamics::analytic::{
    c_of_t, lambda_ndim, lambda_scalar, time_to_a, time_to_fraction, FixedAbSetup,
    ReducedScalarSetup,
};
use ssm_dynamics::graddyn::{
    integrate, FreezeMask, ParamKind, RecordOptions, TrainSchedule, Trajectory,
};
use ssm_dynamics::suffstats::{aggregate, Weighting};
use ssm_dynamics::StackedSsm;

use crate::config::{
    AnalyticConfig, ExperimentConfig, Formula, InitSpec, LayerSpec, OutputFormat, ParamSpec,
};
use crate::data::{generate, Dataset};
use crate::error::{LabError, Result};
use crate::output::{
    curve_table, data_table, fmt_f64, response_table, timestamp, trajectory_table, Manifest,
    ManifestStatus, OutputDir,
};

pub const TOOL: &str = "ssm-lab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Relative distance to the fixed point below which `a_path` samples are
/// not compared.
const NEAR_LIMIT: f64 = 1e-3;

struct Prepared {
    data: Dataset,
    model: StackedSsm,
    mask: FreezeMask,
    schedule: TrainSchedule,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    Ok(Prepared {
        data: generate(&cfg.data)?,
        model: cfg.model.build()?,
        mask: cfg.model.mask()?,
        schedule: cfg.schedule.build()?,
    })
}

fn finish(
    out: &mut OutputDir,
    command: &str,
    cfg: &ExperimentConfig,
    started: chrono::DateTime<Utc>,
    status: ManifestStatus,
) -> Result<Manifest> {
    let manifest = Manifest {
        tool: TOOL.into(),
        tool_version: TOOL_VERSION.into(),
        command: command.into(),
        config_name: cfg.name.clone(),
        config_hash: cfg.hash(),
        seed: cfg.data.seed,
        started_at: timestamp(started),
        finished_at: timestamp(Utc::now()),
        status,
        files: out.files().to_vec(),
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(manifest)
}

#[derive(Serialize)]
struct TrajectoryJson {
    columns: Vec<String>,
    status: ManifestStatus,
    rows: Vec<Vec<f64>>,
}

fn write_trajectory(
    out: &mut OutputDir,
    prefix: &str,
    traj: &Trajectory,
    cfg: &ExperimentConfig,
) -> Result<()> {
    let path = |name: &str| {
        if prefix.is_empty() {
            name.to_string()
        } else {
            format!("{prefix}/{name}")
        }
    };
    let (header, rows) = trajectory_table(traj);
    if cfg.outputs.formats.contains(&OutputFormat::Csv) {
        out.write_csv(&path("trajectory.csv"), &header, &rows)?;
    }
    if cfg.outputs.formats.contains(&OutputFormat::Json) {
        let json = TrajectoryJson {
            columns: header,
            status: (&traj.status).into(),
            rows: traj
                .records
                .iter()
                .map(|r| {
                    let mut row = vec![r.step as f64, r.t, r.loss_freq, r.lambda];
                    row.extend(&r.params);
                    row
                })
                .collect(),
        };
        out.write_json(&path("trajectory.json"), &json)?;
    }
    if cfg.outputs.emit_plot_data {
        if let Some((header, rows)) = response_table(traj) {
            out.write_csv(&path("curves/response.csv"), &header, &rows)?;
        }
    }
    Ok(())
}

pub struct GenOutcome {
    pub data: Dataset,
    pub manifest: Manifest,
}

pub fn run_gen(cfg: &ExperimentConfig, dir: &Path) -> Result<GenOutcome> {
    let started = Utc::now();
    cfg.validate()?;
    let data = generate(&cfg.data)?;
    let mut out = OutputDir::create(dir)?;
    let (header, rows) = data_table(&data);
    out.write_csv("data.csv", &header, &rows)?;
    let manifest = finish(&mut out, "gen", cfg, started, ManifestStatus::Completed)?;
    Ok(GenOutcome { data, manifest })
}

pub struct TrainOutcome {
    pub trajectory: Trajectory,
    pub manifest: Manifest,
}

impl TrainOutcome {
    pub fn diverged(&self) -> bool {
        self.trajectory.status.is_diverged()
    }
}

pub fn run_train(cfg: &ExperimentConfig, dir: &Path) -> Result<TrainOutcome> {
    let started = Utc::now();
    let p = prepare(cfg)?;
    let mut out = OutputDir::create(dir)?;
    let opts = RecordOptions {
        response: cfg.schedule.record_response,
    };
    let trajectory = integrate(&p.model, &p.data.u, &p.data.y, &p.mask, &p.schedule, opts)?;
    write_trajectory(&mut out, "", &trajectory, cfg)?;
    let manifest = finish(&mut out, "train", cfg, started, (&trajectory.status).into())?;
    Ok(TrainOutcome {
        trajectory,
        manifest,
    })
}

// ---- closed forms -------------------------------------------------------

fn single_layer(cfg: &ExperimentConfig, why: &str) -> Result<LayerSpec> {
    if cfg.model.layers != 1 {
        return Err(LabError::config("model.layers", format!("{why} needs a single layer")));
    }
    Ok(match &cfg.model.init {
        InitSpec::Shared(s) => s.clone(),
        InitSpec::PerLayer(v) => v[0].clone(),
    })
}

fn uniform(p: &ParamSpec, field: &str, why: &str) -> Result<f64> {
    p.uniform().ok_or_else(|| {
        LabError::config(field, format!("{why} needs the same value in every dimension"))
    })
}

/// Everything a closed form needs, resolved from the config and data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormInputs {
    pub sigma: f64,
    pub eta: f64,
    pub tau: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `sum_i c_i b_i` at initialization.
    pub gain: f64,
}

pub fn closed_form_inputs(
    cfg: &ExperimentConfig,
    formula: Formula,
    data: &Dataset,
) -> Result<ClosedFormInputs> {
    let why = formula.name();
    let spec = single_layer(cfg, why)?;
    let a = uniform(&spec.a, "model.init.a", why)?;
    let b = uniform(&spec.b, "model.init.b", why)?;
    let c = uniform(&spec.c, "model.init.c", why)?;
    if matches!(formula, Formula::COfT | Formula::APath) && b != 1.0 {
        return Err(LabError::config(
            "model.init.b",
            format!("{why} assumes b = 1, got {b}"),
        ));
    }
    let weighting = match formula {
        Formula::LambdaScalar | Formula::LambdaNdim => Weighting::GWeighted { a },
        Formula::COfT | Formula::APath => Weighting::Plain,
    };
    let overrides = cfg.analytic.as_ref().map(|a| (a.sigma, a.eta));
    let (sigma, eta) = match overrides {
        Some((Some(s), Some(e))) => (s, e),
        other => {
            let stats = aggregate(&data.u, &data.y, weighting)?;
            let (s, e) = other.unwrap_or((None, None));
            (
                s.map_or_else(|| stats.sigma_real(), Ok)?,
                e.map_or_else(|| stats.eta_real(), Ok)?,
            )
        }
    };
    let n = cfg.model.latent_size as f64;
    Ok(ClosedFormInputs {
        sigma,
        eta,
        tau: cfg.schedule.tau,
        a,
        b,
        c,
        gain: n * b * c,
    })
}

/// One closed-form curve. For `a_path` the grid is over `a` and `t` is the
/// computed arrival time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub formula: Formula,
    pub n: usize,
    pub t: Vec<f64>,
    pub value: Vec<f64>,
    /// Stationary value the curve approaches.
    pub limit: f64,
}

fn lambda0_for(formula: Formula, inp: &ClosedFormInputs, acfg: Option<&AnalyticConfig>) -> f64 {
    acfg.and_then(|a| a.lambda0).unwrap_or(match formula {
        Formula::LambdaNdim => inp.b * inp.c,
        _ => inp.gain,
    })
}

/// Evaluates a closed form at the given times (ignored for `a_path`, which
/// uses `points` values of `a`).
pub fn evaluate_curve(
    formula: Formula,
    inp: &ClosedFormInputs,
    n: usize,
    lambda0: f64,
    times: &[f64],
) -> Result<Curve> {
    let (t, value, limit) = match formula {
        Formula::LambdaScalar | Formula::LambdaNdim => {
            let s = ReducedScalarSetup::new(inp.sigma, inp.eta, inp.tau, lambda0, n)?;
            let f = if formula == Formula::LambdaScalar {
                lambda_scalar
            } else {
                lambda_ndim
            };
            let v = times.iter().map(|&t| f(t, &s)).collect::<std::result::Result<_, _>>()?;
            (times.to_vec(), v, s.limit())
        }
        Formula::COfT => {
            let s = FixedAbSetup::new(inp.a, inp.c, inp.sigma, inp.eta, inp.tau, n)?;
            let v = times.iter().map(|&t| c_of_t(t, &s)).collect::<std::result::Result<_, _>>()?;
            (times.to_vec(), v, s.c_fixed_point())
        }
        Formula::APath => {
            let s = FixedAbSetup::new(inp.a, inp.c, inp.sigma, inp.eta, inp.tau, n)?;
            let target = s.a_fixed_point();
            let m = times.len().max(2);
            let grid: Vec<f64> = (0..m)
                .map(|i| inp.a + 0.99 * (target - inp.a) * i as f64 / (m - 1) as f64)
                .collect();
            let t = grid
                .iter()
                .map(|&af| time_to_a(af, &s))
                .collect::<std::result::Result<_, _>>()?;
            (t, grid, target)
        }
    };
    Ok(Curve {
        formula,
        n,
        t,
        value,
        limit,
    })
}

fn uniform_grid(t_end: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| t_end * i as f64 / (points - 1) as f64)
        .collect()
}

pub struct AnalyticOutcome {
    pub inputs: ClosedFormInputs,
    pub curves: Vec<Curve>,
    pub manifest: Manifest,
}

#[derive(Serialize)]
struct AnalyticReport<'a> {
    formula: &'static str,
    inputs: &'a ClosedFormInputs,
    lambda0: f64,
    curves: Vec<CurveSummary>,
}

#[derive(Serialize)]
struct CurveSummary {
    n: usize,
    file: String,
    limit: f64,
    final_value: f64,
}

pub fn run_analytic(cfg: &ExperimentConfig, dir: &Path) -> Result<AnalyticOutcome> {
    let started = Utc::now();
    cfg.validate()?;
    let acfg = cfg
        .analytic
        .as_ref()
        .ok_or_else(|| LabError::config("analytic", "section missing"))?;
    let data = generate(&cfg.data)?;
    let inputs = closed_form_inputs(cfg, acfg.formula, &data)?;
    let lambda0 = lambda0_for(acfg.formula, &inputs, Some(acfg));
    let t_end = acfg
        .t_end
        .unwrap_or(cfg.schedule.steps as f64 * cfg.schedule.dt);
    let times = uniform_grid(t_end, acfg.points);
    let ns = acfg
        .n_values
        .clone()
        .unwrap_or_else(|| vec![cfg.model.latent_size]);

    let mut out = OutputDir::create(dir)?;
    let mut curves = Vec::new();
    let mut summaries = Vec::new();
    for &n in &ns {
        let curve = evaluate_curve(acfg.formula, &inputs, n, lambda0, &times)?;
        let file = if ns.len() == 1 {
            format!("curves/{}.csv", acfg.formula.name())
        } else {
            format!("curves/{}_n{n}.csv", acfg.formula.name())
        };
        let (header, rows) = curve_table(&["t", "value"], &[&curve.t, &curve.value]);
        out.write_csv(&file, &header, &rows)?;
        summaries.push(CurveSummary {
            n,
            file,
            limit: curve.limit,
            final_value: *curve.value.last().unwrap(),
        });
        curves.push(curve);
    }
    out.write_json(
        "report.json",
        &AnalyticReport {
            formula: acfg.formula.name(),
            inputs: &inputs,
            lambda0,
            curves: summaries,
        },
    )?;
    let manifest = finish(&mut out, "analytic", cfg, started, ManifestStatus::Completed)?;
    Ok(AnalyticOutcome {
        inputs,
        curves,
        manifest,
    })
}

// ---- comparison ---------------------------------------------------------

/// Linear interpolation of `(xs, ys)` at `x`; clamps outside the range.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.partition_point(|&v| v < x) {
        0 => ys[0],
        i if i >= xs.len() => ys[xs.len() - 1],
        i => {
            let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            ys[i - 1] + w * (ys[i] - ys[i - 1])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub sup: f64,
    pub rms: f64,
}

pub fn deviation(a: &[f64], b: &[f64]) -> Deviation {
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    let sup = diffs.iter().cloned().fold(0.0, f64::max);
    let rms = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len().max(1) as f64).sqrt();
    Deviation { sup, rms }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub n: usize,
    pub points: usize,
    /// Samples left out because they sit at the fixed point (`a_path`).
    pub excluded_near_limit: usize,
    pub deviation: Deviation,
    pub mismatch: bool,
    pub status: ManifestStatus,
    pub empirical_limit: f64,
    pub analytic_limit: f64,
    pub curve_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub formula: &'static str,
    /// Quantity compared: the curve value, or arrival time for `a_path`.
    pub compared: &'static str,
    pub normalized: bool,
    /// Set when the empirical curve was interpolated onto a uniform grid.
    pub resampled: bool,
    pub threshold: f64,
    pub sigma_scale: f64,
    pub inputs: ClosedFormInputs,
    pub rows: Vec<CompareRow>,
    pub mismatch: bool,
    pub diverged: bool,
}

pub struct CompareOutcome {
    pub report: CompareReport,
    pub manifest: Manifest,
}

fn check_learning(cfg: &ExperimentConfig, formula: Formula) -> Result<()> {
    let l = cfg.model.learn;
    let (want, label) = match formula {
        Formula::LambdaScalar | Formula::LambdaNdim => ((false, true, true), "b and c"),
        Formula::COfT => ((false, false, true), "only c"),
        Formula::APath => ((true, false, false), "only a"),
    };
    if (l.a, l.b, l.c) != want {
        return Err(LabError::config(
            "model.learn",
            format!("{} describes learning {label}", formula.name()),
        ));
    }
    Ok(())
}

pub fn run_compare(cfg: &ExperimentConfig, dir: &Path) -> Result<CompareOutcome> {
    let started = Utc::now();
    cfg.validate()?;
    let ccfg = cfg
        .compare
        .as_ref()
        .ok_or_else(|| LabError::config("compare", "section missing"))?;
    let formula = ccfg.formula;
    check_learning(cfg, formula)?;
    let multi = ccfg.n_values.is_some();
    let ns = ccfg
        .n_values
        .clone()
        .unwrap_or_else(|| vec![cfg.model.latent_size]);

    let mut out = OutputDir::create(dir)?;
    let mut rows = Vec::new();
    let mut base_inputs = None;
    for &n in &ns {
        let cfg_n = if multi {
            cfg.with_override("model.latent_size", Value::from(n))?
        } else {
            cfg.clone()
        };
        let p = prepare(&cfg_n)?;
        let inputs = closed_form_inputs(&cfg_n, formula, &p.data)?;
        base_inputs.get_or_insert(inputs);
        let traj = integrate(
            &p.model,
            &p.data.u,
            &p.data.y,
            &p.mask,
            &p.schedule,
            RecordOptions::default(),
        )?;
        let prefix = if multi { format!("n{n}") } else { String::new() };
        write_trajectory(&mut out, &prefix, &traj, &cfg_n)?;

        let scaled = ClosedFormInputs {
            sigma: inputs.sigma * ccfg.sigma_scale,
            ..inputs
        };
        let lambda0 = lambda0_for(formula, &inputs, cfg.analytic.as_ref());
        let times = traj.times();
        let nf = n as f64;
        let mut excluded = 0;
        let (emp_t, emp_v, an_v, emp_limit, an_limit) = match formula {
            Formula::APath => {
                // Compare arrival times at the visited values of a.
                let a_series = traj.param_series(0, ParamKind::A, 0);
                let curve = evaluate_curve(formula, &scaled, n, lambda0, &[0.0, 1.0])?;
                let s = FixedAbSetup::new(scaled.a, scaled.c, scaled.sigma, scaled.eta, scaled.tau, n)?;
                // Arrival time is ill-conditioned once a has all but
                // reached its fixed point, so those samples are dropped.
                let gap0 = (inputs.a - curve.limit).abs();
                let keep: Vec<usize> = (0..a_series.len())
                    .filter(|&i| (a_series[i] - curve.limit).abs() > NEAR_LIMIT * gap0)
                    .collect();
                excluded = a_series.len() - keep.len();
                let predicted = keep
                    .iter()
                    .map(|&i| time_to_a(a_series[i], &s))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let a_kept = keep.iter().map(|&i| a_series[i]).collect();
                let t_kept = keep.iter().map(|&i| times[i]).collect();
                (a_kept, t_kept, predicted, f64::NAN, curve.limit)
            }
            _ => {
                let emp: Vec<f64> = match formula {
                    Formula::LambdaScalar => traj.lambdas(),
                    Formula::LambdaNdim => traj.lambdas().iter().map(|l| l / nf).collect(),
                    _ => traj.param_series(0, ParamKind::C, 0),
                };
                let emp_limit = match formula {
                    Formula::LambdaScalar => inputs.sigma / inputs.eta,
                    Formula::LambdaNdim => inputs.sigma / (nf * inputs.eta),
                    _ => FixedAbSetup::new(inputs.a, inputs.c, inputs.sigma, inputs.eta, inputs.tau, n)?
                        .c_fixed_point(),
                };
                let grid = match ccfg.grid_points {
                    Some(m) => uniform_grid(*times.last().unwrap(), m),
                    None => times.clone(),
                };
                let emp_on_grid: Vec<f64> = match ccfg.grid_points {
                    Some(_) => grid.iter().map(|&t| interpolate(&times, &emp, t)).collect(),
                    None => emp,
                };
                let curve = evaluate_curve(formula, &scaled, n, lambda0, &grid)?;
                (grid, emp_on_grid, curve.value, emp_limit, curve.limit)
            }
        };
        let (emp_cmp, an_cmp): (Vec<f64>, Vec<f64>) =
            if ccfg.normalized && formula != Formula::APath {
                (
                    emp_v.iter().map(|v| v / emp_limit).collect(),
                    an_v.iter().map(|v| v / an_limit).collect(),
                )
            } else {
                (emp_v, an_v)
            };
        let dev = deviation(&emp_cmp, &an_cmp);
        let diff: Vec<f64> = emp_cmp.iter().zip(&an_cmp).map(|(a, b)| (a - b).abs()).collect();
        let curve_file = if multi {
            format!("curves/compare_n{n}.csv")
        } else {
            "curves/compare.csv".to_string()
        };
        let x_label = if formula == Formula::APath { "a" } else { "t" };
        let (header, table) =
            curve_table(&[x_label, "empirical", "analytic", "abs_diff"], &[&emp_t, &emp_cmp, &an_cmp, &diff]);
        out.write_csv(&curve_file, &header, &table)?;
        rows.push(CompareRow {
            n,
            points: emp_cmp.len(),
            excluded_near_limit: excluded,
            mismatch: !(dev.sup <= ccfg.threshold),
            deviation: dev,
            status: (&traj.status).into(),
            empirical_limit: emp_limit,
            analytic_limit: an_limit,
            curve_file,
        });
    }
    let report = CompareReport {
        formula: formula.name(),
        compared: if formula == Formula::APath { "time" } else { "value" },
        normalized: ccfg.normalized,
        resampled: ccfg.grid_points.is_some() && formula != Formula::APath,
        threshold: ccfg.threshold,
        sigma_scale: ccfg.sigma_scale,
        inputs: base_inputs.expect("at least one latent size"),
        mismatch: rows.iter().any(|r| r.mismatch),
        diverged: rows
            .iter()
            .any(|r| matches!(r.status, ManifestStatus::Diverged { .. })),
        rows,
    };
    out.write_json("report.json", &report)?;
    let status = report
        .rows
        .iter()
        .find(|r| matches!(r.status, ManifestStatus::Diverged { .. }))
        .map_or(ManifestStatus::Completed, |r| r.status.clone());
    let manifest = finish(&mut out, "compare", cfg, started, status)?;
    Ok(CompareOutcome { report, manifest })
}

// ---- sweeps -------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: Value,
    pub status: ManifestStatus,
    pub run_dir: String,
    pub config_hash: Option<String>,
    pub records: usize,
    pub final_t: Option<f64>,
    pub final_loss: Option<f64>,
    pub final_lambda: Option<f64>,
    pub limit: Option<f64>,
    pub time_to_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub param: String,
    pub alpha: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn any_failed(&self) -> bool {
        self.rows
            .iter()
            .any(|r| matches!(r.status, ManifestStatus::Failed { .. }))
    }

    pub fn any_diverged(&self) -> bool {
        self.rows
            .iter()
            .any(|r| matches!(r.status, ManifestStatus::Diverged { .. }))
    }
}

pub struct SweepOutcome {
    pub report: SweepReport,
    pub manifest: Manifest,
}

/// Stationary `sum c b` when `A` is frozen at a shared value, else `None`.
fn frozen_limit(cfg: &ExperimentConfig, data: &Dataset) -> Option<f64> {
    if cfg.model.learn.a {
        return None;
    }
    let a = cfg.model.shared_a()?;
    let s = aggregate(&data.u, &data.y, Weighting::GWeighted { a }).ok()?;
    Some(s.sigma_real().ok()? / s.eta_real().ok()?)
}

fn sweep_row(
    base: &ExperimentConfig,
    param: &str,
    alpha: f64,
    index: usize,
    value: &Value,
    root: &Path,
) -> SweepRow {
    let run_dir = format!("run_{index:03}");
    let mut row = SweepRow {
        index,
        value: value.clone(),
        status: ManifestStatus::Completed,
        run_dir: run_dir.clone(),
        config_hash: None,
        records: 0,
        final_t: None,
        final_loss: None,
        final_lambda: None,
        limit: None,
        time_to_alpha: None,
    };
    let result = base.with_override(param, value.clone()).and_then(|cfg| {
        row.config_hash = Some(cfg.hash());
        let outcome = run_train(&cfg, &root.join(&run_dir))?;
        let data = generate(&cfg.data)?;
        Ok((outcome, frozen_limit(&cfg, &data)))
    });
    match result {
        Ok((outcome, limit)) => {
            let traj = &outcome.trajectory;
            let last = traj.last();
            let limit = limit.unwrap_or(last.lambda);
            row.status = (&traj.status).into();
            row.records = traj.records.len();
            row.final_t = Some(last.t);
            row.final_loss = Some(last.loss_freq);
            row.final_lambda = Some(last.lambda);
            row.limit = Some(limit);
            row.time_to_alpha = time_to_fraction(&traj.times(), &traj.lambdas(), limit, alpha);
        }
        Err(e) => row.status = ManifestStatus::Failed { error: e.to_string() },
    }
    row
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn run_sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<SweepOutcome> {
    let started = Utc::now();
    cfg.validate()?;
    let scfg = cfg
        .sweep
        .clone()
        .ok_or_else(|| LabError::config("sweep", "section missing"))?;
    let base = ExperimentConfig {
        sweep: None,
        ..cfg.clone()
    };
    let mut out = OutputDir::create(dir)?;
    let root = out.root().to_path_buf();
    let run = |(i, v): (usize, &Value)| sweep_row(&base, &scfg.param, scfg.alpha, i, v, &root);
    let rows: Vec<SweepRow> = if scfg.parallel {
        scfg.values.par_iter().enumerate().map(run).collect()
    } else {
        scfg.values.iter().enumerate().map(run).collect()
    };

    let header: Vec<String> = [
        "index".to_string(),
        scfg.param.clone(),
        "status".into(),
        "records".into(),
        "final_t".into(),
        "final_loss".into(),
        "final_lambda".into(),
        "limit".into(),
        format!("time_to_{}", scfg.alpha),
    ]
    .into();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let status = match &r.status {
                ManifestStatus::Completed => "completed",
                ManifestStatus::Diverged { .. } => "diverged",
                ManifestStatus::Failed { .. } => "failed",
            };
            vec![
                r.index.to_string(),
                r.value.to_string(),
                status.into(),
                r.records.to_string(),
                opt(r.final_t),
                opt(r.final_loss),
                opt(r.final_lambda),
                opt(r.limit),
                opt(r.time_to_alpha),
            ]
        })
        .collect();
    out.write_csv("sweep.csv", &header, &table)?;
    for r in &rows {
        if !matches!(r.status, ManifestStatus::Failed { .. }) {
            let child = root.join(&r.run_dir).join("manifest.json");
            let text = std::fs::read_to_string(&child).map_err(|e| LabError::io(&child, e))?;
            let m: Manifest = serde_json::from_str(&text)
                .map_err(|e| LabError::io(&child, std::io::Error::other(e)))?;
            out.adopt(&r.run_dir, &m.files);
            out.adopt(&r.run_dir, &["manifest.json".to_string()]);
        }
    }
    let report = SweepReport {
        param: scfg.param.clone(),
        alpha: scfg.alpha,
        rows,
    };
    out.write_json("report.json", &report)?;
    let manifest = finish(&mut out, "sweep", cfg, started, ManifestStatus::Completed)?;
    Ok(SweepOutcome { report, manifest })
}

/// Runs every command a config has sections for: train always, then
/// analytic, compare and sweep when present, each in its own subdirectory.
pub fn run_all(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<Manifest>> {
    let mut manifests = vec![run_train(cfg, &dir.join("train"))?.manifest];
    if cfg.analytic.is_some() {
        manifests.push(run_analytic(cfg, &dir.join("analytic"))?.manifest);
    }
    if cfg.compare.is_some() {
        manifests.push(run_compare(cfg, &dir.join("compare"))?.manifest);
    }
    if cfg.sweep.is_some() {
        manifests.push(run_sweep(cfg, &dir.join("sweep"))?.manifest);
    }
    Ok(manifests)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation() {
        let xs = [0.0, 1.0, 3.0];
        let ys = [0.0, 2.0, 6.0];
        assert_eq!(interpolate(&xs, &ys, -1.0), 0.0);
        assert_eq!(interpolate(&xs, &ys, 0.5), 1.0);
        assert_eq!(interpolate(&xs, &ys, 2.0), 4.0);
        assert_eq!(interpolate(&xs, &ys, 9.0), 6.0);
        assert_eq!(interpolate(&xs, &ys, 1.0), 2.0);
    }

    #[test]
    fn deviation_norms() {
        let d = deviation(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(d.sup, 2.0);
        assert_eq!(d.rms, 1.0);
    }
}
