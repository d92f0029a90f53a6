use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use ssm_dynamics::analytic::{c_of_t, FixedAbSetup};
use ssm_lab::config::{DataConfig, DataKind, LayerSpec, ParamSpec, Sinusoid};
use ssm_lab::data::generate;
use ssm_lab::output::ManifestStatus;
use ssm_lab::runs::{interpolate, run_analytic, run_compare, run_sweep, run_train};
use ssm_lab::ExperimentConfig;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.json"))
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&config_path(name)).unwrap()
}

fn set(cfg: &ExperimentConfig, path: &str, v: Value) -> ExperimentConfig {
    cfg.with_override(path, v).unwrap()
}

/// Numeric view of a CSV; non-numeric cells read as NaN.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i]).collect()
}

#[test]
fn identical_config_gives_identical_csv() {
    let cfg = load("stacked_full");
    let dir = tempfile::tempdir().unwrap();
    run_train(&cfg, &dir.path().join("a")).unwrap();
    run_train(&cfg, &dir.path().join("b")).unwrap();
    for f in ["trajectory.csv", "trajectory.json", "curves/response.csv"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let other = set(&cfg, "data.seed", json!(8));
    run_train(&other, &dir.path().join("c")).unwrap();
    assert_ne!(
        fs::read(dir.path().join("a/trajectory.csv")).unwrap(),
        fs::read(dir.path().join("c/trajectory.csv")).unwrap()
    );
}

#[test]
fn manifest_lists_files_and_hash() {
    let cfg = load("scalar_balanced");
    let cfg = set(&cfg, "schedule.steps", json!(20));
    let dir = tempfile::tempdir().unwrap();
    let out = run_train(&cfg, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let m: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["config_hash"], json!(cfg.hash()));
    assert_eq!(m["status"]["state"], json!("completed"));
    assert_eq!(m["files"], json!(["trajectory.csv"]));
    assert_eq!(m["seed"], json!(42));
    assert_eq!(out.manifest.tool, "ssm-lab");
}

#[test]
fn zero_steps_writes_initial_record_only() {
    let cfg = set(&load("scalar_balanced"), "schedule.steps", json!(0));
    let dir = tempfile::tempdir().unwrap();
    run_train(&cfg, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "step,t,loss_freq,lambda,a_0,b_0,c_0");
    assert!(lines[1].starts_with("0,0.0000000000000000e0,"));
}

#[test]
fn huge_step_diverges() {
    let cfg = set(&load("scalar_balanced"), "schedule.dt", json!(50.0));
    let dir = tempfile::tempdir().unwrap();
    let out = run_train(&cfg, dir.path()).unwrap();
    assert!(out.diverged());
    let m: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m["status"]["state"], json!("diverged"));
    // Everything up to the divergence is still on disk.
    let (_, rows) = read_csv(&dir.path().join("trajectory.csv"));
    assert_eq!(rows.len(), out.trajectory.records.len());
}

#[test]
fn scalar_run_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_train(&load("scalar_balanced"), dir.path()).unwrap();
    let r = &out.trajectory.records;
    let (first, last) = (r[0].loss_freq, r.last().unwrap().loss_freq);
    assert!(last <= 1e-6 * first, "{first} -> {last}");
}

#[test]
fn generated_sinusoid_and_identity_teacher() {
    let mut d = DataConfig {
        kind: DataKind::Sinusoids,
        length: 8,
        seed: None,
        sinusoids: vec![Sinusoid {
            bin: 1,
            amplitude: 1.0,
            phase: 0.0,
        }],
        targets: vec![],
        teacher: None,
        noise_scale: 1.0,
        output_noise: 0.0,
        unit_eta_at: None,
    };
    let data = generate(&d).unwrap();
    let nonzero: Vec<usize> = (0..8).filter(|&k| data.u[k].norm() > 1e-12).collect();
    assert_eq!(nonzero, [1, 7]);
    assert!((data.u[1] - data.u[7].conj()).norm() < 1e-12);

    d.kind = DataKind::Teacher;
    d.teacher = Some(LayerSpec {
        a: ParamSpec::Scalar(0.0),
        b: ParamSpec::Scalar(1.0),
        c: ParamSpec::Scalar(1.0),
    });
    let data = generate(&d).unwrap();
    for k in 0..8 {
        assert!((data.y[k] - data.u[k]).norm() < 1e-12);
    }
    assert_eq!(generate(&d).unwrap(), data);
}

#[test]
fn analytic_fixed_point_init_is_constant() {
    let cfg = load("scalar_balanced");
    // Teacher gain 1 with unit eta puts the fixed point at 1.
    let cfg = set(&cfg, "analytic.lambda0", json!(1.0));
    let dir = tempfile::tempdir().unwrap();
    let out = run_analytic(&cfg, dir.path()).unwrap();
    let limit = out.curves[0].limit;
    for v in &out.curves[0].value {
        assert!((v - limit).abs() <= 1e-12 * limit, "{v} vs {limit}");
    }
    assert!(dir.path().join("curves/lambda_scalar.csv").exists());
}

#[test]
fn analytic_fan_out_and_library_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    run_analytic(&load("latent_sweep"), dir.path()).unwrap();
    for n in [1, 2, 4, 8] {
        assert!(dir.path().join(format!("curves/lambda_ndim_n{n}.csv")).exists());
    }

    let cfg = load("fixed_ab_c");
    let dir = tempfile::tempdir().unwrap();
    let out = run_analytic(&cfg, dir.path()).unwrap();
    assert_eq!(out.curves.len(), 3);
    // L = 1 data: sigma = Y U* = 2, eta = |U|^2 = 1.
    assert!((out.inputs.sigma - 2.0).abs() < 1e-14);
    assert!((out.inputs.eta - 1.0).abs() < 1e-14);
    let (header, rows) = read_csv(&dir.path().join("curves/c_of_t_n2.csv"));
    let t = column(&header, &rows, "t");
    let v = column(&header, &rows, "value");
    let s = FixedAbSetup::new(0.3, 0.0, 2.0, 1.0, 1.0, 2).unwrap();
    for (t, v) in t.iter().zip(&v) {
        assert_eq!(*v, c_of_t(*t, &s).unwrap());
    }
}

#[test]
fn analytic_domain_error_is_reported() {
    // A negative teacher gain makes sigma < 0: no growth regime.
    let cfg = set(&load("scalar_balanced"), "data.teacher.c", json!(-1.0));
    let dir = tempfile::tempdir().unwrap();
    let err = run_analytic(&cfg, dir.path()).err().unwrap();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("sigma"), "{err}");
}

#[test]
fn compare_matched_and_negative_control() {
    let cfg = load("scalar_balanced");
    let dir = tempfile::tempdir().unwrap();
    let ok = run_compare(&cfg, &dir.path().join("ok")).unwrap();
    assert!(!ok.report.mismatch);
    assert!(ok.report.rows[0].deviation.sup <= 1e-3);
    let (header, _) = read_csv(&dir.path().join("ok/curves/compare.csv"));
    assert_eq!(header, ["t", "empirical", "analytic", "abs_diff"]);

    let wrong = set(&cfg, "compare.sigma_scale", json!(2.0));
    let bad = run_compare(&wrong, &dir.path().join("bad")).unwrap();
    assert!(bad.report.mismatch);
    assert!(bad.report.rows[0].deviation.sup > 1e-3);

    let grid = set(&cfg, "compare.grid_points", json!(51));
    let g = run_compare(&grid, &dir.path().join("grid")).unwrap();
    assert!(g.report.resampled);
    assert_eq!(g.report.rows[0].points, 51);
    assert!(g.report.rows[0].deviation.sup <= 1e-3);
}

#[test]
fn compare_per_n_table() {
    let cfg = load("latent_sweep");
    let cfg = set(
        &cfg,
        "compare",
        json!({"formula": "lambda_ndim", "normalized": true, "n_values": [1, 2, 4]}),
    );
    let dir = tempfile::tempdir().unwrap();
    let out = run_compare(&cfg, dir.path()).unwrap();
    assert_eq!(out.report.rows.iter().map(|r| r.n).collect::<Vec<_>>(), [1, 2, 4]);
    // N = 1 is the scalar case and agrees; larger N are reported, not judged.
    assert!(out.report.rows[0].deviation.sup <= 1e-3);
    for n in [1, 2, 4] {
        assert!(dir.path().join(format!("n{n}/trajectory.csv")).exists());
    }
}

#[test]
fn compare_fixed_parameter_forms() {
    for name in ["fixed_ab_c", "fixed_cb_a"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_compare(&load(name), dir.path()).unwrap();
        assert!(!out.report.mismatch, "{name}: {:?}", out.report.rows);
    }
}

#[test]
fn compare_rejects_wrong_learning_mask() {
    let cfg = set(&load("fixed_ab_c"), "model.learn.b", json!(true));
    let dir = tempfile::tempdir().unwrap();
    assert!(run_compare(&cfg, dir.path()).is_err());
}

#[test]
fn sweep_latent_size_speeds_up() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_sweep(&load("latent_sweep"), dir.path()).unwrap();
    let t: Vec<f64> = out
        .report
        .rows
        .iter()
        .map(|r| r.time_to_alpha.unwrap())
        .collect();
    assert!(t.windows(2).all(|w| w[1] < w[0]), "{t:?}");
    let (header, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(header[1], "model.latent_size");
    assert_eq!(header[8], "time_to_0.9");
    assert_eq!(column(&header, &rows, "model.latent_size"), [1.0, 2.0, 4.0, 8.0]);
}

#[test]
fn single_value_sweep_matches_train() {
    let cfg = load("scalar_balanced");
    let cfg = set(&cfg, "schedule.steps", json!(500));
    let mut with_sweep = cfg.clone();
    with_sweep.sweep = Some(serde_json::from_value(json!({"param": "data.seed", "values": [42]})).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let sweep = run_sweep(&with_sweep, &dir.path().join("sweep")).unwrap();
    run_train(&cfg, &dir.path().join("train")).unwrap();
    assert_eq!(sweep.report.rows.len(), 1);
    assert_eq!(
        fs::read(dir.path().join("sweep/run_000/trajectory.csv")).unwrap(),
        fs::read(dir.path().join("train/trajectory.csv")).unwrap()
    );
    let (_, rows) = read_csv(&dir.path().join("sweep/sweep.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(sweep.report.rows[0].config_hash.as_deref(), Some(cfg.hash().as_str()));
}

#[test]
fn smaller_dt_is_closer_to_rk4() {
    let base = load("scalar_balanced");
    let base = set(&base, "schedule.steps", json!(50));
    let base = set(&base, "schedule.record_every", json!(1));
    let mut cfg = base.clone();
    // Same horizon t = 0.5 for both step sizes.
    cfg.sweep = Some(
        serde_json::from_value(json!({"param": "schedule", "values": [
            {"tau": 1.0, "dt": 0.01, "steps": 50},
            {"tau": 1.0, "dt": 0.001, "steps": 500}
        ]}))
        .unwrap(),
    );
    let reference = set(
        &base,
        "schedule",
        json!({"tau": 1.0, "dt": 0.0001, "steps": 5000, "integrator": "rk4"}),
    );
    let dir = tempfile::tempdir().unwrap();
    run_sweep(&cfg, &dir.path().join("sweep")).unwrap();
    run_train(&reference, &dir.path().join("ref")).unwrap();
    let (rh, rr) = read_csv(&dir.path().join("ref/trajectory.csv"));
    let (rt, rl) = (column(&rh, &rr, "t"), column(&rh, &rr, "lambda"));
    let err = |run: &str| {
        let (h, r) = read_csv(&dir.path().join("sweep").join(run).join("trajectory.csv"));
        let t = column(&h, &r, "t");
        let l = column(&h, &r, "lambda");
        t.iter()
            .zip(&l)
            .map(|(t, l)| (l - interpolate(&rt, &rl, *t)).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err("run_000"), err("run_001"));
    assert!(fine < coarse, "{fine} vs {coarse}");
    // First order: ten times smaller step, roughly ten times smaller error.
    assert!(coarse / fine > 5.0, "{coarse} / {fine}");
}

#[test]
fn sweep_is_independent_of_parallelism() {
    let cfg = load("latent_sweep");
    let cfg = set(&cfg, "schedule.steps", json!(800));
    let serial = set(&cfg, "sweep.parallel", json!(false));
    let dir = tempfile::tempdir().unwrap();
    run_sweep(&cfg, &dir.path().join("par")).unwrap();
    run_sweep(&serial, &dir.path().join("ser")).unwrap();
    assert_eq!(
        fs::read(dir.path().join("par/sweep.csv")).unwrap(),
        fs::read(dir.path().join("ser/sweep.csv")).unwrap()
    );
    for i in 0..4 {
        let f = format!("run_{i:03}/trajectory.csv");
        assert_eq!(
            fs::read(dir.path().join("par").join(&f)).unwrap(),
            fs::read(dir.path().join("ser").join(&f)).unwrap()
        );
    }
}

#[test]
fn sweep_records_child_failures_and_continues() {
    let cfg = load("scalar_balanced");
    let cfg = set(&cfg, "schedule.steps", json!(100));
    let cfg = set(
        &cfg,
        "sweep",
        json!({"param": "model.init.a", "values": [0.5, 1.5, 0.2]}),
    );
    let dir = tempfile::tempdir().unwrap();
    let out = run_sweep(&cfg, dir.path()).unwrap();
    let states: Vec<bool> = out
        .report
        .rows
        .iter()
        .map(|r| matches!(r.status, ManifestStatus::Failed { .. }))
        .collect();
    assert_eq!(states, [false, true, false]);
    assert!(out.report.any_failed());
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(text.lines().nth(2).unwrap().contains("failed"));
    assert!(dir.path().join("run_002/trajectory.csv").exists());
}

#[test]
fn stacked_csv_columns_are_layer_suffixed() {
    let cfg = set(&load("stacked_full"), "schedule.steps", json!(0));
    let dir = tempfile::tempdir().unwrap();
    run_train(&cfg, dir.path()).unwrap();
    let (header, _) = read_csv(&dir.path().join("trajectory.csv"));
    assert_eq!(header.len(), 4 + 2 * 9);
    assert_eq!(&header[4..7], ["a0_0", "a0_1", "a0_2"]);
    assert_eq!(header.last().unwrap(), "c1_2");
}
