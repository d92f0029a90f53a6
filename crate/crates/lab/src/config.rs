//! Experiment configuration files.
//!
//! One JSON document per experiment. Unknown keys are rejected so typos do
//! not silently fall back to defaults. The config hash covers everything
//! except the `outputs` section and is computed over the canonical JSON
//! form (keys sorted), so key order in the file does not matter.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use ssm_dynamics::graddyn::{FreezeMask, LayerMask, TrainSchedule};
use ssm_dynamics::ode::Integrator;
use ssm_dynamics::{DiagonalSsm, StackedSsm};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub data: DataConfig,
    pub model: ModelConfig,
    pub schedule: ScheduleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// Input from `sinusoids` (or noise when the list is empty), output from
    /// the `teacher` model.
    Teacher,
    /// Input from `sinusoids`, output from `targets` (or a copy of the input).
    Sinusoids,
    /// White-noise input; output from `teacher` if given, otherwise
    /// independent white noise.
    Noise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sinusoid {
    pub bin: usize,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub kind: DataKind,
    #[serde(alias = "L")]
    pub length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sinusoids: Vec<Sinusoid>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<Sinusoid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teacher: Option<LayerSpec>,
    /// Standard deviation of white-noise inputs.
    #[serde(default = "one")]
    pub noise_scale: f64,
    /// Standard deviation of noise added to the time-domain output.
    #[serde(default)]
    pub output_noise: f64,
    /// Rescale input and output together so that the G-weighted `eta` at
    /// this `a` equals 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_eta_at: Option<f64>,
}

fn one() -> f64 {
    1.0
}

/// A parameter given either as one value broadcast to every latent
/// dimension or as an explicit per-dimension list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Scalar(f64),
    List(Vec<f64>),
}

impl ParamSpec {
    fn expand(&self, n: usize, field: &str) -> Result<Vec<f64>> {
        match self {
            ParamSpec::Scalar(v) => Ok(vec![*v; n]),
            ParamSpec::List(v) if v.len() == n => Ok(v.clone()),
            ParamSpec::List(v) => Err(LabError::config(
                field,
                format!("expected {n} values, got {}", v.len()),
            )),
        }
    }

    fn len_hint(&self) -> Option<usize> {
        match self {
            ParamSpec::Scalar(_) => None,
            ParamSpec::List(v) => Some(v.len()),
        }
    }

    /// The common value when every dimension shares it.
    pub fn uniform(&self) -> Option<f64> {
        match self {
            ParamSpec::Scalar(v) => Some(*v),
            ParamSpec::List(v) => {
                let first = *v.first()?;
                v.iter().all(|x| *x == first).then_some(first)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub a: ParamSpec,
    pub b: ParamSpec,
    pub c: ParamSpec,
}

impl LayerSpec {
    pub fn build(&self, n: usize, field: &str) -> Result<DiagonalSsm> {
        let model = DiagonalSsm::new(
            self.a.expand(n, &format!("{field}.a"))?,
            self.b.expand(n, &format!("{field}.b"))?,
            self.c.expand(n, &format!("{field}.c"))?,
        );
        model.map_err(|e| LabError::config(field, e.to_string()))
    }

    /// Latent size implied by any list-valued parameter, else 1.
    pub fn implied_size(&self) -> usize {
        [&self.a, &self.b, &self.c]
            .iter()
            .filter_map(|p| p.len_hint())
            .max()
            .unwrap_or(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitSpec {
    Shared(LayerSpec),
    PerLayer(Vec<LayerSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnSpec {
    pub a: bool,
    pub b: bool,
    pub c: bool,
}

impl Default for LearnSpec {
    fn default() -> Self {
        Self {
            a: false,
            b: true,
            c: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(alias = "N")]
    pub latent_size: usize,
    #[serde(default = "one_usize", alias = "K")]
    pub layers: usize,
    pub init: InitSpec,
    #[serde(default)]
    pub learn: LearnSpec,
}

fn one_usize() -> usize {
    1
}

impl ModelConfig {
    pub fn build(&self) -> Result<StackedSsm> {
        if self.latent_size == 0 {
            return Err(LabError::config("model.latent_size", "must be >= 1"));
        }
        if self.layers == 0 {
            return Err(LabError::config("model.layers", "must be >= 1"));
        }
        let layers = match &self.init {
            InitSpec::Shared(spec) => (0..self.layers)
                .map(|l| spec.build(self.latent_size, &format!("model.init[{l}]")))
                .collect::<Result<Vec<_>>>()?,
            InitSpec::PerLayer(specs) => {
                if specs.len() != self.layers {
                    return Err(LabError::config(
                        "model.init",
                        format!("{} layer specs for {} layers", specs.len(), self.layers),
                    ));
                }
                specs
                    .iter()
                    .enumerate()
                    .map(|(l, s)| s.build(self.latent_size, &format!("model.init[{l}]")))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(StackedSsm::new(layers)?)
    }

    pub fn mask(&self) -> Result<FreezeMask> {
        let l = self.learn;
        FreezeMask::uniform(self.layers, LayerMask::new(l.a, l.b, l.c))
            .map_err(|e| LabError::config("model.learn", e.to_string()))
    }

    /// The shared transition coefficient when the model is a single layer
    /// with `A = a I`.
    pub fn shared_a(&self) -> Option<f64> {
        match (&self.init, self.layers) {
            (InitSpec::Shared(s), 1) => s.a.uniform(),
            (InitSpec::PerLayer(v), 1) => v[0].a.uniform(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub tau: f64,
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "one_usize")]
    pub record_every: usize,
    #[serde(default)]
    pub integrator: IntegratorName,
    #[serde(default)]
    pub record_response: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorName {
    #[default]
    Euler,
    Rk4,
}

impl From<IntegratorName> for Integrator {
    fn from(n: IntegratorName) -> Self {
        match n {
            IntegratorName::Euler => Integrator::Euler,
            IntegratorName::Rk4 => Integrator::Rk4,
        }
    }
}

impl ScheduleConfig {
    pub fn build(&self) -> Result<TrainSchedule> {
        let s = TrainSchedule {
            tau: self.tau,
            dt: self.dt,
            steps: self.steps,
            record_every: self.record_every,
            integrator: self.integrator.into(),
        };
        s.validate()
            .map_err(|e| LabError::config("schedule", e.to_string()))?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    /// Balanced scalar product, G-weighted statistics.
    LambdaScalar,
    /// Symmetric N-dimensional product as printed, G-weighted statistics.
    LambdaNdim,
    /// `c(t)` with fixed `A` and `B = 1`, plain statistics.
    COfT,
    /// `t(a_f)` with fixed `B = 1` and `C`, plain statistics.
    APath,
}

impl Formula {
    pub fn name(self) -> &'static str {
        match self {
            Formula::LambdaScalar => "lambda_scalar",
            Formula::LambdaNdim => "lambda_ndim",
            Formula::COfT => "c_of_t",
            Formula::APath => "a_path",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticConfig {
    pub formula: Formula,
    /// End of the time grid; defaults to the schedule's `steps * dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Fan-out over latent sizes (one curve file per value).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,
    /// Overrides for the statistics; computed from the data when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Initial product; defaults to the model's `c_0 b_0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
}

fn default_points() -> usize {
    201
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub formula: Formula,
    /// Sup-norm deviation above which the report flags a mismatch.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Resample both curves on a uniform grid with this many points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Multiplies sigma before evaluating the closed form.
    #[serde(default = "one")]
    pub sigma_scale: f64,
    /// Compare `value / limit` instead of raw values.
    #[serde(default)]
    pub normalized: bool,
    /// Repeat the comparison for each latent size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,
}

fn default_threshold() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Dotted path into the config, e.g. `model.latent_size`.
    pub param: String,
    pub values: Vec<Value>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "yes")]
    pub parallel: bool,
}

fn default_alpha() -> f64 {
    0.9
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    #[serde(default = "yes")]
    pub emit_plot_data: bool,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: None,
            formats: default_formats(),
            emit_plot_data: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            LabError::config("<document>", format!("{e}"))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Checks every cross-field constraint without running anything.
    pub fn validate(&self) -> Result<()> {
        let d = &self.data;
        if d.length == 0 {
            return Err(LabError::config("data.length", "must be >= 1"));
        }
        let needs_rng = match d.kind {
            DataKind::Noise => true,
            DataKind::Teacher => d.sinusoids.is_empty(),
            DataKind::Sinusoids => false,
        } || d.output_noise > 0.0;
        if needs_rng && d.seed.is_none() {
            return Err(LabError::config(
                "data.seed",
                "a seed is required when the data uses random numbers",
            ));
        }
        for (field, list) in [("data.sinusoids", &d.sinusoids), ("data.targets", &d.targets)] {
            if let Some(s) = list.iter().find(|s| s.bin >= d.length) {
                return Err(LabError::config(
                    field,
                    format!("bin {} out of range for length {}", s.bin, d.length),
                ));
            }
        }
        if d.kind == DataKind::Sinusoids && d.sinusoids.is_empty() {
            return Err(LabError::config("data.sinusoids", "sinusoid data needs at least one input sinusoid"));
        }
        if d.kind == DataKind::Teacher && d.teacher.is_none() {
            return Err(LabError::config("data.teacher", "teacher data needs a teacher model"));
        }
        if let Some(t) = &d.teacher {
            t.build(t.implied_size(), "data.teacher")?;
        }
        if !(d.noise_scale >= 0.0) || !(d.output_noise >= 0.0) {
            return Err(LabError::config("data.noise_scale", "noise scales must be >= 0"));
        }
        if let Some(a) = d.unit_eta_at {
            if !(a.abs() < 1.0) {
                return Err(LabError::config("data.unit_eta_at", "|a| must be below 1"));
            }
        }
        self.model.build()?;
        self.model.mask()?;
        self.schedule.build()?;
        if let Some(a) = &self.analytic {
            if a.points < 2 {
                return Err(LabError::config("analytic.points", "need at least 2 grid points"));
            }
            if a.n_values.as_ref().is_some_and(|v| v.is_empty() || v.contains(&0)) {
                return Err(LabError::config("analytic.n_values", "values must be >= 1"));
            }
        }
        if let Some(c) = &self.compare {
            if c.grid_points.is_some_and(|g| g < 2) {
                return Err(LabError::config("compare.grid_points", "need at least 2 grid points"));
            }
            if c.n_values.as_ref().is_some_and(|v| v.is_empty() || v.contains(&0)) {
                return Err(LabError::config("compare.n_values", "values must be >= 1"));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(LabError::config("sweep.values", "must not be empty"));
            }
            if !(s.alpha > 0.0 && s.alpha < 1.0) {
                return Err(LabError::config("sweep.alpha", "must lie in (0, 1)"));
            }
            // Check the path resolves.
            let base = Self {
                sweep: None,
                ..self.clone()
            };
            base.with_override(&s.param, s.values[0].clone())?;
        }
        Ok(())
    }

    /// Copy of this config with the value at a dotted path replaced.
    pub fn with_override(&self, path: &str, value: Value) -> Result<Self> {
        let mut doc = serde_json::to_value(self).expect("config serializes");
        let mut slot = &mut doc;
        for key in path.split('.') {
            slot = match slot {
                // Optional sections and fields are absent until set.
                Value::Object(map) => map.entry(key).or_insert(Value::Null),
                Value::Array(items) => {
                    let idx: usize = key
                        .parse()
                        .map_err(|_| LabError::config(path, format!("`{key}` is not an index")))?;
                    items
                        .get_mut(idx)
                        .ok_or_else(|| LabError::config(path, format!("index {idx} out of range")))?
                }
                Value::Null => {
                    *slot = Value::Object(Default::default());
                    match slot {
                        Value::Object(map) => map.entry(key).or_insert(Value::Null),
                        _ => unreachable!(),
                    }
                }
                _ => return Err(LabError::config(path, format!("cannot descend into `{key}`"))),
            };
        }
        *slot = value;
        let cfg: Self = serde_json::from_value(doc)
            .map_err(|e| LabError::config(path, format!("override does not apply: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Hex SHA-256 of the canonical JSON of everything but `outputs`.
    pub fn hash(&self) -> String {
        let mut doc = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(map) = &mut doc {
            map.remove("outputs");
        }
        let canonical = canonicalize(&doc);
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Compact JSON with object keys in sorted order.
pub fn canonicalize(value: &Value) -> String {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let body: Vec<String> = keys
                .into_iter()
                .map(|k| format!("{}:{}", Value::String(k.clone()), canonicalize(&map[k])))
                .collect();
            format!("{{{}}}", body.join(","))
        }
        Value::Array(items) => {
            let body: Vec<String> = items.iter().map(canonicalize).collect();
            format!("[{}]", body.join(","))
        }
        other => other.to_string(),
    }
}
