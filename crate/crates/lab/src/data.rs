//! Synthetic datasets.
//!
//! Signals are generated as real time series and then transformed, so every
//! spectrum is conjugate symmetric. Each random draw uses its own ChaCha8
//! stream from the configured seed: the input never depends on whether
//! output noise is enabled, and vice versa.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use ssm_dynamics::spectrum::{dft, idft};
use ssm_dynamics::suffstats::{aggregate, Weighting};
use ssm_dynamics::{ComplexSequence, FrequencyResponse};

use crate::config::{DataConfig, DataKind, Sinusoid};
use crate::error::{LabError, Result};

const INPUT_STREAM: u64 = 0;
const OUTPUT_STREAM: u64 = 1;
const OUTPUT_NOISE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub u_time: Vec<f64>,
    pub y_time: Vec<f64>,
    pub u: ComplexSequence,
    pub y: ComplexSequence,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.u_time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_time.is_empty()
    }

    fn from_time(u_time: Vec<f64>, y_time: Vec<f64>) -> Result<Self> {
        let u = dft(&ComplexSequence::from_real(&u_time)?);
        let y = dft(&ComplexSequence::from_real(&y_time)?);
        Ok(Self {
            u_time,
            y_time,
            u,
            y,
        })
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn white_noise(seed: u64, id: u64, len: usize, std: f64) -> Result<Vec<f64>> {
    let dist = Normal::new(0.0, std).map_err(|e| LabError::config("data.noise_scale", e.to_string()))?;
    let mut rng = stream(seed, id);
    Ok((0..len).map(|_| dist.sample(&mut rng)).collect())
}

fn sinusoid_sum(parts: &[Sinusoid], len: usize) -> Vec<f64> {
    let w = std::f64::consts::TAU / len as f64;
    (0..len)
        .map(|t| {
            parts
                .iter()
                .map(|s| s.amplitude * (w * (s.bin * t) as f64 + s.phase).cos())
                .sum()
        })
        .collect()
}

fn require_seed(cfg: &DataConfig) -> Result<u64> {
    cfg.seed
        .ok_or_else(|| LabError::config("data.seed", "a seed is required for random data"))
}

fn input_signal(cfg: &DataConfig) -> Result<Vec<f64>> {
    if cfg.sinusoids.is_empty() {
        white_noise(require_seed(cfg)?, INPUT_STREAM, cfg.length, cfg.noise_scale)
    } else {
        Ok(sinusoid_sum(&cfg.sinusoids, cfg.length))
    }
}

fn teacher_output(cfg: &DataConfig, u_time: &[f64]) -> Result<Vec<f64>> {
    let spec = cfg
        .teacher
        .as_ref()
        .ok_or_else(|| LabError::config("data.teacher", "teacher model missing"))?;
    let teacher = spec.build(spec.implied_size(), "data.teacher")?;
    let u = dft(&ComplexSequence::from_real(u_time)?);
    let y = idft(&teacher.simulate_freq(&u));
    Ok(y.iter().map(|z| z.re).collect())
}

pub fn generate(cfg: &DataConfig) -> Result<Dataset> {
    let len = cfg.length;
    if len == 0 {
        return Err(LabError::config("data.length", "must be >= 1"));
    }
    let u_time = input_signal(cfg)?;
    let mut y_time = match cfg.kind {
        DataKind::Teacher => teacher_output(cfg, &u_time)?,
        DataKind::Sinusoids if cfg.targets.is_empty() => u_time.clone(),
        DataKind::Sinusoids => sinusoid_sum(&cfg.targets, len),
        DataKind::Noise if cfg.teacher.is_some() => teacher_output(cfg, &u_time)?,
        DataKind::Noise => white_noise(require_seed(cfg)?, OUTPUT_STREAM, len, cfg.noise_scale)?,
    };
    if cfg.output_noise > 0.0 {
        let noise = white_noise(require_seed(cfg)?, OUTPUT_NOISE_STREAM, len, cfg.output_noise)?;
        y_time.iter_mut().zip(noise).for_each(|(y, n)| *y += n);
    }
    let mut data = Dataset::from_time(u_time, y_time)?;
    if let Some(a) = cfg.unit_eta_at {
        let eta = aggregate(&data.u, &data.y, Weighting::GWeighted { a })?.eta.re;
        if !(eta > 0.0) {
            return Err(LabError::config(
                "data.unit_eta_at",
                "the input has no energy, cannot normalize",
            ));
        }
        let s = eta.sqrt().recip();
        let scale = |v: Vec<f64>| v.into_iter().map(|x| x * s).collect();
        data = Dataset::from_time(scale(data.u_time), scale(data.y_time))?;
    }
    Ok(data)
}
