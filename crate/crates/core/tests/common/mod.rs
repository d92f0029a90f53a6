#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssm_dynamics::{Complex64, ComplexSequence, DiagonalSsm, StackedSsm};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Quadratic-time DFT straight from the definition.
pub fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * t) as f64 / n as f64))
                .sum()
        })
        .collect()
}

pub fn random_complex(rng: &mut impl Rng, len: usize) -> ComplexSequence {
    ComplexSequence::new(
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
    .unwrap()
}

pub fn random_real(rng: &mut impl Rng, len: usize) -> ComplexSequence {
    let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ComplexSequence::from_real(&v).unwrap()
}

pub fn random_layer(rng: &mut impl Rng, n: usize, max_a: f64) -> DiagonalSsm {
    DiagonalSsm::new(
        (0..n).map(|_| rng.gen_range(-max_a..max_a)).collect(),
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

pub fn random_stack(rng: &mut impl Rng, depth: usize, max_n: usize, max_a: f64) -> StackedSsm {
    StackedSsm::new(
        (0..depth)
            .map(|_| {
                let n = rng.gen_range(1..=max_n);
                random_layer(rng, n, max_a)
            })
            .collect(),
    )
    .unwrap()
}

/// `|x - y| / max(|x|, |y|, 1)`.
pub fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1.0)
}

pub fn max_abs_diff(x: &ComplexSequence, y: &ComplexSequence) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// Real random input spectrum scaled so that the G-weighted `eta` at `a` is
/// 1, and the output of an `N = 1` teacher with the same `a` and gain
/// `c * b = gain`. Then `sigma = gain` and `sigma / eta = gain`.
pub fn teacher_data(seed: u64, len: usize, a: f64, gain: f64) -> (ComplexSequence, ComplexSequence) {
    use ssm_dynamics::suffstats::{aggregate, Weighting};
    use ssm_dynamics::FrequencyResponse;
    let mut r = rng(seed);
    let u = ssm_dynamics::spectrum::dft(&random_real(&mut r, len));
    let eta = aggregate(&u, &u, Weighting::GWeighted { a }).unwrap().eta.re;
    let u = u.scale(1.0 / eta.sqrt());
    let teacher = DiagonalSsm::scalar(a, 1.0, gain).unwrap();
    let y = teacher.simulate_freq(&u);
    (u, y)
}
