mod common;

use common::{random_layer, random_real, random_stack, rng};
use rand::Rng;
use ssm_dynamics::spectrum::{dft, idft};
use ssm_dynamics::{Complex64, ComplexSequence, DiagonalSsm, FrequencyResponse, StackedSsm};

/// Smallest `P >= L` with enough tail decay that circular wrap-around of the
/// kernel is below `1e-12`.
fn padded_length(len: usize, rho: f64) -> usize {
    if rho == 0.0 {
        return len;
    }
    len + (1e-12f64.ln() / rho.ln()).ceil() as usize
}

fn pad(u: &ComplexSequence, len: usize) -> ComplexSequence {
    let mut v = u.values().to_vec();
    v.resize(len, Complex64::new(0.0, 0.0));
    ComplexSequence::new(v).unwrap()
}

fn circular_vs_linear<M: FrequencyResponse>(
    model: &M,
    time: impl Fn(&ComplexSequence) -> ComplexSequence,
    u: &ComplexSequence,
    rho: f64,
) -> f64 {
    let p = padded_length(u.len(), rho);
    assert!(rho.powi(p as i32) <= 1e-12);
    let padded = pad(u, p);
    let y_time = time(&padded);
    let y_freq = idft(&model.simulate_freq(&dft(&padded)));
    (0..u.len())
        .map(|t| (y_time[t] - y_freq[t]).norm())
        .fold(0.0, f64::max)
}

#[test]
fn padded_time_and_frequency_simulation_agree() {
    let mut r = rng(21);
    for trial in 0..40 {
        let n = r.gen_range(1..=4);
        let max_a = if trial % 4 == 0 { 0.9 } else { r.gen_range(0.05..0.9) };
        let mut layer = random_layer(&mut r, n, max_a);
        if trial % 4 == 0 {
            // pin the radius at the acceptance bound
            let mut a = layer.a().to_vec();
            a[0] = 0.9;
            layer = DiagonalSsm::new(a, layer.b().to_vec(), layer.c().to_vec()).unwrap();
        }
        let len = r.gen_range(4..=64);
        let u = random_real(&mut r, len);
        let err = circular_vs_linear(&layer, |x| layer.simulate_time(x), &u, layer.spectral_radius());
        assert!(err <= 1e-8, "trial {trial}: {err}");
    }
}

#[test]
fn stacked_padded_equivalence() {
    let mut r = rng(22);
    for _ in 0..10 {
        let depth = r.gen_range(1..=3);
        let model = random_stack(&mut r, depth, 3, 0.9);
        // The composite kernel decays like (P * rho^P) for repeated poles.
        let rho = model
            .layers()
            .iter()
            .map(DiagonalSsm::spectral_radius)
            .fold(0.0, f64::max);
        let u = random_real(&mut r, 32);
        let p = padded_length(u.len(), rho) * 2;
        let padded = pad(&u, p);
        let y_time = model.simulate_time(&padded);
        let y_freq = idft(&model.simulate_freq(&dft(&padded)));
        for t in 0..u.len() {
            assert!((y_time[t] - y_freq[t]).norm() <= 1e-8);
        }
    }
}

#[test]
fn kernel_convolution_oracle() {
    let mut r = rng(23);
    let model = random_layer(&mut r, 3, 0.95);
    let u = random_real(&mut r, 32);
    let kernel: Vec<f64> = (0..32)
        .map(|m| {
            (0..3)
                .map(|i| model.c()[i] * model.a()[i].powi(m) * model.b()[i])
                .sum()
        })
        .collect();
    let y = model.simulate_time(&u);
    for t in 0..32 {
        let direct: Complex64 = (0..=t).map(|m| u[t - m] * kernel[m]).sum();
        assert!((y[t] - direct).norm() <= 1e-10);
    }
}

#[test]
fn impulse_response_from_simulation() {
    let mut r = rng(24);
    let model = random_layer(&mut r, 4, 0.9);
    let mut impulse = vec![0.0; 40];
    impulse[0] = 1.0;
    let y = model.simulate_time(&ComplexSequence::from_real(&impulse).unwrap());
    let h = model.impulse_response(40);
    for m in 0..40 {
        let oracle: f64 = (0..4)
            .map(|i| model.c()[i] * model.a()[i].powi(m as i32) * model.b()[i])
            .sum();
        assert!((y[m].re - oracle).abs() <= 1e-12);
        assert!((h[m] - oracle).abs() <= 1e-12);
        assert_eq!(y[m].im, 0.0);
    }
}

#[test]
fn composite_is_product_and_permutation_invariant() {
    let mut r = rng(25);
    for _ in 0..20 {
        let model = random_stack(&mut r, 3, 4, 0.9);
        let len = r.gen_range(1..=16);
        let mut reversed = model.layers().to_vec();
        reversed.reverse();
        let reversed = StackedSsm::new(reversed).unwrap();
        let mut rotated = model.layers().to_vec();
        rotated.rotate_left(1);
        let rotated = StackedSsm::new(rotated).unwrap();
        for k in 0..len {
            let manual = model.layers()[0].frequency_response(k, len)
                * model.layers()[1].frequency_response(k, len)
                * model.layers()[2].frequency_response(k, len);
            let h = model.composite_response(k, len);
            assert!((h - manual).norm() <= 1e-12 * manual.norm().max(1.0));
            assert!((h - reversed.composite_response(k, len)).norm() <= 1e-12 * h.norm().max(1.0));
            assert!((h - rotated.composite_response(k, len)).norm() <= 1e-12 * h.norm().max(1.0));
        }
    }
}

#[test]
fn real_signal_through_real_model_keeps_conjugate_symmetry() {
    let mut r = rng(26);
    let model = random_layer(&mut r, 3, 0.8);
    let u = dft(&random_real(&mut r, 17));
    let y = model.simulate_freq(&u);
    assert!(y.conjugate_symmetry_defect() <= 1e-12);
    let back = idft(&y);
    assert!(back.iter().all(|v| v.im.abs() <= 1e-12));
}
