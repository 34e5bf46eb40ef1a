use proptest::prelude::*;

use deepinit::classical::{
    intensity_loss, intensity_loss_gradient, randomized_kaczmarz, spectral_init,
    truncated_wirtinger_flow, wirtinger_flow, ClassicalConfig,
};
use deepinit::numerics::{ComplexMatrix, SeededRng};
use deepinit::sensing::{intensity_forward, SensingKind, SensingOperator};

fn problem(seed: u64, m: usize, n: usize) -> (SensingOperator, Vec<f64>, Vec<f64>) {
    let mut rng = SeededRng::new(seed);
    let a = SensingOperator::gaussian(&mut rng, m, n).unwrap();
    let x: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    let y = intensity_forward(&a, &x).unwrap();
    (a, x, y)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn sign_free_error(x_hat: &[f64], x: &[f64]) -> f64 {
    let plus: f64 = x_hat.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
    let minus: f64 = x_hat.iter().zip(x).map(|(a, b)| (a + b).powi(2)).sum();
    plus.min(minus).sqrt() / dot(x, x).sqrt()
}

fn recoveries(twf: bool, m: usize, n: usize, seeds: std::ops::Range<u64>) -> usize {
    seeds
        .filter(|&s| {
            let (a, x, y) = problem(s, m, n);
            let cfg = ClassicalConfig::default().with_k_max(500);
            let r = if twf {
                truncated_wirtinger_flow(&a, &y, &cfg)
            } else {
                wirtinger_flow(&a, &y, &cfg)
            }
            .unwrap();
            sign_free_error(&r.reconstruction, &x) < 1e-3
        })
        .count()
}

#[test]
fn spectral_estimate_correlates() {
    let n = 64;
    let mean: f64 = (0..20u64)
        .map(|s| {
            let (a, x, y) = problem(100 + s, 8 * n, n);
            let x0 = spectral_init(&a, &y).unwrap();
            dot(&x0, &x).abs() / (dot(&x0, &x0) * dot(&x, &x)).sqrt()
        })
        .sum::<f64>()
        / 20.0;
    assert!(mean > 0.8, "mean correlation {mean}");
}

#[test]
fn spectral_is_deterministic() {
    let (a, _, y) = problem(5, 64, 8);
    assert_eq!(spectral_init(&a, &y).unwrap(), spectral_init(&a, &y).unwrap());
}

#[test]
fn wirtinger_flow_recovers() {
    let hits = recoveries(false, 256, 32, 200..220);
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn truncation_does_not_hurt_recovery() {
    let wf = recoveries(false, 192, 32, 300..320);
    let twf = recoveries(true, 192, 32, 300..320);
    assert!(twf >= wf, "twf {twf} < wf {wf}");
}

#[test]
fn loss_gradient_matches_finite_differences() {
    let (a, _, y) = problem(7, 40, 6);
    let mut rng = SeededRng::new(8);
    for _ in 0..20 {
        let x: Vec<f64> = (0..6).map(|_| rng.standard_normal()).collect();
        let (loss, grad) = intensity_loss_gradient(&a, &y, &x).unwrap();
        assert_eq!(loss, intensity_loss(&a, &y, &x).unwrap());
        for j in 0..6 {
            let h = 1e-6;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fd = (intensity_loss(&a, &y, &xp).unwrap() - intensity_loss(&a, &y, &xm).unwrap()) / (2.0 * h);
            assert!((fd - grad[j]).abs() <= 1e-5 * grad[j].abs().max(1.0), "{fd} vs {}", grad[j]);
        }
    }
}

#[test]
fn kaczmarz_ignores_row_scaling() {
    let (a, _, y) = problem(9, 48, 8);
    let mut rng = SeededRng::new(10);
    let scales: Vec<f64> = (0..48).map(|_| rng.uniform_range(0.2, 5.0)).collect();
    let scaled = ComplexMatrix::from_fn(48, 8, |r, c| a.matrix()[(r, c)] * scales[r]).unwrap();
    let b = SensingOperator::new(scaled, SensingKind::Gaussian).unwrap();
    let yb: Vec<f64> = y.iter().zip(&scales).map(|(v, s)| v * s * s).collect();
    let x0 = vec![0.3; 8];
    let ra = randomized_kaczmarz(&a, &y, &x0, 2000, &mut SeededRng::new(1)).unwrap();
    let rb = randomized_kaczmarz(&b, &yb, &x0, 2000, &mut SeededRng::new(1)).unwrap();
    for (p, q) in ra.reconstruction.iter().zip(&rb.reconstruction) {
        assert!((p - q).abs() < 1e-8 * p.abs().max(1.0), "{p} vs {q}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn intensity_loss_is_sign_invariant(seed in any::<u64>()) {
        let (a, _, y) = problem(seed, 20, 5);
        let mut rng = SeededRng::new(seed ^ 1);
        let x: Vec<f64> = (0..5).map(|_| rng.standard_normal()).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(intensity_loss(&a, &y, &x).unwrap(), intensity_loss(&a, &y, &neg).unwrap());
    }

    #[test]
    fn kaczmarz_is_reproducible(seed in any::<u64>()) {
        let (a, _, y) = problem(seed, 24, 4);
        let x0 = [0.1, -0.2, 0.3, 0.4];
        let r1 = randomized_kaczmarz(&a, &y, &x0, 300, &mut SeededRng::new(seed)).unwrap();
        let r2 = randomized_kaczmarz(&a, &y, &x0, 300, &mut SeededRng::new(seed)).unwrap();
        prop_assert_eq!(r1.reconstruction, r2.reconstruction);
        prop_assert_eq!(r1.loss_trace, r2.loss_trace);
    }
}
