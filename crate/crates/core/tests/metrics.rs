use proptest::prelude::*;

use deepinit::metrics::{aligned_relative_error, psnr, sign_align, ssim, QualityScore};
use deepinit::numerics::SeededRng;

fn image(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    (0..n).map(|_| rng.uniform()).collect()
}

fn noisy(x: &[f64], seed: u64, amplitude: f64) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    x.iter().map(|v| v + amplitude * rng.standard_normal()).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn psnr_falls_as_noise_grows() {
    let x = image(61, 28 * 28);
    let values: Vec<f64> = [0.01, 0.05, 0.1, 0.2]
        .iter()
        .map(|&a| psnr(&noisy(&x, 62, a), &x, 1.0).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[0] > w[1]), "{values:?}");
}

#[test]
fn ssim_falls_as_noise_grows() {
    let x = image(63, 28 * 28);
    let values: Vec<f64> = [0.01, 0.05, 0.1, 0.2]
        .iter()
        .map(|&a| ssim(&noisy(&x, 64, a), &x, 28, 28).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[0] > w[1]), "{values:?}");
}

#[test]
fn score_is_sign_blind() {
    let x = image(65, 100);
    let y = noisy(&x, 66, 0.05);
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    assert_eq!(QualityScore::evaluate(&y, &x, 10, 10).unwrap(), QualityScore::evaluate(&neg, &x, 10, 10).unwrap());
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, usize)> {
    (4usize..20, any::<u64>()).prop_map(|(side, seed)| {
        let x = image(seed, side * side);
        let y = noisy(&x, seed ^ 0xabc, 0.1);
        (x, y, side)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_are_symmetric((x, y, side) in pair()) {
        prop_assert_eq!(psnr(&x, &y, 1.0).unwrap(), psnr(&y, &x, 1.0).unwrap());
        let a = ssim(&x, &y, side, side).unwrap();
        let b = ssim(&y, &x, side, side).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn ssim_of_identical_images_is_one((x, _, side) in pair()) {
        prop_assert!((ssim(&x, &x, side, side).unwrap() - 1.0).abs() < 1e-12);
        prop_assert_eq!(psnr(&x, &x, 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn ssim_is_bounded((x, y, side) in pair()) {
        let s = ssim(&x, &y, side, side).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
    }

    #[test]
    fn sign_align_is_idempotent_and_optimal((x, y, _) in pair(), flip in any::<bool>()) {
        let y: Vec<f64> = if flip { y.iter().map(|v| -v).collect() } else { y };
        let once = sign_align(&y, &x).unwrap();
        prop_assert_eq!(&sign_align(&once, &x).unwrap(), &once);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let best = dist(&y, &x).min(dist(&neg, &x));
        prop_assert!((dist(&once, &x) - best).abs() <= 1e-12 * best.max(1.0));
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((aligned_relative_error(&y, &x).unwrap() - best / norm).abs() < 1e-12);
    }
}
