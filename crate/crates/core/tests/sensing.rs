use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use deepinit::numerics::{gaussian_complex, inner, numerical_rank, ComplexMatrix, SeededRng};
use deepinit::sensing::{
    build_diffraction_matrix, effective_rows, generate_masks, intensity_forward, physical_forward,
    DiffractionSpec, SensingKind, SensingOperator, MODULATOR_TO_SCENE_M, SCENE_TO_DETECTOR_M,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_real(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.standard_normal()).collect()
}

fn fresnel_entry(spec: &DiffractionSpec, k: usize, j: usize) -> Complex64 {
    let side = spec.grid_side;
    let (yk, xk) = ((k / side) as f64, (k % side) as f64);
    let (yj, xj) = ((j / side) as f64, (j % side) as f64);
    let d2 = spec.pixel_pitch * spec.pixel_pitch * ((xk - xj).powi(2) + (yk - yj).powi(2));
    let ld = spec.wavelength * spec.distance;
    let phase = 2.0 * PI * spec.distance / spec.wavelength + PI * d2 / ld;
    Complex64::from_polar(spec.pixel_pitch * spec.pixel_pitch / ld, phase) / c(0.0, 1.0)
}

#[test]
fn intensity_forward_matches_scalar_loop() {
    let mut rng = SeededRng::new(21);
    let a = SensingOperator::gaussian(&mut rng, 30, 12).unwrap();
    let x = random_real(&mut rng, 12);
    let y = intensity_forward(&a, &x).unwrap();
    for i in 0..30 {
        let mut re = 0.0;
        let mut im = 0.0;
        for j in 0..12 {
            re += a.row(i)[j].re * x[j];
            im += a.row(i)[j].im * x[j];
        }
        let expected = re * re + im * im;
        assert!((y[i] - expected).abs() <= 1e-12 * expected.max(1.0));
    }
}

#[test]
fn diffraction_matches_fresnel_formula() {
    for d in [0.00125, 0.01, 0.175] {
        let spec = DiffractionSpec::thz(d).with_grid_side(5);
        let m = build_diffraction_matrix(&spec).unwrap();
        for k in 0..25 {
            for j in 0..25 {
                let e = fresnel_entry(&spec, k, j);
                assert!((m[(k, j)] - e).norm() <= 1e-9 * e.norm(), "d={d} ({k},{j})");
            }
        }
    }
}

#[test]
fn diffraction_adjoint_identity() {
    let m = build_diffraction_matrix(&DiffractionSpec::thz(0.01).with_grid_side(12)).unwrap();
    let mut rng = SeededRng::new(22);
    for _ in 0..10 {
        let x: Vec<Complex64> = (0..144).map(|_| c(rng.standard_normal(), rng.standard_normal())).collect();
        let y: Vec<Complex64> = (0..144).map(|_| c(rng.standard_normal(), rng.standard_normal())).collect();
        let lhs = inner(&y, &m.matvec(&x).unwrap());
        let rhs = inner(&m.adjoint_matvec(&y).unwrap(), &x);
        assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }
}

#[test]
fn diffraction_rank_shrinks_with_distance() {
    let ranks: Vec<usize> = [0.001, 0.01, 0.02]
        .iter()
        .map(|&d| {
            let m = build_diffraction_matrix(&DiffractionSpec::thz(d).with_grid_side(14)).unwrap();
            numerical_rank(&m, 1e-6).unwrap()
        })
        .collect();
    assert_eq!(ranks[0], 196);
    assert!(ranks[0] > ranks[1] && ranks[1] > ranks[2]);
}

#[test]
fn mask_density() {
    let masks = generate_masks(&mut SeededRng::new(23), 1000, 784, 0.5).unwrap();
    let ones: usize = masks.iter().map(|m| m.iter().filter(|&&b| b == 1).count()).sum();
    let frac = ones as f64 / (1000.0 * 784.0);
    assert!((0.48..=0.52).contains(&frac), "{frac}");
    assert!(masks.iter().flatten().all(|&b| b <= 1));
}

#[test]
fn effective_rows_match_physical_chain() {
    let side = 6;
    let n = side * side;
    let d_ms = build_diffraction_matrix(&DiffractionSpec::thz(MODULATOR_TO_SCENE_M).with_grid_side(side)).unwrap();
    let d_sd = build_diffraction_matrix(&DiffractionSpec::thz(SCENE_TO_DETECTOR_M).with_grid_side(side)).unwrap();
    let mut rng = SeededRng::new(24);
    let masks = generate_masks(&mut rng, 100, n, 0.5).unwrap();
    let x: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let a = effective_rows(&masks, &d_ms, &d_sd).unwrap();
    let y = intensity_forward(&a, &x).unwrap();
    let y_phys = physical_forward(&masks, &d_ms, &d_sd, &x).unwrap();
    for (i, mask) in masks.iter().enumerate() {
        // |Σ_k (D_sd diag(x) D_ms a)_k|² by explicit loops.
        let mut at_scene = vec![c(0.0, 0.0); n];
        for (p, s) in at_scene.iter_mut().enumerate() {
            for q in 0..n {
                *s += d_ms[(p, q)] * f64::from(mask[q]);
            }
        }
        let mut total = c(0.0, 0.0);
        for k in 0..n {
            for p in 0..n {
                total += d_sd[(k, p)] * x[p] * at_scene[p];
            }
        }
        let expected = total.norm_sqr();
        assert!((y[i] - expected).abs() <= 1e-10 * expected.max(1e-300), "row {i}");
        assert!((y_phys[i] - expected).abs() <= 1e-10 * expected.max(1e-300), "row {i}");
    }
}

#[test]
fn physical_forward_of_dark_scene() {
    let id = ComplexMatrix::identity(4);
    let masks = generate_masks(&mut SeededRng::new(25), 5, 4, 0.5).unwrap();
    assert_eq!(physical_forward(&masks, &id, &id, &[0.0; 4]).unwrap(), vec![0.0; 5]);
}

#[test]
fn unit_energy_keeps_intensity_ratios() {
    let d = build_diffraction_matrix(&DiffractionSpec::thz(0.01).with_grid_side(4)).unwrap();
    let masks = generate_masks(&mut SeededRng::new(26), 20, 16, 0.5).unwrap();
    let a = effective_rows(&masks, &d, &d).unwrap();
    let b = a.clone().unit_energy().unwrap();
    let energy: f64 = b.row_norms_sq().iter().sum::<f64>() / (20.0 * 16.0);
    assert!((energy - 1.0).abs() < 1e-12);
    let x = random_real(&mut SeededRng::new(27), 16);
    let ya = intensity_forward(&a, &x).unwrap();
    let yb = intensity_forward(&b, &x).unwrap();
    let ratio = yb[0] / ya[0];
    for (p, q) in ya.iter().zip(&yb) {
        assert!((q / p - ratio).abs() < 1e-9 * ratio);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn intensities_ignore_global_sign(seed in any::<u64>(), m in 1usize..20, n in 1usize..10) {
        let mut rng = SeededRng::new(seed);
        let a = SensingOperator::gaussian(&mut rng, m, n).unwrap();
        let x = random_real(&mut rng, n);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(intensity_forward(&a, &x).unwrap(), intensity_forward(&a, &neg).unwrap());
    }

    #[test]
    fn intensities_ignore_row_phases(seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let base = gaussian_complex(&mut rng, 8, 5);
        let phases: Vec<Complex64> = (0..8).map(|_| Complex64::from_polar(1.0, rng.uniform_range(0.0, 2.0 * PI))).collect();
        let rotated = ComplexMatrix::from_fn(8, 5, |r, col| phases[r] * base[(r, col)]).unwrap();
        let a = SensingOperator::new(base, SensingKind::Gaussian).unwrap();
        let b = SensingOperator::new(rotated, SensingKind::Gaussian).unwrap();
        let x = random_real(&mut rng, 5);
        let ya = intensity_forward(&a, &x).unwrap();
        let yb = intensity_forward(&b, &x).unwrap();
        for (p, q) in ya.iter().zip(&yb) {
            prop_assert!((p - q).abs() <= 1e-12 * p.max(1.0));
        }
    }

    #[test]
    fn mask_prefix_is_stable(seed in any::<u64>(), count in 1usize..20) {
        let short = generate_masks(&mut SeededRng::new(seed), count, 9, 0.5).unwrap();
        let long = generate_masks(&mut SeededRng::new(seed), 2 * count, 9, 0.5).unwrap();
        for i in 0..count {
            prop_assert_eq!(short.mask(i), long.mask(i));
        }
    }

    #[test]
    fn diffraction_is_symmetric(side in 1usize..6, d in 0.001f64..0.2) {
        let m = build_diffraction_matrix(&DiffractionSpec::thz(d).with_grid_side(side)).unwrap();
        for k in 0..side * side {
            for j in 0..side * side {
                prop_assert_eq!(m[(k, j)], m[(j, k)]);
            }
        }
    }
}
