use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::{inner, norm, ComplexMatrix};
use super::rng::SeededRng;
use crate::error::{Error, Result};

/// Hermitian tolerance accepted by [`power_iteration`], relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-10;

const START_VECTOR_SEED: u64 = 0x005e_ed0f_9e1f;

/// Dominant eigenpair of a Hermitian matrix.
///
/// Iterates `v ← Mv / ‖Mv‖` from a fixed pseudo-random start vector and stops
/// once two successive Rayleigh quotients differ by less than `tol`. The
/// returned eigenvector has unit norm; its global phase is arbitrary.
pub fn power_iteration(m: &ComplexMatrix, iters: usize, tol: f64) -> Result<(f64, Vec<Complex64>)> {
    if m.rows() != m.cols() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let scale = m.as_slice().iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let deviation = m.hermitian_deviation()?;
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(power_iteration_with(m.rows(), iters, tol, |v| {
        m.matvec(v).expect("square operand")
    }))
}

/// Power iteration against an implicit Hermitian operator of dimension `n`.
pub(crate) fn power_iteration_with(
    n: usize,
    iters: usize,
    tol: f64,
    mut apply: impl FnMut(&[Complex64]) -> Vec<Complex64>,
) -> (f64, Vec<Complex64>) {
    let mut rng = SeededRng::new(START_VECTOR_SEED);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.standard_normal(), rng.standard_normal()))
        .collect();
    let v_norm = norm(&v);
    v.iter_mut().for_each(|z| *z /= v_norm);

    let mut previous = f64::NAN;
    for _ in 0..iters.max(1) {
        let w = apply(&v);
        let rayleigh = inner(&v, &w).re;
        let w_norm = norm(&w);
        if w_norm == 0.0 {
            return (0.0, v);
        }
        if (rayleigh - previous).abs() < tol {
            return (rayleigh, v);
        }
        previous = rayleigh;
        v = w.into_iter().map(|z| z / w_norm).collect();
    }
    let rayleigh = inner(&v, &apply(&v)).re;
    (rayleigh, v)
}

/// All eigenvalues of a Hermitian matrix, in descending order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.rows() != m.cols() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let n = m.rows();
    let dense = DMatrix::from_row_slice(n, n, m.as_slice());
    let mut values: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Singular values of `m` in descending order, via the eigenvalues of the
/// smaller of `M^H M` and `M M^H`.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let gram = if m.rows() >= m.cols() {
        m.hermitian_transpose().matmul(m)?
    } else {
        m.matmul(&m.hermitian_transpose())?
    };
    Ok(hermitian_eigenvalues(&gram)?
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect())
}

/// Number of singular values strictly above `rel_tol × σ_max`.
pub fn numerical_rank(m: &ComplexMatrix, rel_tol: f64) -> Result<usize> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }
    let sv = singular_values(m)?;
    let threshold = rel_tol * sv[0];
    Ok(sv.iter().filter(|&&s| s > threshold).count())
}
