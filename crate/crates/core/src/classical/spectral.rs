use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::numerics::{power_iteration_with, real_projection};
use crate::sensing::SensingOperator;

pub const SPECTRAL_POWER_ITERS: usize = 200;
pub const SPECTRAL_POWER_TOL: f64 = 1e-8;

/// Spectral estimate of a real signal from intensities.
///
/// Takes the dominant eigenvector `v` of `Y = (1/m) Σ_i y_i a_i a_i^H`
/// (applied implicitly as `(1/m) A^H (y ⊙ Av)`), rotates it to its most-real
/// global phase, keeps the real part and scales by `sqrt(mean(y))`.
pub fn spectral_init(a: &SensingOperator, y: &[f64]) -> Result<Vec<f64>> {
    check_len("measurements", a.rows(), y.len())?;
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroMeasurements);
    }
    let m = a.rows() as f64;
    let matrix = a.matrix();
    let (_, v) = power_iteration_with(a.cols(), SPECTRAL_POWER_ITERS, SPECTRAL_POWER_TOL, |v| {
        let weighted: Vec<Complex64> = matrix
            .matvec(v)
            .expect("operand sized to operator")
            .into_iter()
            .zip(y)
            .map(|(u, &yi)| u * (yi / m))
            .collect();
        matrix.adjoint_matvec(&weighted).expect("operand sized to operator")
    });
    let beta = (y.iter().sum::<f64>() / m).sqrt();
    Ok(real_projection(&v).into_iter().map(|t| beta * t).collect())
}
