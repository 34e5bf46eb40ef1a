//! Dense complex linear algebra, seeded randomness and spectral utilities.

mod eigen;
mod matrix;
mod rng;

pub use eigen::{
    hermitian_eigenvalues, numerical_rank, power_iteration, singular_values, HERMITIAN_TOL,
};
pub(crate) use eigen::power_iteration_with;
pub use matrix::{inner, norm, real_norm, real_projection, ComplexMatrix};
pub use rng::{derive_seed, splitmix64, SeededRng, RNG_VERSION};

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

/// `rows × cols` matrix of i.i.d. circular complex Gaussians with
/// real and imaginary parts each `N(0, 1/2)`, so `E|a_ij|² = 1`.
/// Entries are drawn in row-major order, real part first.
pub fn gaussian_complex(rng: &mut SeededRng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols)
        .map(|_| {
            let re = rng.standard_normal() * FRAC_1_SQRT_2;
            let im = rng.standard_normal() * FRAC_1_SQRT_2;
            Complex64::new(re, im)
        })
        .collect();
    ComplexMatrix::new(rows, cols, data).expect("gaussian entries are finite")
}
