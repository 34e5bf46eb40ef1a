//! Generative priors: a dense feed-forward generator, total variation,
//! deep regularized gradient descent (DRGD) and DeepInit.

mod drgd;
mod net;
mod tv;
mod weights;

use std::f64::consts::PI;

pub use drgd::{
    deepinit, drgd, drgd_objective_gradient, DrgdConfig, LatentVector, Optimizer, DRGD_I_MAX,
    DRGD_REG_WEIGHT, DRGD_STEP_SIZE, MAX_STEP_HALVINGS,
};
pub use net::{Activation, DenseLayer, GeneratorNet};
pub use tv::{tv_norm, tv_subgradient};

/// Latent dimension of [`synthetic_generator`].
pub const SYNTHETIC_LATENT_DIM: usize = 8;
const SYNTHETIC_GAIN: f64 = 2.0;

/// Frequency pairs `(u, v)` in order of increasing total frequency.
fn cosine_frequencies(count: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(count);
    let mut total = 0;
    while out.len() < count {
        for u in (0..=total).rev() {
            if out.len() < count {
                out.push((u, total - u));
            }
        }
        total += 1;
    }
    out
}

/// Smooth two-layer generator for tests and experiments without a trained
/// model. Layer one linearly maps `z ∈ R^k` onto the span of the `k` lowest
/// frequency 2-D cosine images; layer two is the identity followed by a
/// sigmoid, so every output pixel lies in (0, 1). Parameters are exactly
/// representable in `f32`, making weight-file round trips lossless.
pub fn synthetic_generator(side: usize, basis: usize) -> GeneratorNet {
    let n = side * side;
    let freqs = cosine_frequencies(basis);
    let mut w1 = vec![0.0; n * basis];
    for r in 0..side {
        for c in 0..side {
            for (k, &(u, v)) in freqs.iter().enumerate() {
                let value = SYNTHETIC_GAIN
                    * (PI * u as f64 * (c as f64 + 0.5) / side as f64).cos()
                    * (PI * v as f64 * (r as f64 + 0.5) / side as f64).cos();
                w1[(r * side + c) * basis + k] = f64::from(value as f32);
            }
        }
    }
    let mut w2 = vec![0.0; n * n];
    (0..n).for_each(|i| w2[i * n + i] = 1.0);
    let layers = vec![
        DenseLayer::new(basis, n, w1, vec![0.0; n], Activation::Linear).expect("finite"),
        DenseLayer::new(n, n, w2, vec![0.0; n], Activation::Sigmoid).expect("finite"),
    ];
    GeneratorNet::new(layers).expect("dimensions chain")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_order() {
        assert_eq!(
            cosine_frequencies(8),
            vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1)]
        );
    }

    #[test]
    fn synthetic_outputs_in_unit_interval() {
        let g = synthetic_generator(6, SYNTHETIC_LATENT_DIM);
        assert_eq!((g.latent_dim(), g.output_dim()), (8, 36));
        let x = g.forward(&[1.0, -2.0, 0.5, 0.0, 3.0, -1.0, 0.2, 0.9]).unwrap();
        assert!(x.iter().all(|&v| v > 0.0 && v < 1.0));
        let round = GeneratorNet::from_bytes(&g.to_bytes().unwrap()).unwrap();
        assert_eq!(round, g);
    }
}
