use num_complex::Complex64;
use rayon::prelude::*;

use super::{SensingKind, SensingOperator};
use crate::error::{check_len, Error, Result};
use crate::numerics::{ComplexMatrix, SeededRng};

/// Probability that a modulator pixel is open.
pub const DEFAULT_MASK_DENSITY: f64 = 0.5;

/// Binary modulator patterns, one per measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    n: usize,
    bernoulli_p: f64,
    bits: Vec<u8>,
}

impl MaskSet {
    pub fn from_masks(masks: Vec<Vec<u8>>, bernoulli_p: f64) -> Result<Self> {
        let n = masks.first().map_or(0, Vec::len);
        let mut bits = Vec::with_capacity(n * masks.len());
        for m in &masks {
            check_len("mask", n, m.len())?;
            if m.iter().any(|&b| b > 1) {
                return Err(Error::InvalidParameter("mask entries must be 0 or 1".into()));
            }
            bits.extend_from_slice(m);
        }
        Ok(Self {
            n,
            bernoulli_p,
            bits,
        })
    }

    pub fn len(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.bits.len() / self.n
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pixels per mask.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bernoulli_p(&self) -> f64 {
        self.bernoulli_p
    }

    pub fn mask(&self, i: usize) -> &[u8] {
        &self.bits[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.bits.chunks_exact(self.n.max(1))
    }
}

/// `count` masks of `n` independent Bernoulli(`p`) pixels, drawn mask by mask.
pub fn generate_masks(rng: &mut SeededRng, count: usize, n: usize, p: f64) -> Result<MaskSet> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("mask density must lie in (0,1), got {p}")));
    }
    let bits = (0..count * n).map(|_| u8::from(rng.uniform() < p)).collect();
    Ok(MaskSet {
        n,
        bernoulli_p: p,
        bits,
    })
}

/// `D · a` for a binary vector `a`.
fn propagate_mask(d: &ComplexMatrix, mask: &[u8]) -> Vec<Complex64> {
    (0..d.rows())
        .map(|k| {
            d.row(k)
                .iter()
                .zip(mask)
                .filter(|(_, &b)| b == 1)
                .fold(Complex64::new(0.0, 0.0), |acc, (z, _)| acc + z)
        })
        .collect()
}

fn check_square(d: &ComplexMatrix, n: usize, what: &'static str) -> Result<()> {
    check_len(what, n, d.rows())?;
    check_len(what, n, d.cols())
}

/// Collapses the physical chain into a sensing operator.
///
/// The detector sum `1ᵀ D_sd diag(x) D_ms a_i` is linear in `x` with
/// coefficients `(D_sdᵀ 1) ⊙ (D_ms a_i)`, which become row `i` of the matrix.
/// In inner-product form that is `ã_i = diag(D_sd^H 1) · conj(D_ms) · a_i`.
pub fn effective_rows(
    masks: &MaskSet,
    d_ms: &ComplexMatrix,
    d_sd: &ComplexMatrix,
) -> Result<SensingOperator> {
    let n = masks.dim();
    check_square(d_ms, n, "modulator-to-scene matrix")?;
    check_square(d_sd, n, "scene-to-detector matrix")?;
    if masks.is_empty() {
        return Err(Error::EmptyMatrix);
    }

    let mut detector_weights = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for (w, z) in detector_weights.iter_mut().zip(d_sd.row(j)) {
            *w += z;
        }
    }

    let rows: Vec<Vec<Complex64>> = (0..masks.len())
        .into_par_iter()
        .map(|i| {
            propagate_mask(d_ms, masks.mask(i))
                .into_iter()
                .zip(&detector_weights)
                .map(|(p, w)| p * w)
                .collect()
        })
        .collect();
    let matrix = ComplexMatrix::new(masks.len(), n, rows.concat())?;
    SensingOperator::new(matrix, SensingKind::Diffraction)
}

/// Simulates each measurement along the physical path: modulate, propagate
/// to the scene, transmit, propagate to the detector, sum, square.
pub fn physical_forward(
    masks: &MaskSet,
    d_ms: &ComplexMatrix,
    d_sd: &ComplexMatrix,
    x: &[f64],
) -> Result<Vec<f64>> {
    let n = masks.dim();
    check_square(d_ms, n, "modulator-to-scene matrix")?;
    check_square(d_sd, n, "scene-to-detector matrix")?;
    check_len("scene", n, x.len())?;
    masks
        .iter()
        .map(|mask| {
            let illumination: Vec<f64> = mask.iter().map(|&b| f64::from(b)).collect();
            let at_scene = d_ms.matvec_real(&illumination)?;
            let transmitted: Vec<Complex64> =
                at_scene.iter().zip(x).map(|(f, &t)| f * t).collect();
            let at_detector = d_sd.matvec(&transmitted)?;
            Ok(at_detector.iter().sum::<Complex64>().norm_sqr())
        })
        .collect()
}
