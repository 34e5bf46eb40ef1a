use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

/// THz wavelength in meters (≈ 0.35 THz).
pub const WAVELENGTH_M: f64 = 0.856e-3;
pub const PIXEL_PITCH_M: f64 = 0.5e-3;
pub const DEFAULT_GRID_SIDE: usize = 28;
/// Nominal modulator-to-scene (stand-off) distance.
pub const MODULATOR_TO_SCENE_M: f64 = 0.01;
pub const SCENE_TO_DETECTOR_M: f64 = 0.175;
/// Stand-off distances swept in the sensitivity analysis, octave-spaced.
pub const STANDOFF_GRID_M: [f64; 7] = [0.00125, 0.0025, 0.005, 0.01, 0.02, 0.04, 0.08];

const MAX_PIXELS: usize = 4096;

/// Geometry of a propagation between two identically sampled square planes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionSpec {
    pub wavelength: f64,
    pub distance: f64,
    pub pixel_pitch: f64,
    pub grid_side: usize,
}

impl DiffractionSpec {
    /// THz defaults (0.856 mm wavelength, 0.5 mm pixels, 28×28 grid) at `distance`.
    pub fn thz(distance: f64) -> Self {
        Self {
            wavelength: WAVELENGTH_M,
            distance,
            pixel_pitch: PIXEL_PITCH_M,
            grid_side: DEFAULT_GRID_SIDE,
        }
    }

    pub fn with_grid_side(mut self, side: usize) -> Self {
        self.grid_side = side;
        self
    }

    pub fn pixels(&self) -> usize {
        self.grid_side * self.grid_side
    }

    fn validate(&self) -> Result<()> {
        if self.distance == 0.0 {
            return Err(Error::InvalidParameter(
                "propagation distance 0 makes the Fresnel kernel singular; use the identity"
                    .into(),
            ));
        }
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("distance", self.distance),
            ("pixel_pitch", self.pixel_pitch),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.grid_side == 0 || self.pixels() > MAX_PIXELS {
            return Err(Error::InvalidParameter(format!(
                "grid side {} gives {} pixels; allowed 1..={MAX_PIXELS}",
                self.grid_side,
                self.pixels()
            )));
        }
        Ok(())
    }
}

/// Discrete Fresnel propagation matrix between identically sampled planes:
///
/// `D[k,j] = Δ²/(iλd) · e^{i2πd/λ} · e^{iπ((x_k−x_j)² + (y_k−y_j)²)/(λd)}`
///
/// with pixel `k = row·side + col` centred at `(col·Δ, row·Δ)`.
pub fn build_diffraction_matrix(spec: &DiffractionSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let DiffractionSpec {
        wavelength,
        distance,
        pixel_pitch,
        grid_side,
    } = *spec;
    let lambda_d = wavelength * distance;
    let prefactor = Complex64::new(0.0, -pixel_pitch * pixel_pitch / lambda_d)
        * Complex64::from_polar(1.0, 2.0 * PI * distance / wavelength);

    // The kernel depends only on the integer offset, so tabulate it once.
    let chirp: Vec<Complex64> = (0..grid_side * grid_side)
        .map(|idx| {
            let (dr, dc) = ((idx / grid_side) as f64, (idx % grid_side) as f64);
            let r2 = (dr * dr + dc * dc) * pixel_pitch * pixel_pitch;
            prefactor * Complex64::from_polar(1.0, PI * r2 / lambda_d)
        })
        .collect();

    let n = spec.pixels();
    ComplexMatrix::from_fn(n, n, |k, j| {
        let dr = (k / grid_side).abs_diff(j / grid_side);
        let dc = (k % grid_side).abs_diff(j % grid_side);
        chirp[dr * grid_side + dc]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_distance_is_rejected() {
        let spec = DiffractionSpec::thz(0.0).with_grid_side(4);
        assert!(matches!(build_diffraction_matrix(&spec), Err(Error::InvalidParameter(_))));
        let huge = DiffractionSpec::thz(0.01).with_grid_side(65);
        assert!(build_diffraction_matrix(&huge).is_err());
    }

    #[test]
    fn block_toeplitz_and_symmetric() {
        let side = 5;
        let d = build_diffraction_matrix(&DiffractionSpec::thz(0.01).with_grid_side(side)).unwrap();
        assert_eq!((d.rows(), d.cols()), (25, 25));
        let idx = |r: usize, c: usize| r * side + c;
        // Same offset, different anchors.
        assert_eq!(d[(idx(0, 0), idx(1, 2))], d[(idx(2, 1), idx(3, 3))]);
        for k in 0..25 {
            for j in 0..25 {
                assert_eq!(d[(k, j)], d[(j, k)]);
                assert!(d[(k, j)].re.is_finite() && d[(k, j)].im.is_finite());
            }
        }
    }

    #[test]
    fn entry_matches_formula() {
        let spec = DiffractionSpec::thz(0.02).with_grid_side(3);
        let d = build_diffraction_matrix(&spec).unwrap();
        // Pixel 0 = (0,0), pixel 8 = (2,2): squared distance 8Δ².
        let ld = spec.wavelength * spec.distance;
        let r2 = 8.0 * spec.pixel_pitch * spec.pixel_pitch;
        let expected = spec.pixel_pitch.powi(2) / (Complex64::i() * ld)
            * Complex64::from_polar(1.0, 2.0 * PI * spec.distance / spec.wavelength)
            * Complex64::from_polar(1.0, PI * r2 / ld);
        assert!((d[(0, 8)] - expected).norm() < 1e-12 * expected.norm());
    }
}
