//! Randomized Shepp-Logan phantoms.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::SeededRng;

/// Ellipse in normalized image coordinates `[−1, 1]²`, `y` pointing up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub intensity: f64,
    pub semi_x: f64,
    pub semi_y: f64,
    pub center_x: f64,
    pub center_y: f64,
    /// Counter-clockwise rotation in degrees.
    pub rotation_deg: f64,
}

impl Ellipse {
    const fn new(intensity: f64, semi_x: f64, semi_y: f64, cx: f64, cy: f64, rot: f64) -> Self {
        Self {
            intensity,
            semi_x,
            semi_y,
            center_x: cx,
            center_y: cy,
            rotation_deg: rot,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        let (dx, dy) = (x - self.center_x, y - self.center_y);
        let u = (dx * c + dy * s) / self.semi_x;
        let v = (-dx * s + dy * c) / self.semi_y;
        u * u + v * v <= 1.0
    }
}

/// The modified (high-contrast) Shepp-Logan table.
pub const MODIFIED_SHEPP_LOGAN: [Ellipse; 10] = [
    Ellipse::new(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    Ellipse::new(-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    Ellipse::new(-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    Ellipse::new(-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    Ellipse::new(0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    Ellipse::new(0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    Ellipse::new(0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    Ellipse::new(0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    Ellipse::new(0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    Ellipse::new(0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub ellipses: Vec<Ellipse>,
    /// Each center coordinate moves by `U[−center_jitter, center_jitter]`.
    pub center_jitter: f64,
    /// Each semi-axis is scaled by `U[lo, hi]`.
    pub axis_scale: (f64, f64),
    /// Rotation moves by `U[−rotation_jitter_deg, rotation_jitter_deg]`.
    pub rotation_jitter_deg: f64,
    pub side: usize,
    pub seed: u64,
}

impl PhantomSpec {
    pub fn shepp_logan(seed: u64) -> Self {
        Self {
            ellipses: MODIFIED_SHEPP_LOGAN.to_vec(),
            center_jitter: 0.1,
            axis_scale: (0.8, 1.2),
            rotation_jitter_deg: 10.0,
            side: 28,
            seed,
        }
    }

    pub fn without_jitter(mut self) -> Self {
        self.center_jitter = 0.0;
        self.axis_scale = (1.0, 1.0);
        self.rotation_jitter_deg = 0.0;
        self
    }

    /// Ellipses for image `index`, drawn from a stream derived from `(seed, index)`.
    /// Per ellipse: center x, center y, semi-x scale, semi-y scale, rotation.
    pub fn jittered(&self, index: usize) -> Vec<Ellipse> {
        let mut rng = SeededRng::new(self.seed).derive(&[index as u64]);
        let (lo, hi) = self.axis_scale;
        self.ellipses
            .iter()
            .map(|e| {
                let dx = rng.uniform_range(-self.center_jitter, self.center_jitter);
                let dy = rng.uniform_range(-self.center_jitter, self.center_jitter);
                let sx = rng.uniform_range(lo, hi);
                let sy = rng.uniform_range(lo, hi);
                let dr = rng.uniform_range(-self.rotation_jitter_deg, self.rotation_jitter_deg);
                Ellipse {
                    intensity: e.intensity,
                    semi_x: e.semi_x * sx,
                    semi_y: e.semi_y * sy,
                    center_x: e.center_x + dx,
                    center_y: e.center_y + dy,
                    rotation_deg: e.rotation_deg + dr,
                }
            })
            .collect()
    }
}

/// Normalized coordinate of the center of pixel `(r, c)` on a `side × side` grid.
pub fn pixel_center(r: usize, c: usize, side: usize) -> (f64, f64) {
    let step = 2.0 / side as f64;
    (-1.0 + (c as f64 + 0.5) * step, 1.0 - (r as f64 + 0.5) * step)
}

/// Sums ellipse intensities at each pixel center, clamped to `[0, 1]`. Row-major.
pub fn rasterize(ellipses: &[Ellipse], side: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(side * side);
    for r in 0..side {
        for c in 0..side {
            let (x, y) = pixel_center(r, c, side);
            let v: f64 = ellipses
                .iter()
                .filter(|e| e.contains(x, y))
                .map(|e| e.intensity)
                .sum();
            out.push(v.clamp(0.0, 1.0));
        }
    }
    out
}

/// `count` jittered phantoms. Image `i` depends only on `(spec, i)`, so the
/// parallel result is identical to a serial one.
pub fn synthesize_shepp_logan(spec: &PhantomSpec, count: usize) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::InvalidParameter("phantom count must be at least 1".into()));
    }
    if spec.side == 0 {
        return Err(Error::InvalidParameter("phantom side must be positive".into()));
    }
    let (lo, hi) = spec.axis_scale;
    if !(spec.center_jitter >= 0.0 && spec.rotation_jitter_deg >= 0.0 && 0.0 < lo && lo <= hi) {
        return Err(Error::InvalidParameter("invalid phantom jitter ranges".into()));
    }
    Ok((0..count)
        .into_par_iter()
        .map(|i| rasterize(&spec.jittered(i), spec.side))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_phantom_values() {
        let img = rasterize(&MODIFIED_SHEPP_LOGAN, 28);
        assert!(img.iter().all(|&v| (0.0..=1.0).contains(&v)));
        // Corner is outside the skull, the skull rim carries full intensity.
        assert_eq!(img[0], 0.0);
        let (r, c) = (14, 4);
        let (x, y) = pixel_center(r, c, 28);
        assert!(MODIFIED_SHEPP_LOGAN[0].contains(x, y));
        assert!(!MODIFIED_SHEPP_LOGAN[1].contains(x, y));
        assert_eq!(img[r * 28 + c], 1.0);
    }

    #[test]
    fn zero_jitter_reproduces_base() {
        let spec = PhantomSpec::shepp_logan(5).without_jitter();
        let base = rasterize(&MODIFIED_SHEPP_LOGAN, 28);
        for img in synthesize_shepp_logan(&spec, 3).unwrap() {
            assert_eq!(img, base);
        }
    }

    #[test]
    fn seeded_and_prefix_stable() {
        let spec = PhantomSpec::shepp_logan(11);
        let a = synthesize_shepp_logan(&spec, 4).unwrap();
        let b = synthesize_shepp_logan(&spec, 6).unwrap();
        assert_eq!(a[..], b[..4]);
        assert_ne!(a[0], a[1]);
        assert!(synthesize_shepp_logan(&spec, 0).is_err());
    }

    #[test]
    fn rotated_ellipse_membership() {
        let e = Ellipse::new(1.0, 0.5, 0.1, 0.0, 0.0, 90.0);
        assert!(e.contains(0.0, 0.45));
        assert!(!e.contains(0.45, 0.0));
    }
}
