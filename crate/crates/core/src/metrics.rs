//! Reconstruction quality: global sign alignment, PSNR and SSIM.

use crate::error::{check_len, Result};

/// SSIM window side and Gaussian width.
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

fn sq_dist(a: &[f64], b: &[f64], sign: f64) -> f64 {
    a.iter().zip(b).map(|(p, q)| (sign * p - q).powi(2)).sum()
}

/// `s·x_hat` for whichever `s ∈ {+1, −1}` lands closer to `x`; ties keep `+1`.
pub fn sign_align(x_hat: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_len("reconstruction", x.len(), x_hat.len())?;
    let flip = sq_dist(x_hat, x, -1.0) < sq_dist(x_hat, x, 1.0);
    Ok(if flip {
        x_hat.iter().map(|v| -v).collect()
    } else {
        x_hat.to_vec()
    })
}

/// `‖align(x_hat) − x‖ / ‖x‖`; the plain distance when `x = 0`.
pub fn aligned_relative_error(x_hat: &[f64], x: &[f64]) -> Result<f64> {
    let aligned = sign_align(x_hat, x)?;
    let dist = sq_dist(&aligned, x, 1.0).sqrt();
    let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(if scale > 0.0 { dist / scale } else { dist })
}

/// `10·log10(peak² / MSE)`, or `+∞` when the images are identical.
pub fn psnr(x_hat: &[f64], x: &[f64], peak: f64) -> Result<f64> {
    check_len("reconstruction", x.len(), x_hat.len())?;
    let mse = compensated_sum(x_hat.iter().zip(x).map(|(p, q)| (p - q) * (p - q))) / x.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak).log10() - 10.0 * mse.log10())
}

/// Side of the SSIM window used for a `width × height` image: the standard
/// 11, or the largest odd side that fits for smaller images.
pub fn ssim_window_side(width: usize, height: usize) -> usize {
    let fit = width.min(height).min(SSIM_WINDOW);
    if fit.is_multiple_of(2) {
        fit.saturating_sub(1)
    } else {
        fit
    }
}

/// Normalized 1-D Gaussian taps of odd length `side`.
pub fn gaussian_taps(side: usize, sigma: f64) -> Vec<f64> {
    let half = (side / 2) as f64;
    let raw: Vec<f64> = (0..side)
        .map(|i| (-(i as f64 - half).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Valid-mode separable filtering of a row-major image.
fn filter_valid(img: &[f64], width: usize, height: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (ow, oh) = (width + 1 - k, height + 1 - k);
    let mut rows = vec![0.0; ow * height];
    for r in 0..height {
        for c in 0..ow {
            rows[r * ow + c] = taps.iter().zip(&img[r * width + c..]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = taps.iter().enumerate().map(|(i, t)| t * rows[(r + i) * ow + c]).sum();
        }
    }
    out
}

/// Mean structural similarity over all valid window positions, with a
/// Gaussian window (σ = 1.5), `K₁ = 0.01`, `K₂ = 0.03` and dynamic range 1.
pub fn ssim(x_hat: &[f64], x: &[f64], width: usize, height: usize) -> Result<f64> {
    check_len("image", width * height, x.len())?;
    check_len("reconstruction", width * height, x_hat.len())?;
    let side = ssim_window_side(width, height);
    if side == 0 {
        return Err(crate::Error::InvalidParameter("image is empty".into()));
    }
    let taps = gaussian_taps(side, SSIM_SIGMA);
    let f = |img: &[f64]| filter_valid(img, width, height, &taps);
    let prod = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).collect::<Vec<_>>();
    let (mu_a, mu_b) = (f(x_hat), f(x));
    let (e_aa, e_bb, e_ab) = (f(&prod(x_hat, x_hat)), f(&prod(x, x)), f(&prod(x_hat, x)));
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityScore {
    pub ssim: f64,
    /// `+∞` for a perfect reconstruction.
    pub psnr: f64,
    pub aligned_rel_error: f64,
}

impl QualityScore {
    /// Scores `x_hat` against `x` after sign alignment, with peak 1.
    pub fn evaluate(x_hat: &[f64], x: &[f64], width: usize, height: usize) -> Result<Self> {
        let aligned = sign_align(x_hat, x)?;
        Ok(Self {
            ssim: ssim(&aligned, x, width, height)?,
            psnr: psnr(&aligned, x, 1.0)?,
            aligned_rel_error: aligned_relative_error(&aligned, x)?,
        })
    }
}

/// Formats a PSNR value for CSV output, writing `inf` for the perfect case.
pub fn format_psnr(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}
