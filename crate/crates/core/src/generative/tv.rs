//! Anisotropic total variation on row-major `width × height` images.

use crate::error::{check_len, Result};

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Calls `f(p, q)` for every horizontal then vertical neighbor pair, `q` after `p`.
fn for_each_pair(width: usize, height: usize, mut f: impl FnMut(usize, usize)) {
    for r in 0..height {
        for c in 0..width.saturating_sub(1) {
            let p = r * width + c;
            f(p, p + 1);
        }
    }
    for r in 0..height.saturating_sub(1) {
        for c in 0..width {
            let p = r * width + c;
            f(p, p + width);
        }
    }
}

pub fn tv_norm(x: &[f64], width: usize, height: usize) -> Result<f64> {
    check_len("image", width * height, x.len())?;
    let mut total = 0.0;
    for_each_pair(width, height, |p, q| total += (x[q] - x[p]).abs());
    Ok(total)
}

/// `Dᵀ sign(Dx)` for the forward-difference operator `D`, with `sign(0) = 0`.
pub fn tv_subgradient(x: &[f64], width: usize, height: usize) -> Result<Vec<f64>> {
    check_len("image", width * height, x.len())?;
    let mut g = vec![0.0; x.len()];
    for_each_pair(width, height, |p, q| {
        let s = sign(x[q] - x[p]);
        g[q] += s;
        g[p] -= s;
    });
    Ok(g)
}
