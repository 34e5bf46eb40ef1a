use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{check_len, Result};
use crate::metrics::format_psnr;

pub const CSV_HEADER: &str = "dataset,algorithm,sampling_rate,standoff_m,image_index,seed,ssim,psnr,aligned_rel_error,wall_time_s,init_time_s";

/// One CSV line: a single (algorithm, rate, image) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: &'static str,
    pub algorithm: &'static str,
    pub sampling_rate: f64,
    pub standoff_m: Option<f64>,
    pub image_index: usize,
    pub seed: u64,
    pub ssim: f64,
    pub psnr: f64,
    pub aligned_rel_error: f64,
    pub wall_time_s: f64,
    pub init_time_s: f64,
}

impl ResultRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.6},{:.6}",
            self.dataset,
            self.algorithm,
            self.sampling_rate,
            self.standoff_m.map(|d| d.to_string()).unwrap_or_default(),
            self.image_index,
            self.seed,
            self.ssim,
            format_psnr(self.psnr),
            self.aligned_rel_error,
            self.wall_time_s,
            self.init_time_s,
        )
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(128 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.csv_line());
    }
    out
}

/// Binary 8-bit PGM with `round(255·clamp(v, 0, 1))` pixels.
pub fn pgm_bytes(image: &[f64], width: usize, height: usize) -> Result<Vec<u8>> {
    check_len("image", width * height, image.len())?;
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(image.iter().map(|v| (255.0 * v.clamp(0.0, 1.0)).round() as u8));
    Ok(out)
}

pub fn write_pgm(path: &Path, image: &[f64], width: usize, height: usize) -> Result<()> {
    fs::write(path, pgm_bytes(image, width, height)?)?;
    Ok(())
}
