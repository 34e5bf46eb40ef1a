//! Measurement operators and the noise-free intensity model `y = |Ax|²`.
//!
//! A [`SensingOperator`] stores the measurement matrix `A` so that the i-th
//! linear measurement is `u_i = (Ax)_i = Σ_j A[i,j] x_j`. In inner-product
//! notation `u_i = ⟨a_i, x⟩` the measurement vector is `a_i = conj(A[i,:])`.

mod diffraction;
mod masks;

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::numerics::{gaussian_complex, ComplexMatrix, SeededRng};

pub use diffraction::{
    build_diffraction_matrix, DiffractionSpec, DEFAULT_GRID_SIDE, MODULATOR_TO_SCENE_M,
    PIXEL_PITCH_M, SCENE_TO_DETECTOR_M, STANDOFF_GRID_M, WAVELENGTH_M,
};
pub use masks::{effective_rows, generate_masks, physical_forward, MaskSet, DEFAULT_MASK_DENSITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingKind {
    Gaussian,
    Diffraction,
}

impl SensingKind {
    fn code(self) -> u8 {
        match self {
            SensingKind::Gaussian => 0,
            SensingKind::Diffraction => 1,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(SensingKind::Gaussian),
            1 => Ok(SensingKind::Diffraction),
            other => Err(Error::Format(format!("unknown sensing kind {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingOperator {
    matrix: ComplexMatrix,
    kind: SensingKind,
    row_norms_sq: Vec<f64>,
}

const SENS_MAGIC: &[u8; 4] = b"SENS";
const SENS_VERSION: u32 = 1;

impl SensingOperator {
    /// Wraps a matrix, caching squared row norms. Zero rows are rejected.
    pub fn new(matrix: ComplexMatrix, kind: SensingKind) -> Result<Self> {
        if matrix.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let row_norms_sq: Vec<f64> = (0..matrix.rows())
            .map(|r| matrix.row(r).iter().map(|z| z.norm_sqr()).sum())
            .collect();
        if let Some(row) = row_norms_sq.iter().position(|&s| s == 0.0) {
            return Err(Error::ZeroRowNorm { row });
        }
        Ok(Self {
            matrix,
            kind,
            row_norms_sq,
        })
    }

    /// Complex Gaussian operator with `E|A_ij|² = 1`.
    pub fn gaussian(rng: &mut SeededRng, m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::EmptyMatrix);
        }
        Self::new(gaussian_complex(rng, m, n), SensingKind::Gaussian)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> SensingKind {
        self.kind
    }

    /// Number of measurements `m`.
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    /// Signal dimension `n`.
    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        self.matrix.row(i)
    }

    pub fn row_norms_sq(&self) -> &[f64] {
        &self.row_norms_sq
    }

    /// Rescales the whole matrix so that the mean squared entry is 1, the
    /// energy level of the Gaussian ensemble.
    pub fn unit_energy(self) -> Result<Self> {
        let energy: f64 = self.row_norms_sq.iter().sum::<f64>() / (self.rows() * self.cols()) as f64;
        let c = energy.sqrt().recip();
        let (rows, cols) = (self.rows(), self.cols());
        let data = self.matrix.into_vec().into_iter().map(|z| z * c).collect();
        Self::new(ComplexMatrix::new(rows, cols, data)?, self.kind)
    }

    /// Linear measurements `u = Ax` of a real signal.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        self.matrix.matvec_real(x)
    }

    /// `Re(A^H w)`, the real-signal adjoint.
    pub fn adjoint_real(&self, w: &[Complex64]) -> Result<Vec<f64>> {
        check_len("adjoint operand", self.rows(), w.len())?;
        let mut out = vec![0.0; self.cols()];
        for (i, wi) in w.iter().enumerate() {
            if *wi == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += (a.conj() * wi).re;
            }
        }
        Ok(out)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(SENS_MAGIC)?;
        w.write_all(&SENS_VERSION.to_le_bytes())?;
        w.write_all(&[self.kind.code()])?;
        w.write_all(&u32_dim(self.rows())?.to_le_bytes())?;
        w.write_all(&u32_dim(self.cols())?.to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.matrix.as_slice().len());
        for z in self.matrix.as_slice() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        const HEADER: usize = 4 + 4 + 1 + 4 + 4;
        if bytes.len() < HEADER {
            return Err(Error::Truncated {
                needed: HEADER,
                available: bytes.len(),
            });
        }
        if &bytes[..4] != SENS_MAGIC {
            return Err(Error::Format("missing SENS magic".into()));
        }
        let version = le_u32(&bytes[4..8]);
        if version != SENS_VERSION {
            return Err(Error::Format(format!("unsupported SENS version {version}")));
        }
        let kind = SensingKind::from_code(bytes[8])?;
        let m = le_u32(&bytes[9..13]) as usize;
        let n = le_u32(&bytes[13..17]) as usize;
        let needed = HEADER + 16 * m * n;
        if bytes.len() < needed {
            return Err(Error::Truncated {
                needed,
                available: bytes.len(),
            });
        }
        if bytes.len() > needed {
            return Err(Error::Format(format!(
                "{} trailing bytes after SENS payload",
                bytes.len() - needed
            )));
        }
        let data = bytes[HEADER..]
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Self::new(ComplexMatrix::new(m, n, data)?, kind)
    }
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b.try_into().unwrap())
}

fn u32_dim(d: usize) -> Result<u32> {
    u32::try_from(d).map_err(|_| Error::InvalidParameter(format!("dimension {d} exceeds u32")))
}

/// Noise-free intensities `y_i = |(Ax)_i|²`.
pub fn intensity_forward(a: &SensingOperator, x: &[f64]) -> Result<Vec<f64>> {
    Ok(a.apply(x)?.iter().map(|u| u.norm_sqr()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_intensities() {
        let a = SensingOperator::new(ComplexMatrix::identity(2), SensingKind::Gaussian).unwrap();
        assert_eq!(intensity_forward(&a, &[1.0, 2.0]).unwrap(), vec![1.0, 4.0]);
    }

    #[test]
    fn unimodular_row() {
        let m = ComplexMatrix::new(1, 2, vec![c(0., 1.), c(0., 0.)]).unwrap();
        let a = SensingOperator::new(m, SensingKind::Gaussian).unwrap();
        assert_eq!(intensity_forward(&a, &[3.0, 5.0]).unwrap(), vec![9.0]);
    }

    #[test]
    fn rejects_zero_rows_and_bad_lengths() {
        let m = ComplexMatrix::new(2, 1, vec![c(1., 0.), c(0., 0.)]).unwrap();
        assert!(matches!(
            SensingOperator::new(m, SensingKind::Gaussian),
            Err(Error::ZeroRowNorm { row: 1 })
        ));
        let a = SensingOperator::new(ComplexMatrix::identity(2), SensingKind::Gaussian).unwrap();
        assert!(intensity_forward(&a, &[1.0]).is_err());
    }

    #[test]
    fn sens_round_trip_and_corruption() {
        let mut rng = SeededRng::new(11);
        let a = SensingOperator::gaussian(&mut rng, 3, 4).unwrap();
        let mut bytes = Vec::new();
        a.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 17 + 16 * 12);
        assert_eq!(SensingOperator::from_bytes(&bytes).unwrap(), a);

        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(SensingOperator::from_bytes(&extra), Err(Error::Format(_))));
        assert!(matches!(
            SensingOperator::from_bytes(&bytes[..bytes.len() - 1]),
            Err(Error::Truncated { .. })
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(SensingOperator::from_bytes(&bad).is_err());
    }
}
