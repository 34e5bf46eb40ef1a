//! Generator weight files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "DGPR"  version:u32=1  layer_count:u32
//! per layer: in_dim:u32 out_dim:u32 activation:u8 weights:f32[out*in] bias:f32[out]
//! ```
//!
//! Activation codes: 0 Linear, 1 ReLU, 2 Sigmoid, 3 Tanh. Trailing bytes are rejected.

use std::fs;
use std::path::Path;

use super::net::{Activation, DenseLayer, GeneratorNet};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DGPR";
const VERSION: u32 = 1;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos + len;
        if end > self.bytes.len() {
            return Err(Error::Truncated {
                needed: end,
                available: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32s(&mut self, count: usize) -> Result<Vec<f64>> {
        Ok(self
            .take(4 * count)?
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect())
    }
}

impl GeneratorNet {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::Format("missing DGPR magic".into()));
        }
        let version = cur.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported DGPR version {version}")));
        }
        let count = cur.u32()? as usize;
        let mut layers = Vec::with_capacity(count.min(64));
        for _ in 0..count {
            let in_dim = cur.u32()? as usize;
            let out_dim = cur.u32()? as usize;
            let activation = Activation::from_code(cur.take(1)?[0])?;
            let weights = cur.f32s(in_dim * out_dim)?;
            let bias = cur.f32s(out_dim)?;
            layers.push(DenseLayer::new(in_dim, out_dim, weights, bias, activation)?);
        }
        if cur.pos != bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after last layer",
                bytes.len() - cur.pos
            )));
        }
        GeneratorNet::new(layers)
    }

    /// Serializes with parameters rounded to `f32`.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let dim = |d: usize| {
            u32::try_from(d).map_err(|_| Error::InvalidParameter(format!("dimension {d} too large")))
        };
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&dim(self.layers().len())?.to_le_bytes());
        for layer in self.layers() {
            out.extend_from_slice(&dim(layer.in_dim)?.to_le_bytes());
            out.extend_from_slice(&dim(layer.out_dim)?.to_le_bytes());
            out.push(layer.activation.code());
            for v in layer.weights.iter().chain(&layer.bias) {
                out.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_net() -> GeneratorNet {
        let l1 = DenseLayer::new(2, 3, vec![0.5, -1.0, 0.25, 2.0, 0.0, 1.5], vec![0.1, 0.2, 0.3], Activation::Relu)
            .unwrap();
        let l2 = DenseLayer::new(3, 1, vec![1.0, -2.0, 0.5], vec![-0.5], Activation::Sigmoid).unwrap();
        GeneratorNet::new(vec![l1, l2]).unwrap()
    }

    #[test]
    fn byte_layout() {
        let bytes = sample_net().to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"DGPR");
        assert_eq!(bytes.len(), 12 + (9 + 4 * 9) + (9 + 4 * 4));
        assert_eq!(bytes[12..16], 2u32.to_le_bytes());
        assert_eq!(bytes[20], 1); // ReLU
    }

    #[test]
    fn load_save_reproduces_outputs() {
        let net = GeneratorNet::from_bytes(&sample_net().to_bytes().unwrap()).unwrap();
        let again = GeneratorNet::from_bytes(&net.to_bytes().unwrap()).unwrap();
        assert_eq!(net, again);
        let z = [0.3, -0.7];
        assert_eq!(net.forward(&z).unwrap(), again.forward(&z).unwrap());
    }

    #[test]
    fn malformed_files() {
        let bytes = sample_net().to_bytes().unwrap();
        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(matches!(GeneratorNet::from_bytes(&trailing), Err(Error::Format(_))));
        assert!(matches!(
            GeneratorNet::from_bytes(&bytes[..bytes.len() - 2]),
            Err(Error::Truncated { .. })
        ));
        let mut bad_act = bytes.clone();
        bad_act[20] = 9;
        assert!(GeneratorNet::from_bytes(&bad_act).is_err());
        let mut bad_magic = bytes;
        bad_magic[3] = b'X';
        assert!(GeneratorNet::from_bytes(&bad_magic).is_err());
    }
}
