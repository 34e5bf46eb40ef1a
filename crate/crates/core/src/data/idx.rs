//! IDX files as used by MNIST: a big-endian magic, big-endian `u32`
//! dimensions, then raw `u8` payload. Gzip-compressed input is detected by
//! its `1f 8b` prefix and inflated transparently.

use std::borrow::Cow;
use std::io::{Read, Write};

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
const GZIP_PREFIX: [u8; 2] = [0x1f, 0x8b];

/// Raw `u8` image stack, row-major per image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> &[u8] {
        let len = self.rows * self.cols;
        &self.pixels[i * len..(i + 1) * len]
    }
}

pub fn maybe_gunzip(bytes: &[u8]) -> Result<Cow<'_, [u8]>> {
    if !bytes.starts_with(&GZIP_PREFIX) {
        return Ok(Cow::Borrowed(bytes));
    }
    let mut out = Vec::new();
    GzDecoder::new(bytes).read_to_end(&mut out)?;
    Ok(Cow::Owned(out))
}

fn header(bytes: &[u8], magic: u32, dims: usize) -> Result<(Vec<usize>, &[u8])> {
    let head = 4 + 4 * dims;
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            needed: head,
            available: bytes.len(),
        });
    }
    let found = u32::from_be_bytes(bytes[..4].try_into().unwrap());
    if found != magic {
        return Err(Error::BadMagic {
            expected: magic,
            found,
        });
    }
    if bytes.len() < head {
        return Err(Error::Truncated {
            needed: head,
            available: bytes.len(),
        });
    }
    let sizes = bytes[4..head]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes(c.try_into().unwrap()) as usize)
        .collect();
    Ok((sizes, &bytes[head..]))
}

fn payload(body: &[u8], head: usize, len: usize) -> Result<&[u8]> {
    if body.len() < len {
        return Err(Error::Truncated {
            needed: head + len,
            available: head + body.len(),
        });
    }
    if body.len() > len {
        return Err(Error::Format(format!(
            "{} bytes after the IDX payload",
            body.len() - len
        )));
    }
    Ok(body)
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let bytes = maybe_gunzip(bytes)?;
    let (dims, body) = header(&bytes, IDX_IMAGES_MAGIC, 3)?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    let len = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::Format("IDX dimensions overflow".into()))?;
    let pixels = payload(body, 16, len)?.to_vec();
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let bytes = maybe_gunzip(bytes)?;
    let (dims, body) = header(&bytes, IDX_LABELS_MAGIC, 1)?;
    Ok(payload(body, 8, dims[0])?.to_vec())
}

fn dim(v: usize) -> Result<[u8; 4]> {
    u32::try_from(v)
        .map(u32::to_be_bytes)
        .map_err(|_| Error::InvalidParameter(format!("IDX dimension {v} exceeds u32")))
}

pub fn write_idx_images(mut w: impl Write, images: &IdxImages) -> Result<()> {
    if images.pixels.len() != images.count * images.rows * images.cols {
        return Err(Error::DimensionMismatch {
            context: "IDX pixels",
            expected: images.count * images.rows * images.cols,
            actual: images.pixels.len(),
        });
    }
    w.write_all(&IDX_IMAGES_MAGIC.to_be_bytes())?;
    for d in [images.count, images.rows, images.cols] {
        w.write_all(&dim(d)?)?;
    }
    w.write_all(&images.pixels)?;
    Ok(())
}

pub fn write_idx_labels(mut w: impl Write, labels: &[u8]) -> Result<()> {
    w.write_all(&IDX_LABELS_MAGIC.to_be_bytes())?;
    w.write_all(&dim(labels.len())?)?;
    w.write_all(labels)?;
    Ok(())
}
