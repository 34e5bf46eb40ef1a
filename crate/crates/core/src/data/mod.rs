//! Image datasets: MNIST ingestion from IDX files and randomized
//! Shepp-Logan phantom synthesis, plus IDX export.

mod idx;
mod phantom;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use rand::seq::SliceRandom;

pub use idx::{
    maybe_gunzip, parse_idx_images, parse_idx_labels, write_idx_images, write_idx_labels,
    IdxImages, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC,
};
pub use phantom::{
    pixel_center, rasterize, synthesize_shepp_logan, Ellipse, PhantomSpec, MODIFIED_SHEPP_LOGAN,
};

use crate::error::{Error, Result};
use crate::numerics::SeededRng;

/// Default number of phantoms written for training.
pub const DEFAULT_PHANTOM_COUNT: usize = 10_000;
/// Size of the full synthesized training set.
pub const FULL_PHANTOM_COUNT: usize = 250_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DatasetSource {
    Mnist,
    SheppLogan,
}

/// Stack of equally sized grayscale images with pixels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDataset {
    pub images: Vec<Vec<f64>>,
    pub width: usize,
    pub height: usize,
    pub source: DatasetSource,
    pub labels: Option<Vec<u8>>,
}

impl ImageDataset {
    pub fn new(
        images: Vec<Vec<f64>>,
        width: usize,
        height: usize,
        source: DatasetSource,
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        for img in &images {
            if img.len() != width * height {
                return Err(Error::DimensionMismatch {
                    context: "dataset image",
                    expected: width * height,
                    actual: img.len(),
                });
            }
            if img.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidParameter("pixel outside [0, 1]".into()));
            }
        }
        if let Some(l) = &labels {
            if l.len() != images.len() {
                return Err(Error::CountMismatch {
                    images: images.len(),
                    labels: l.len(),
                });
            }
        }
        Ok(Self {
            images,
            width,
            height,
            source,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    /// Indices of the first `count` entries of a seeded shuffle of the dataset.
    pub fn select(&self, count: usize, seed: u64) -> Result<Vec<usize>> {
        if count == 0 || count > self.len() {
            return Err(Error::InvalidParameter(format!(
                "cannot select {count} of {} images",
                self.len()
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut SeededRng::new(seed));
        order.truncate(count);
        Ok(order)
    }

    /// Quantizes to `u8` with `round(255·v)`.
    pub fn to_idx(&self) -> IdxImages {
        IdxImages {
            count: self.len(),
            rows: self.height,
            cols: self.width,
            pixels: self
                .images
                .iter()
                .flatten()
                .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
                .collect(),
        }
    }

    /// Writes uncompressed IDX image (and, if present, label) files.
    pub fn export_idx(&self, images_path: &Path, labels_path: Option<&Path>) -> Result<()> {
        write_idx_images(BufWriter::new(File::create(images_path)?), &self.to_idx())?;
        if let (Some(path), Some(labels)) = (labels_path, &self.labels) {
            write_idx_labels(BufWriter::new(File::create(path)?), labels)?;
        }
        Ok(())
    }
}

/// Decodes IDX bytes into a dataset with pixels scaled by `1/255`.
pub fn mnist_from_bytes(images: &[u8], labels: Option<&[u8]>) -> Result<ImageDataset> {
    let raw = parse_idx_images(images)?;
    let labels = labels.map(parse_idx_labels).transpose()?;
    if let Some(l) = &labels {
        if l.len() != raw.count {
            return Err(Error::CountMismatch {
                images: raw.count,
                labels: l.len(),
            });
        }
    }
    let images = (0..raw.count)
        .map(|i| raw.image(i).iter().map(|&p| f64::from(p) / 255.0).collect())
        .collect();
    Ok(ImageDataset {
        images,
        width: raw.cols,
        height: raw.rows,
        source: DatasetSource::Mnist,
        labels,
    })
}

/// Loads MNIST-style IDX files, gzip-compressed or not.
pub fn load_mnist(images_path: &Path, labels_path: Option<&Path>) -> Result<ImageDataset> {
    let images = fs::read(images_path)?;
    let labels = labels_path.map(fs::read).transpose()?;
    mnist_from_bytes(&images, labels.as_deref())
}

pub fn shepp_logan_dataset(spec: &PhantomSpec, count: usize) -> Result<ImageDataset> {
    let images = synthesize_shepp_logan(spec, count)?;
    Ok(ImageDataset {
        images,
        width: spec.side,
        height: spec.side,
        source: DatasetSource::SheppLogan,
        labels: None,
    })
}
