//! Phase retrieval toolkit: classical solvers, a generative-prior solver and
//! generator-initialized randomized Kaczmarz, with simulated THz single-pixel
//! diffraction sensing.

pub mod classical;
pub mod data;
pub mod error;
pub mod experiment;
pub mod generative;
pub mod metrics;
pub mod numerics;
pub mod sensing;

pub use error::{Error, Result};
