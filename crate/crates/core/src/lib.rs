//! Core algorithms for a camera-to-sound sensory substitution device.
//!
//! A grayscale frame is passed through a saliency filter built from a
//! lattice of neurons, the resulting mask is counted over a 3×4 grid, and
//! every grid cell whose salient-pixel count crosses a threshold triggers a
//! looping environmental sound spatialized to that cell's direction.
//!
//! The crate also carries a virtual corridor simulator (ray-cast camera,
//! obstacle layouts, collision accounting) and the analyses used to study
//! navigation trials (improvement ratio, exponential-decay fit, DBSCAN).
//!
//! Everything here is `no_std` + `alloc`; file formats, timing, threads and
//! networking live in the `sonoscape` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytics;
pub mod audio;
mod error;
pub mod grid;
pub mod image;
pub mod pipeline;
pub mod rng;
pub mod saliency;
pub mod sim;

pub use error::{Error, Result};
pub use grid::{CellActivations, CellCounts, CellDirection, GridSpec, SoundClass};
pub use image::GrayImage;
pub use saliency::{FilterConfig, NeuronStates, SalientMask, WeightTable};
