//! Frame → mask → cell counts → activations.

use crate::grid::{self, CellActivations, CellCounts, GridSpec};
use crate::image::GrayImage;
use crate::saliency::{self, FilterConfig, SalientMask};
use crate::{Error, Result};

/// Intermediate products of one frame, for callers that want more than the
/// activations.
#[derive(Debug, Clone)]
pub struct FrameAnalysis {
    pub mask: SalientMask,
    pub counts: CellCounts,
    pub activations: CellActivations,
}

pub fn check_dimensions(img: &GrayImage, grid: &GridSpec) -> Result<()> {
    let expected = (grid.image_width, grid.image_height);
    if img.dimensions() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: img.dimensions(),
        });
    }
    Ok(())
}

pub fn analyze_frame(img: &GrayImage, filter: &FilterConfig, grid: &GridSpec) -> Result<FrameAnalysis> {
    check_dimensions(img, grid)?;
    let mask = saliency::salient_mask(img, filter)?;
    let counts = grid::cell_counts(&mask, grid)?;
    let activations = grid::active_cells(&counts, grid)?;
    Ok(FrameAnalysis {
        mask,
        counts,
        activations,
    })
}

pub fn frame_activations(img: &GrayImage, filter: &FilterConfig, grid: &GridSpec) -> Result<CellActivations> {
    analyze_frame(img, filter, grid).map(|a| a.activations)
}
