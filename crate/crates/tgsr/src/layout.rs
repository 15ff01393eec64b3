//! Multi-scale grid partition of the input frame.
//!
//! A layout divides a `width x height` frame into one grid per scale: scale
//! `s` contributes `s*s` cells. Regions are ordered coarse-to-fine in the
//! order the scales are given, row-major within a scale, and this order is
//! the contract for how per-region feature blocks are concatenated. The
//! default scales `[1, 2, 4, 8]` on a 112x112 frame give the 85-region
//! partition used throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One grid cell: its scale, grid coordinates, and pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    /// Index into [`GroupLayout::scales`].
    pub scale_index: usize,
    pub row: usize,
    pub col: usize,
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

/// Immutable description of the multi-scale grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupLayout {
    scales: Vec<usize>,
    frame: (usize, usize),
    regions: Vec<Region>,
}

impl GroupLayout {
    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    /// Frame size in pixels as (width, height).
    pub fn frame(&self) -> (usize, usize) {
        self.frame
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, group: usize) -> Option<&Region> {
        self.regions.get(group)
    }

    /// Total region count K.
    pub fn k(&self) -> usize {
        self.regions.len()
    }

    /// Side length of the grid the given region belongs to.
    pub fn scale_of(&self, region: &Region) -> usize {
        self.scales[region.scale_index]
    }
}

/// Build the grid layout for the given scales over a pixel frame.
///
/// Every scale must divide both frame dimensions so that its cells tile the
/// frame exactly. Region order: scales in the given order, then row-major.
pub fn build_grid_layout(scales: &[usize], frame: (usize, usize)) -> Result<GroupLayout> {
    if scales.is_empty() {
        return Err(Error::InvalidInput("scales: must not be empty".into()));
    }
    let (width, height) = frame;
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput(format!(
            "frame: dimensions must be positive, got {width}x{height}"
        )));
    }
    let mut regions = Vec::with_capacity(scales.iter().map(|s| s * s).sum());
    for (scale_index, &s) in scales.iter().enumerate() {
        if s == 0 {
            return Err(Error::InvalidInput(format!(
                "scales[{scale_index}]: side length must be >= 1"
            )));
        }
        if width % s != 0 || height % s != 0 {
            return Err(Error::InvalidInput(format!(
                "scales[{scale_index}]: scale {s} does not divide frame {width}x{height}"
            )));
        }
        let (cw, ch) = (width / s, height / s);
        for row in 0..s {
            for col in 0..s {
                regions.push(Region {
                    scale_index,
                    row,
                    col,
                    x: col * cw,
                    y: row * ch,
                    width: cw,
                    height: ch,
                });
            }
        }
    }
    Ok(GroupLayout {
        scales: scales.to_vec(),
        frame,
        regions,
    })
}
