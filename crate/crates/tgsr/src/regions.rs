//! Mapping nonzero regression blocks back to grid rectangles, with a
//! pixel-mask rendering for visual inspection.
//!
//! Outputs: a `regions.csv` table (one row per surviving group, sorted by
//! block norm descending) and a `mask.pgm` grayscale image where each pixel
//! accumulates the norms of every selected region covering it, max-normalized
//! to 8 bits.

use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::layout::GroupLayout;
use crate::solver::group_norms;

/// One selected region with its block norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedRegion {
    pub group: usize,
    /// Grid side length of the region's scale.
    pub scale: usize,
    pub row: usize,
    pub col: usize,
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub norm: f64,
}

/// The full report: selected regions (norm descending, group index breaking
/// ties) plus the accumulated pixel mask, `height x width`.
#[derive(Debug, Clone)]
pub struct RegionReport {
    pub selected: Vec<SelectedRegion>,
    pub mask: Array2<f64>,
}

/// Indices of groups whose block norm exceeds `tol`, ascending.
pub fn selected_groups(c_hat: &ArrayView2<f64>, d_per_group: usize, tol: f64) -> Vec<usize> {
    group_norms(c_hat, d_per_group)
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > tol)
        .map(|(i, _)| i)
        .collect()
}

/// Default tolerance absorbing numerical dust; the prox produces exact zeros
/// so anything above this is a genuine selection.
pub const DEFAULT_NORM_TOL: f64 = 1e-10;

/// Build the report for a layout-aware regression matrix.
pub fn region_report(
    c_hat: &ArrayView2<f64>,
    d_per_group: usize,
    layout: &GroupLayout,
    tol: f64,
) -> Result<RegionReport> {
    if c_hat.nrows() != layout.k() * d_per_group {
        return Err(Error::ShapeMismatch(format!(
            "C has {} rows but layout expects K*d = {}",
            c_hat.nrows(),
            layout.k() * d_per_group
        )));
    }
    let norms = group_norms(c_hat, d_per_group);
    let (width, height) = layout.frame();
    let mut mask = Array2::<f64>::zeros((height, width));
    let mut selected = Vec::new();
    for (group, &norm) in norms.iter().enumerate() {
        if norm <= tol {
            continue;
        }
        let region = layout.region(group).expect("layout.k checked");
        for y in region.y..region.y + region.height {
            for x in region.x..region.x + region.width {
                mask[(y, x)] += norm;
            }
        }
        selected.push(SelectedRegion {
            group,
            scale: layout.scale_of(region),
            row: region.row,
            col: region.col,
            x: region.x,
            y: region.y,
            width: region.width,
            height: region.height,
            norm,
        });
    }
    selected.sort_by(|a, b| {
        b.norm
            .partial_cmp(&a.norm)
            .expect("finite norms")
            .then(a.group.cmp(&b.group))
    });
    Ok(RegionReport { selected, mask })
}

impl RegionReport {
    /// CSV rows: `index,scale,row,col,x,y,w,h,norm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,scale,row,col,x,y,w,h,norm\n");
        for r in &self.selected {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.group, r.scale, r.row, r.col, r.x, r.y, r.width, r.height, r.norm
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Binary 8-bit PGM, max-normalized; an all-zero mask stays black.
    pub fn write_mask_pgm(&self, path: &Path) -> Result<()> {
        let (h, w) = self.mask.dim();
        let max = self.mask.iter().cloned().fold(0.0, f64::max);
        let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
        for v in self.mask.iter() {
            let px = if max > 0.0 {
                (v / max * 255.0).round() as u8
            } else {
                0
            };
            bytes.push(px);
        }
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}
