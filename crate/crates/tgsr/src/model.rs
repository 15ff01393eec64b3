//! Self-describing single-file model archive.
//!
//! Layout: a magic/version line, one line of JSON metadata, then the
//! regression matrix as `K*d` CSV rows of `C` columns. Numbers are written
//! in shortest round-trip form, so save/load is bit-exact and prediction
//! never needs the original manifest.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::Standardization;
use crate::error::{Error, Result};
use crate::layout::{build_grid_layout, GroupLayout};
use crate::predict::{classify_batch, PredictedLabel};
use crate::solver::SolverOptions;

const MAGIC: &str = "tgsr-model v1";

/// Compact layout description; regions rebuild deterministically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutSpec {
    pub scales: Vec<usize>,
    pub frame: (usize, usize),
}

impl LayoutSpec {
    pub fn build(&self) -> Result<GroupLayout> {
        build_grid_layout(&self.scales, self.frame)
    }
}

/// Everything about a trained model except the matrix itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub k: usize,
    pub d: usize,
    pub categories: Vec<String>,
    pub kappa: usize,
    pub xi: f64,
    pub options: SolverOptions,
    pub converged: bool,
    pub iterations: usize,
    pub final_feasibility: f64,
    pub selected_groups: Vec<usize>,
    pub layout: Option<LayoutSpec>,
    pub standardization: Option<Standardization>,
}

/// A trained model: metadata plus the `(K*d) x C` regression matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub meta: ModelMeta,
    pub c_hat: Array2<f64>,
}

impl Model {
    pub fn new(meta: ModelMeta, c_hat: Array2<f64>) -> Result<Self> {
        if c_hat.nrows() != meta.k * meta.d || c_hat.ncols() != meta.categories.len() {
            return Err(Error::ShapeMismatch(format!(
                "model matrix must be {}x{}, got {}x{}",
                meta.k * meta.d,
                meta.categories.len(),
                c_hat.nrows(),
                c_hat.ncols()
            )));
        }
        Ok(Self { meta, c_hat })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let header =
            serde_json::to_string(&self.meta).map_err(|e| Error::format(path, e.to_string()))?;
        let mut out = String::with_capacity(header.len() + self.c_hat.len() * 24);
        out.push_str(MAGIC);
        out.push('\n');
        out.push_str(&header);
        out.push('\n');
        for row in self.c_hat.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        match lines.next() {
            Some(line) if line.trim_end() == MAGIC => {}
            other => {
                return Err(Error::format(
                    path,
                    format!("not a model file (first line {other:?}, expected {MAGIC:?})"),
                ))
            }
        }
        let header = lines
            .next()
            .ok_or_else(|| Error::format(path, "missing metadata line"))?;
        let meta: ModelMeta =
            serde_json::from_str(header).map_err(|e| Error::format(path, e.to_string()))?;
        let rows = meta.k * meta.d;
        let cols = meta.categories.len();
        let mut c_hat = Array2::<f64>::zeros((rows, cols));
        let mut count = 0usize;
        for (r, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            if r >= rows {
                return Err(Error::format(path, format!("more than {rows} matrix rows")));
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(Error::format(
                    path,
                    format!("row {r}: expected {cols} columns, got {}", fields.len()),
                ));
            }
            for (c, field) in fields.iter().enumerate() {
                c_hat[(r, c)] = field.parse().map_err(|_| {
                    Error::format(path, format!("row {r}, column {c}: bad number {field:?}"))
                })?;
            }
            count += 1;
        }
        if count != rows {
            return Err(Error::format(
                path,
                format!("expected {rows} matrix rows, got {count}"),
            ));
        }
        Self::new(meta, c_hat)
    }

    /// Predict every column of a raw feature matrix, applying the stored
    /// standardization when the model was trained with one.
    pub fn predict(&self, features: &Array2<f64>) -> Result<Vec<PredictedLabel>> {
        if features.nrows() != self.meta.k * self.meta.d {
            return Err(Error::ShapeMismatch(format!(
                "features have {} rows, model expects K*d = {}",
                features.nrows(),
                self.meta.k * self.meta.d
            )));
        }
        let prepared;
        let view = if let Some(stats) = &self.meta.standardization {
            let mut owned = features.clone();
            stats.apply(&mut owned)?;
            prepared = owned;
            prepared.view()
        } else {
            features.view()
        };
        classify_batch(
            &self.c_hat.view(),
            self.meta.d,
            &view,
            &self.meta.categories,
        )
    }
}
