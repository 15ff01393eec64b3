//! Grouped feature/label data model and its on-disk format.
//!
//! Features live in a `(K*d) x N` matrix: column `j` is the concatenated
//! per-region feature vector of sample `j`, and group `i` occupies the row
//! band `[i*d, (i+1)*d)`. Labels are a one-hot `C x N` matrix with a named
//! category dictionary.
//!
//! On disk a dataset is a JSON manifest plus CSV matrices:
//!
//! * manifest keys: `source_features`, `target_features`, `source_labels`,
//!   `scales`, `frame`, `d`, `categories`; relative paths resolve against
//!   the manifest's directory;
//! * feature files: headerless CSV, `K*d` rows, one column per sample;
//! * label files: headerless CSV, one row per sample holding the integer
//!   category index in `[0, C)`.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{build_grid_layout, GroupLayout};

/// K groups of d-dimensional features for N samples, stored `(K*d) x N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedFeatureMatrix {
    k: usize,
    d: usize,
    data: Array2<f64>,
}

impl GroupedFeatureMatrix {
    pub fn new(k: usize, d: usize, data: Array2<f64>) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(Error::InvalidInput(
                "feature matrix: K and d must be >= 1".into(),
            ));
        }
        if data.nrows() != k * d {
            return Err(Error::ShapeMismatch(format!(
                "feature matrix: expected {} rows (K={k} * d={d}), got {}",
                k * d,
                data.nrows()
            )));
        }
        if data.ncols() == 0 {
            return Err(Error::InvalidInput(
                "feature matrix: must contain at least one sample".into(),
            ));
        }
        if let Some(((r, c), v)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "feature matrix entry ({r}, {c}) = {v}"
            )));
        }
        Ok(Self { k, d, data })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Sample count N.
    pub fn n(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    /// Read-only view of group `i`: rows `[i*d, (i+1)*d)`.
    pub fn group_slice(&self, i: usize) -> Result<ArrayView2<'_, f64>> {
        if i >= self.k {
            return Err(Error::InvalidInput(format!(
                "group index {i} out of range (K = {})",
                self.k
            )));
        }
        Ok(self
            .data
            .slice(ndarray::s![i * self.d..(i + 1) * self.d, ..]))
    }

    /// Column mean over samples, one value per feature dimension.
    pub fn column_mean(&self) -> ndarray::Array1<f64> {
        self.data.mean_axis(Axis(1)).expect("n >= 1")
    }
}

/// One-hot `C x N` label matrix with category names.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    data: Array2<f64>,
    categories: Vec<String>,
}

impl LabelMatrix {
    pub fn new(data: Array2<f64>, categories: Vec<String>) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::InvalidInput("categories: must not be empty".into()));
        }
        if data.nrows() != categories.len() {
            return Err(Error::ShapeMismatch(format!(
                "label matrix: {} rows but {} categories",
                data.nrows(),
                categories.len()
            )));
        }
        for (j, col) in data.axis_iter(Axis(1)).enumerate() {
            let mut ones = 0usize;
            for &v in col.iter() {
                if v == 1.0 {
                    ones += 1;
                } else if v != 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "label column {j} is not one-hot: entry {v} is neither 0 nor 1"
                    )));
                }
            }
            if ones != 1 {
                return Err(Error::InvalidInput(format!(
                    "label column {j} is not one-hot: {ones} entries set"
                )));
            }
        }
        Ok(Self { data, categories })
    }

    pub fn from_indices(indices: &[usize], categories: Vec<String>) -> Result<Self> {
        let c = categories.len();
        if c == 0 {
            return Err(Error::InvalidInput("categories: must not be empty".into()));
        }
        let mut data = Array2::<f64>::zeros((c, indices.len()));
        for (j, &idx) in indices.iter().enumerate() {
            if idx >= c {
                return Err(Error::InvalidInput(format!(
                    "label {idx} at sample {j} out of range (C = {c})"
                )));
            }
            data[(idx, j)] = 1.0;
        }
        Self::new(data, categories)
    }

    /// Category count C.
    pub fn c(&self) -> usize {
        self.categories.len()
    }

    pub fn n(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    /// Class index of each sample (position of the 1 in its column).
    pub fn class_indices(&self) -> Vec<usize> {
        self.data
            .axis_iter(Axis(1))
            .map(|col| col.iter().position(|&v| v == 1.0).expect("one-hot"))
            .collect()
    }
}

/// Per-dimension affine transform fitted on the source domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    /// Fit mean/std on the source matrix. Dimensions with zero variance
    /// keep scale 1 so constant features pass through centered.
    pub fn fit(source: &GroupedFeatureMatrix) -> Self {
        let n = source.n() as f64;
        let mean = source.column_mean();
        let mut std = vec![0.0; source.data().nrows()];
        for (r, row) in source.data().axis_iter(Axis(0)).enumerate() {
            let m = mean[r];
            let var = row.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let s = var.sqrt();
            std[r] = if s > 0.0 { s } else { 1.0 };
        }
        Self {
            mean: mean.to_vec(),
            std,
        }
    }

    pub fn apply(&self, data: &mut Array2<f64>) -> Result<()> {
        if data.nrows() != self.mean.len() {
            return Err(Error::ShapeMismatch(format!(
                "standardization fitted on {} dims, data has {} rows",
                self.mean.len(),
                data.nrows()
            )));
        }
        for (r, mut row) in data.axis_iter_mut(Axis(0)).enumerate() {
            let (m, s) = (self.mean[r], self.std[r]);
            row.mapv_inplace(|v| (v - m) / s);
        }
        Ok(())
    }
}

/// A source/target dataset pair sharing one grid layout.
#[derive(Debug, Clone)]
pub struct DomainPair {
    source: GroupedFeatureMatrix,
    target: GroupedFeatureMatrix,
    source_labels: LabelMatrix,
    layout: GroupLayout,
}

impl DomainPair {
    pub fn new(
        source: GroupedFeatureMatrix,
        target: GroupedFeatureMatrix,
        source_labels: LabelMatrix,
        layout: GroupLayout,
    ) -> Result<Self> {
        if source.k() != layout.k() || target.k() != layout.k() {
            return Err(Error::ShapeMismatch(format!(
                "group count mismatch: source K={}, target K={}, layout K={}",
                source.k(),
                target.k(),
                layout.k()
            )));
        }
        if source.d() != target.d() {
            return Err(Error::ShapeMismatch(format!(
                "per-group dimension mismatch: source d={}, target d={}",
                source.d(),
                target.d()
            )));
        }
        if source.n() != source_labels.n() {
            return Err(Error::ShapeMismatch(format!(
                "source has {} samples but labels cover {}",
                source.n(),
                source_labels.n()
            )));
        }
        Ok(Self {
            source,
            target,
            source_labels,
            layout,
        })
    }

    pub fn source(&self) -> &GroupedFeatureMatrix {
        &self.source
    }

    pub fn target(&self) -> &GroupedFeatureMatrix {
        &self.target
    }

    pub fn source_labels(&self) -> &LabelMatrix {
        &self.source_labels
    }

    pub fn layout(&self) -> &GroupLayout {
        &self.layout
    }

    pub fn k(&self) -> usize {
        self.layout.k()
    }

    pub fn d(&self) -> usize {
        self.source.d()
    }

    pub fn c(&self) -> usize {
        self.source_labels.c()
    }

    /// Standardize both domains with statistics fitted on the source.
    pub fn standardize(&self) -> Result<(DomainPair, Standardization)> {
        let stats = Standardization::fit(&self.source);
        let mut src = self.source.data().clone();
        let mut tgt = self.target.data().clone();
        stats.apply(&mut src)?;
        stats.apply(&mut tgt)?;
        let pair = DomainPair::new(
            GroupedFeatureMatrix::new(self.k(), self.d(), src)?,
            GroupedFeatureMatrix::new(self.k(), self.d(), tgt)?,
            self.source_labels.clone(),
            self.layout.clone(),
        )?;
        Ok((pair, stats))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    source_features: String,
    target_features: String,
    source_labels: String,
    scales: Vec<usize>,
    frame: (usize, usize),
    d: usize,
    categories: Vec<String>,
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Read a headerless numeric CSV into a dense matrix.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e.to_string()))?;
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::format(
                    path,
                    format!("row {i}, column {j}: not a number: {field:?}"),
                )
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::format(path, "empty matrix file"));
    }
    let ncols = rows[0].len();
    let nrows = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((nrows, ncols), flat)
        .map_err(|e| Error::format(path, format!("ragged rows: {e}")))
}

/// Write a dense matrix as headerless CSV, one line per row.
pub fn write_matrix_csv(path: &Path, m: &ArrayView2<f64>) -> Result<()> {
    let mut out = String::new();
    for row in m.axis_iter(Axis(0)) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a label file: one integer per row, each in `[0, C)`.
pub fn read_label_indices(path: &Path, c: usize) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let idx: usize = line
            .parse()
            .map_err(|_| Error::format(path, format!("row {i}: not an integer label: {line:?}")))?;
        if idx >= c {
            return Err(Error::format(
                path,
                format!("row {i}: label {idx} out of range (C = {c})"),
            ));
        }
        labels.push(idx);
    }
    if labels.is_empty() {
        return Err(Error::format(path, "empty label file"));
    }
    Ok(labels)
}

pub fn write_label_indices(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::new();
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Load a full source/target pair from a manifest file.
pub fn load_domain_pair(manifest_path: &Path) -> Result<DomainPair> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::format(manifest_path, e.to_string()))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let layout = build_grid_layout(&manifest.scales, manifest.frame)?;
    let k = layout.k();
    let d = manifest.d;

    let src_path = resolve(base, &manifest.source_features);
    let src_raw = read_matrix_csv(&src_path)?;
    if src_raw.nrows() != k * d {
        return Err(Error::format(
            &src_path,
            format!(
                "expected {} rows (K={k} * d={d}), got {}",
                k * d,
                src_raw.nrows()
            ),
        ));
    }
    let source = GroupedFeatureMatrix::new(k, d, src_raw)?;

    let tgt_path = resolve(base, &manifest.target_features);
    let tgt_raw = read_matrix_csv(&tgt_path)?;
    if tgt_raw.nrows() != k * d {
        return Err(Error::format(
            &tgt_path,
            format!(
                "expected {} rows (K={k} * d={d}), got {}",
                k * d,
                tgt_raw.nrows()
            ),
        ));
    }
    let target = GroupedFeatureMatrix::new(k, d, tgt_raw)?;

    let lbl_path = resolve(base, &manifest.source_labels);
    let indices = read_label_indices(&lbl_path, manifest.categories.len())?;
    let source_labels = LabelMatrix::from_indices(&indices, manifest.categories)?;

    DomainPair::new(source, target, source_labels, layout)
}

/// Write a pair into `dir` using the canonical file names; returns the
/// manifest path. The target's labels, when known, are saved separately by
/// the caller (they are not part of the manifest schema).
pub fn save_domain_pair(pair: &DomainPair, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix_csv(
        &dir.join("source_features.csv"),
        &pair.source().data().view(),
    )?;
    write_matrix_csv(
        &dir.join("target_features.csv"),
        &pair.target().data().view(),
    )?;
    let labels = pair.source_labels().class_indices();
    write_label_indices(&dir.join("source_labels.csv"), &labels)?;
    let manifest = Manifest {
        source_features: "source_features.csv".into(),
        target_features: "target_features.csv".into(),
        source_labels: "source_labels.csv".into(),
        scales: pair.layout().scales().to_vec(),
        frame: pair.layout().frame(),
        d: pair.d(),
        categories: pair.source_labels().categories().to_vec(),
    };
    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::format(&manifest_path, e.to_string()))?;
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}
