//! Prediction: score a sample through the regression matrix, project the
//! score vector onto the probability simplex, and read the class off the
//! argmax. The projection is the exact closed-form solution of the
//! constrained least-squares labeling problem, computed by sort-and-threshold
//! in O(C log C).

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// A predicted label distribution with its argmax class.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedLabel {
    /// Point on the probability simplex, length C.
    pub distribution: Vec<f64>,
    /// Argmax of the distribution; lowest index wins ties.
    pub class_index: usize,
    pub category_name: String,
}

/// Raw score vector `v = C_hat^T x`, accumulated group by group.
pub fn score(
    c_hat: &ArrayView2<f64>,
    d_per_group: usize,
    x: &ArrayView1<f64>,
) -> Result<Array1<f64>> {
    let kd = c_hat.nrows();
    if x.len() != kd {
        return Err(Error::ShapeMismatch(format!(
            "feature vector has {} entries, model expects {kd}",
            x.len()
        )));
    }
    if !kd.is_multiple_of(d_per_group) {
        return Err(Error::ShapeMismatch(format!(
            "rows {kd} not divisible by group dimension {d_per_group}"
        )));
    }
    let c = c_hat.ncols();
    let mut v = Array1::<f64>::zeros(c);
    let k = kd / d_per_group;
    for i in 0..k {
        let rows = i * d_per_group..(i + 1) * d_per_group;
        let block = c_hat.slice(ndarray::s![rows.clone(), ..]);
        let xi = x.slice(ndarray::s![rows]);
        v += &block.t().dot(&xi);
    }
    Ok(v)
}

/// Euclidean projection of `v` onto `{ l : l >= 0, sum(l) = 1 }`.
pub fn project_simplex(v: &ArrayView1<f64>) -> Result<Array1<f64>> {
    if v.is_empty() {
        return Err(Error::InvalidInput("cannot project an empty vector".into()));
    }
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("projection input contains {bad}")));
    }
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (i as f64 + 1.0);
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    Ok(v.mapv(|x| (x - theta).max(0.0)))
}

/// Argmax with the lowest index winning ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Full prediction for one sample.
pub fn classify(
    c_hat: &ArrayView2<f64>,
    d_per_group: usize,
    x: &ArrayView1<f64>,
    categories: &[String],
) -> Result<PredictedLabel> {
    if categories.len() != c_hat.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "model has {} outputs but {} category names",
            c_hat.ncols(),
            categories.len()
        )));
    }
    let v = score(c_hat, d_per_group, x)?;
    let distribution = project_simplex(&v.view())?;
    let class_index = argmax(distribution.as_slice().expect("contiguous"));
    Ok(PredictedLabel {
        distribution: distribution.to_vec(),
        class_index,
        category_name: categories[class_index].clone(),
    })
}

/// Predict every column of a `(K*d) x N` feature matrix.
pub fn classify_batch(
    c_hat: &ArrayView2<f64>,
    d_per_group: usize,
    features: &ArrayView2<f64>,
    categories: &[String],
) -> Result<Vec<PredictedLabel>> {
    if features.nrows() != c_hat.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "features have {} rows, model expects {}",
            features.nrows(),
            c_hat.nrows()
        )));
    }
    (0..features.ncols())
        .map(|j| classify(c_hat, d_per_group, &features.column(j), categories))
        .collect()
}
