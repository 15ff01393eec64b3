//! Classification metrics: confusion matrix, per-class precision/recall/F1,
//! macro F1 and accuracy. Macro F1 averages per-class F1 scores with equal
//! weight, which is the metric of record for class-imbalanced evaluation;
//! degenerate classes (zero row/column) contribute an F1 of zero.

use serde::Serialize;

use crate::error::{Error, Result};

/// `C x C` count matrix; rows index the true class, columns the prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
    categories: Vec<String>,
}

/// Per-class metrics plus the two aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub categories: Vec<String>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub total: u64,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>, categories: Vec<String>) -> Result<Self> {
        let c = categories.len();
        if counts.len() != c || counts.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch(format!(
                "confusion matrix must be {c}x{c}"
            )));
        }
        Ok(Self { counts, categories })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Tally predictions against ground truth.
pub fn confusion(
    preds: &[usize],
    truth: &[usize],
    categories: Vec<String>,
) -> Result<ConfusionMatrix> {
    if preds.len() != truth.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions vs {} truth labels",
            preds.len(),
            truth.len()
        )));
    }
    let c = categories.len();
    let mut counts = vec![vec![0u64; c]; c];
    for (i, (&p, &t)) in preds.iter().zip(truth.iter()).enumerate() {
        if p >= c || t >= c {
            return Err(Error::InvalidInput(format!(
                "sample {i}: class index out of range (pred {p}, truth {t}, C = {c})"
            )));
        }
        counts[t][p] += 1;
    }
    ConfusionMatrix::from_counts(counts, categories)
}

/// Unweighted mean of per-class F1. Precision/recall with a zero denominator
/// count as zero, and a class with `p + r = 0` contributes F1 = 0.
pub fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    let c = cm.categories.len();
    let mut sum = 0.0;
    for cls in 0..c {
        let (p, r) = precision_recall(cm, cls);
        if p + r > 0.0 {
            sum += 2.0 * p * r / (p + r);
        }
    }
    sum / c as f64
}

fn precision_recall(cm: &ConfusionMatrix, cls: usize) -> (f64, f64) {
    let diag = cm.counts[cls][cls] as f64;
    let col: u64 = (0..cm.categories.len()).map(|t| cm.counts[t][cls]).sum();
    let row: u64 = cm.counts[cls].iter().sum();
    let p = if col > 0 { diag / col as f64 } else { 0.0 };
    let r = if row > 0 { diag / row as f64 } else { 0.0 };
    (p, r)
}

/// Fraction of correct predictions. Errors on an empty matrix.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidInput(
            "accuracy undefined for an empty confusion matrix".into(),
        ));
    }
    let trace: u64 = (0..cm.categories.len()).map(|i| cm.counts[i][i]).sum();
    Ok(trace as f64 / total as f64)
}

/// Assemble the full report for a confusion matrix.
pub fn evaluation_report(cm: &ConfusionMatrix) -> Result<EvaluationReport> {
    let c = cm.categories.len();
    let mut precision = Vec::with_capacity(c);
    let mut recall = Vec::with_capacity(c);
    let mut f1 = Vec::with_capacity(c);
    for cls in 0..c {
        let (p, r) = precision_recall(cm, cls);
        precision.push(p);
        recall.push(r);
        f1.push(if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        });
    }
    Ok(EvaluationReport {
        categories: cm.categories.clone(),
        precision,
        recall,
        macro_f1: macro_f1(cm),
        accuracy: accuracy(cm)?,
        total: cm.total(),
        counts: cm.counts.clone(),
        f1,
    })
}

impl EvaluationReport {
    /// Human-readable rendering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<16} {:>10} {:>10} {:>10}\n",
            "class", "precision", "recall", "f1"
        ));
        for (i, name) in self.categories.iter().enumerate() {
            out.push_str(&format!(
                "{:<16} {:>10.4} {:>10.4} {:>10.4}\n",
                name, self.precision[i], self.recall[i], self.f1[i]
            ));
        }
        out.push_str(&format!("macro F1: {:.4}\n", self.macro_f1));
        out.push_str(&format!(
            "accuracy: {:.2}% ({} samples)\n",
            self.accuracy * 100.0,
            self.total
        ));
        out
    }
}
