use std::path::{Path, PathBuf};

use tgsr::data::read_label_indices;
use tgsr::{confusion, evaluation_report};

use crate::config::{err, CliResult};

/// Predictions parsed back from the `predict` output: class indices plus the
/// category dictionary recovered from the distribution column headers.
pub struct ParsedPredictions {
    pub indices: Vec<usize>,
    pub categories: Vec<String>,
}

pub fn read_predictions(path: &Path) -> CliResult<ParsedPredictions> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| err(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| err(format!("{}: {e}", path.display())))?
        .clone();
    let expected = ["sample_id", "predicted_index", "predicted_name"];
    for (i, want) in expected.iter().enumerate() {
        if headers.get(i) != Some(want) {
            return Err(err(format!(
                "{}: not a predictions file (header column {i} is {:?}, expected {want:?})",
                path.display(),
                headers.get(i)
            )));
        }
    }
    let categories: Vec<String> = headers
        .iter()
        .skip(3)
        .map(|h| h.strip_prefix("p_").unwrap_or(h).to_string())
        .collect();
    if categories.is_empty() {
        return Err(err(format!(
            "{}: no distribution columns in header",
            path.display()
        )));
    }
    let mut indices = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(format!("{}: {e}", path.display())))?;
        let sample_id: usize = record
            .get(0)
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| err(format!("{}: row {row}: bad sample_id", path.display())))?;
        if sample_id != row {
            return Err(err(format!(
                "{}: misaligned sample ids (row {row} has id {sample_id})",
                path.display()
            )));
        }
        let idx: usize = record.get(1).and_then(|f| f.parse().ok()).ok_or_else(|| {
            err(format!(
                "{}: row {row}: bad predicted_index",
                path.display()
            ))
        })?;
        if idx >= categories.len() {
            return Err(err(format!(
                "{}: row {row}: predicted_index {idx} out of range",
                path.display()
            )));
        }
        indices.push(idx);
    }
    if indices.is_empty() {
        return Err(err(format!("{}: no prediction rows", path.display())));
    }
    Ok(ParsedPredictions {
        indices,
        categories,
    })
}

pub fn run(predictions: PathBuf, truth: PathBuf, out: Option<PathBuf>) -> CliResult<u8> {
    let parsed = read_predictions(&predictions)?;
    let truth_indices = read_label_indices(&truth, parsed.categories.len())?;
    if truth_indices.len() != parsed.indices.len() {
        return Err(err(format!(
            "misaligned files: {} predictions vs {} truth labels",
            parsed.indices.len(),
            truth_indices.len()
        )));
    }
    let cm = confusion(&parsed.indices, &truth_indices, parsed.categories)?;
    let report = evaluation_report(&cm)?;
    print!("{}", report.render_text());
    if let Some(out) = out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| err(format!("{}: {e}", out.display())))?;
        std::fs::write(&out, json).map_err(|e| err(format!("{}: {e}", out.display())))?;
        println!("report written to {}", out.display());
    }
    Ok(0)
}
