use std::path::PathBuf;

use tgsr::data::read_matrix_csv;
use tgsr::model::Model;

use crate::config::{err, required, CliResult, FileConfig};

/// Header + one row per sample: id, argmax class, class name, then the full
/// distribution, one column per category.
pub fn render_predictions(labels: &[tgsr::PredictedLabel], categories: &[String]) -> String {
    let mut text = String::from("sample_id,predicted_index,predicted_name");
    for name in categories {
        text.push_str(&format!(",p_{name}"));
    }
    text.push('\n');
    for (j, label) in labels.iter().enumerate() {
        text.push_str(&format!(
            "{j},{},{}",
            label.class_index, label.category_name
        ));
        for p in &label.distribution {
            text.push_str(&format!(",{p}"));
        }
        text.push('\n');
    }
    text
}

pub fn run(
    model_path: PathBuf,
    features_path: PathBuf,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> CliResult<u8> {
    let cfg = FileConfig::load(config.as_deref())?;
    let out = required(out, cfg.out.clone(), "out")?;

    let model = Model::load(&model_path)?;
    let features = read_matrix_csv(&features_path)?;
    let labels = model.predict(&features)?;
    let text = render_predictions(&labels, &model.meta.categories);
    std::fs::write(&out, text).map_err(|e| err(format!("{}: {e}", out.display())))?;
    println!("wrote {} predictions to {}", labels.len(), out.display());
    Ok(0)
}
