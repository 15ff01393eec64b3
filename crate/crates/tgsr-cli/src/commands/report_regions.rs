use std::path::PathBuf;

use tgsr::model::Model;
use tgsr::regions::{region_report, DEFAULT_NORM_TOL};

use crate::config::{err, required, CliResult, FileConfig};

pub fn run(
    model_path: PathBuf,
    tol: Option<f64>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> CliResult<u8> {
    let cfg = FileConfig::load(config.as_deref())?;
    let out_dir = required(out, cfg.out.clone(), "out")?;
    let tol = tol.or(cfg.tol).unwrap_or(DEFAULT_NORM_TOL);
    if tol < 0.0 {
        return Err(err(format!("tol: must be >= 0, got {tol}")));
    }

    let model = Model::load(&model_path)?;
    let layout_spec = model
        .meta
        .layout
        .as_ref()
        .ok_or_else(|| err("model carries no layout; cannot map groups to regions"))?;
    let layout = layout_spec.build()?;

    let report = region_report(&model.c_hat.view(), model.meta.d, &layout, tol)?;
    std::fs::create_dir_all(&out_dir).map_err(|e| err(format!("{}: {e}", out_dir.display())))?;
    report.write_csv(&out_dir.join("regions.csv"))?;
    report.write_mask_pgm(&out_dir.join("mask.pgm"))?;
    println!(
        "{} selected regions; wrote regions.csv and mask.pgm to {}",
        report.selected.len(),
        out_dir.display()
    );
    Ok(0)
}
