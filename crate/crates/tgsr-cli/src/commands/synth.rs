use std::path::PathBuf;

use tgsr::data::{save_domain_pair, write_label_indices};
use tgsr::synth::{generate, SyntheticSpec};

use crate::config::{err, parse_usize_list, required, CliResult, FileConfig};

#[allow(clippy::too_many_arguments)]
pub fn run(
    k: Option<usize>,
    d: Option<usize>,
    classes: Option<usize>,
    ns: Option<usize>,
    nt: Option<usize>,
    planted: Option<String>,
    shift: Option<f64>,
    noise: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> CliResult<u8> {
    let cfg = FileConfig::load(config.as_deref())?;
    let out_dir = required(out, cfg.out.clone(), "out")?;
    let planted_text = required(planted, cfg.planted.clone(), "planted")?;
    let spec = SyntheticSpec {
        k: required(k, cfg.k, "k")?,
        d: required(d, cfg.d, "d")?,
        c: required(classes, cfg.classes, "classes")?,
        n_source: required(ns, cfg.ns, "ns")?,
        n_target: required(nt, cfg.nt, "nt")?,
        planted: parse_usize_list(&planted_text, "planted")?,
        shift_magnitude: shift.or(cfg.shift).unwrap_or(0.0),
        noise_sigma: noise.or(cfg.noise).unwrap_or(0.0),
        seed: seed.or(cfg.seed).unwrap_or(0),
    };

    let data = generate(&spec)?;
    let manifest = save_domain_pair(&data.pair, &out_dir)?;
    write_label_indices(
        &out_dir.join("target_labels.csv"),
        &data.target_labels.class_indices(),
    )?;
    let spec_json = serde_json::to_string_pretty(&spec).map_err(|e| err(e.to_string()))?;
    let spec_path = out_dir.join("synth_spec.json");
    std::fs::write(&spec_path, spec_json)
        .map_err(|e| err(format!("{}: {e}", spec_path.display())))?;

    println!(
        "synthetic dataset: K={} d={} C={} Ns={} Nt={} planted={:?} seed={}",
        spec.k, spec.d, spec.c, spec.n_source, spec.n_target, data.planted, spec.seed
    );
    println!("manifest written to {}", manifest.display());
    Ok(0)
}
