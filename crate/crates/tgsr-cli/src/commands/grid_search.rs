use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use tgsr::data::read_label_indices;
use tgsr::grid::{grid_search_with, GridConfig, GridPoint, GridSpec, TRANSDUCTIVE_NOTE};
use tgsr::model::{LayoutSpec, Model, ModelMeta};
use tgsr::{
    build_augmented_problem, default_grid, load_domain_pair, solve, LabelMatrix, SolverOptions,
};

use crate::config::{
    err, parse_f64_list, parse_usize_list, required, solver_options, CliResult, FileConfig,
};
use crate::SolverFlags;

const LEDGER_HEADER: &str = "kappa_index,xi_index,kappa,xi,macro_f1,accuracy,iterations,converged";

fn point_row(p: &GridPoint) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        p.kappa_index, p.xi_index, p.kappa, p.xi, p.macro_f1, p.accuracy, p.iterations, p.converged
    )
}

fn read_ledger(path: &Path) -> CliResult<Vec<GridPoint>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == LEDGER_HEADER => {}
        other => {
            return Err(err(format!(
                "{}: not a grid ledger (header {other:?})",
                path.display()
            )))
        }
    }
    let rows: Vec<&str> = lines.collect();
    let mut points = Vec::new();
    for (i, line) in rows.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let parsed = (|| -> Option<GridPoint> {
            if fields.len() != 8 {
                return None;
            }
            Some(GridPoint {
                kappa_index: fields[0].parse().ok()?,
                xi_index: fields[1].parse().ok()?,
                kappa: fields[2].parse().ok()?,
                xi: fields[3].parse().ok()?,
                macro_f1: fields[4].parse().ok()?,
                accuracy: fields[5].parse().ok()?,
                iterations: fields[6].parse().ok()?,
                converged: fields[7].parse().ok()?,
            })
        })();
        match parsed {
            Some(p) => points.push(p),
            // an interrupted run may leave a torn final line; drop it
            None if i == rows.len() - 1 => {
                eprintln!("warning: dropping torn final ledger line {line:?}");
            }
            None => {
                return Err(err(format!(
                    "{}: bad ledger row {i}: {line:?}",
                    path.display()
                )))
            }
        }
    }
    Ok(points)
}

/// Completed points must map onto the current grid, or the resume is bogus.
fn check_ledger_against_grid(points: &[GridPoint], grid: &GridSpec) -> CliResult<()> {
    for p in points {
        let grid_kappa = grid.kappa_values.get(p.kappa_index);
        let grid_xi = grid.xi_values.get(p.xi_index);
        if grid_kappa != Some(&p.kappa) || grid_xi != Some(&p.xi) {
            return Err(err(format!(
                "ledger point (index {}, {}) = (kappa {}, xi {}) does not match the current grid; \
remove the ledger or rerun with the original grid",
                p.kappa_index, p.xi_index, p.kappa, p.xi
            )));
        }
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct GridSummary<'a> {
    note: &'a str,
    points_evaluated: usize,
    best: BestPoint<'a>,
}

#[derive(serde::Serialize)]
struct BestPoint<'a> {
    kappa: usize,
    xi: f64,
    macro_f1: f64,
    accuracy: f64,
    iterations: usize,
    converged: bool,
    model_file: &'a str,
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    manifest: Option<PathBuf>,
    target_labels: Option<PathBuf>,
    kappa_values: Option<String>,
    xi_values: Option<String>,
    solver: SolverFlags,
    standardize: bool,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> CliResult<u8> {
    let cfg = FileConfig::load(config.as_deref())?;
    let manifest = required(manifest, cfg.manifest.clone(), "manifest")?;
    let labels_path = required(target_labels, cfg.target_labels.clone(), "target-labels")?;
    let out_dir = required(out, cfg.out.clone(), "out")?;
    let standardize = standardize || cfg.standardize.unwrap_or(false);
    let jobs = jobs.or(cfg.jobs).unwrap_or(1).max(1);

    let raw_pair = load_domain_pair(&manifest)?;
    let (pair, stats) = if standardize {
        let (p, s) = raw_pair.standardize()?;
        (p, Some(s))
    } else {
        (raw_pair, None)
    };
    let truth = read_label_indices(&labels_path, pair.c())?;
    let target_labels =
        LabelMatrix::from_indices(&truth, pair.source_labels().categories().to_vec())?;

    let grid = GridSpec {
        kappa_values: match kappa_values.or(cfg.kappa_values.clone()) {
            Some(text) => parse_usize_list(&text, "kappa-values")?,
            None => (1..=pair.k()).collect(),
        },
        xi_values: match xi_values.or(cfg.xi_values.clone()) {
            Some(text) => parse_f64_list(&text, "xi-values")?,
            None => default_grid(pair.k()).xi_values,
        },
    };
    grid.validate(pair.k())?;

    // base solver options; kappa comes from the grid so any placeholder works
    let base = solver_options(
        &SolverFlags {
            kappa: Some(1),
            ..solver
        },
        &cfg,
    )?;
    base.validate(pair.k())?;

    std::fs::create_dir_all(&out_dir).map_err(|e| err(format!("{}: {e}", out_dir.display())))?;
    let ledger_path = out_dir.join("ledger.csv");
    let completed = if ledger_path.exists() {
        let points = read_ledger(&ledger_path)?;
        check_ledger_against_grid(&points, &grid)?;
        points
    } else {
        Vec::new()
    };
    if !completed.is_empty() {
        println!(
            "resuming: {} of {} points already complete",
            completed.len(),
            grid.len()
        );
    }

    // (re)write the ledger with the completed points so torn lines are gone
    let mut ledger_text = String::from(LEDGER_HEADER);
    ledger_text.push('\n');
    for p in &completed {
        ledger_text.push_str(&point_row(p));
        ledger_text.push('\n');
    }
    std::fs::write(&ledger_path, ledger_text)
        .map_err(|e| err(format!("{}: {e}", ledger_path.display())))?;
    let ledger_file = Mutex::new(
        std::fs::OpenOptions::new()
            .append(true)
            .open(&ledger_path)
            .map_err(|e| err(format!("{}: {e}", ledger_path.display())))?,
    );

    let gc = GridConfig { base, jobs };
    let result = grid_search_with(&pair, &target_labels, &grid, &gc, completed, |p| {
        let mut file = ledger_file.lock().expect("ledger mutex");
        let _ = writeln!(file, "{}", point_row(p));
        let _ = file.flush();
    })?;

    let grid_csv = out_dir.join("grid.csv");
    let mut text = String::from(LEDGER_HEADER);
    text.push('\n');
    for p in &result.points {
        text.push_str(&point_row(p));
        text.push('\n');
    }
    std::fs::write(&grid_csv, text).map_err(|e| err(format!("{}: {e}", grid_csv.display())))?;

    // retrain the winning point so the best model ships alongside the table
    let best = &result.best;
    let problem = build_augmented_problem(&pair, best.xi)?;
    let best_opts = SolverOptions {
        kappa: best.kappa,
        ..gc.base
    };
    let solved = solve(&problem, &best_opts)?;
    let model_path = out_dir.join("best_model.tgsr");
    let meta = ModelMeta {
        k: pair.k(),
        d: pair.d(),
        categories: pair.source_labels().categories().to_vec(),
        kappa: best.kappa,
        xi: best.xi,
        options: best_opts,
        converged: solved.converged,
        iterations: solved.iterations,
        final_feasibility: solved
            .feasibility_history
            .last()
            .copied()
            .unwrap_or(f64::NAN),
        selected_groups: solved.selected_groups,
        layout: Some(LayoutSpec {
            scales: pair.layout().scales().to_vec(),
            frame: pair.layout().frame(),
        }),
        standardization: stats,
    };
    Model::new(meta, solved.c_hat)?.save(&model_path)?;

    let summary = GridSummary {
        note: TRANSDUCTIVE_NOTE,
        points_evaluated: result.points.len(),
        best: BestPoint {
            kappa: best.kappa,
            xi: best.xi,
            macro_f1: best.macro_f1,
            accuracy: best.accuracy,
            iterations: best.iterations,
            converged: best.converged,
            model_file: "best_model.tgsr",
        },
    };
    let summary_path = out_dir.join("summary.json");
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).map_err(|e| err(e.to_string()))?,
    )
    .map_err(|e| err(format!("{}: {e}", summary_path.display())))?;

    println!("{TRANSDUCTIVE_NOTE}");
    println!(
        "best point: kappa={} xi={} macro_f1={:.4} accuracy={:.2}%",
        best.kappa,
        best.xi,
        best.macro_f1,
        best.accuracy * 100.0
    );
    println!("outputs in {}", out_dir.display());
    Ok(0)
}
