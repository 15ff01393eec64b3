use std::path::PathBuf;

use tgsr::model::{LayoutSpec, Model, ModelMeta};
use tgsr::{build_augmented_problem, load_domain_pair, solve};

use crate::config::{required, solver_options, CliResult, FileConfig};
use crate::SolverFlags;

#[allow(clippy::too_many_arguments)]
pub fn run(
    manifest: Option<PathBuf>,
    solver: SolverFlags,
    standardize: bool,
    history: Option<PathBuf>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> CliResult<u8> {
    let cfg = FileConfig::load(config.as_deref())?;
    let manifest = required(manifest, cfg.manifest.clone(), "manifest")?;
    let out = required(out, cfg.out.clone(), "out")?;
    let xi = required(solver.xi, cfg.xi, "xi")?;
    let standardize = standardize || cfg.standardize.unwrap_or(false);
    let opts = solver_options(&solver, &cfg)?;

    let raw_pair = load_domain_pair(&manifest)?;
    opts.validate(raw_pair.k())?;
    let (pair, stats) = if standardize {
        let (p, s) = raw_pair.standardize()?;
        (p, Some(s))
    } else {
        (raw_pair, None)
    };

    let problem = build_augmented_problem(&pair, xi)?;
    let result = solve(&problem, &opts)?;

    if let Some(history_path) = &history {
        let mut text = String::from("iter,feasibility,regression,mmd,group_norm_sum\n");
        for (i, (feas, obj)) in result
            .feasibility_history
            .iter()
            .zip(result.objective_history.iter())
            .enumerate()
        {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                i + 1,
                feas,
                obj.regression,
                obj.mmd,
                obj.group_norm_sum
            ));
        }
        std::fs::write(history_path, text)
            .map_err(|e| crate::config::err(format!("{}: {e}", history_path.display())))?;
    }

    let meta = ModelMeta {
        k: pair.k(),
        d: pair.d(),
        categories: pair.source_labels().categories().to_vec(),
        kappa: opts.kappa,
        xi,
        options: opts,
        converged: result.converged,
        iterations: result.iterations,
        final_feasibility: result
            .feasibility_history
            .last()
            .copied()
            .unwrap_or(f64::NAN),
        selected_groups: result.selected_groups.clone(),
        layout: Some(LayoutSpec {
            scales: pair.layout().scales().to_vec(),
            frame: pair.layout().frame(),
        }),
        standardization: stats,
    };
    Model::new(meta, result.c_hat)?.save(&out)?;

    println!(
        "solved: kappa={} xi={} iterations={} converged={} selected_groups={:?}",
        opts.kappa, xi, result.iterations, result.converged, result.selected_groups
    );
    println!("model written to {}", out.display());
    if result.converged {
        Ok(0)
    } else {
        eprintln!(
            "warning: not converged within {} iterations (final feasibility {:e})",
            opts.max_iter,
            result
                .feasibility_history
                .last()
                .copied()
                .unwrap_or(f64::NAN)
        );
        Ok(3)
    }
}
