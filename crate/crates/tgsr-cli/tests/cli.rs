//! Command-level behavior: exit codes, file outputs, config merging,
//! resume, and the synth -> solve -> predict -> evaluate pipeline.

mod common;

use std::fs;
use std::path::Path;

use common::{assert_code, tgsr};
use ndarray::Array2;
use tgsr::model::{LayoutSpec, Model, ModelMeta};
use tgsr::SolverOptions;

fn synth_args<'a>(out: &'a str, seed: &'a str) -> Vec<&'a str> {
    vec![
        "synth",
        "--k",
        "12",
        "--d",
        "4",
        "--classes",
        "3",
        "--ns",
        "70",
        "--nt",
        "60",
        "--planted",
        "2,7,9",
        "--seed",
        seed,
        "--out",
        out,
    ]
}

#[test]
fn pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let r = tgsr(&synth_args("data", "42"), root);
    assert_code(&r, 0, "synth");
    assert!(root.join("data/manifest.json").exists());
    assert!(root.join("data/target_labels.csv").exists());

    let r = tgsr(
        &[
            "solve",
            "--manifest",
            "data/manifest.json",
            "--kappa",
            "3",
            "--xi",
            "0.5",
            "--out",
            "model.tgsr",
            "--history",
            "history.csv",
        ],
        root,
    );
    assert_code(&r, 0, "solve");
    assert!(
        r.stdout.contains("selected_groups=[2, 7, 9]"),
        "{}",
        r.stdout
    );

    let history = fs::read_to_string(root.join("history.csv")).unwrap();
    assert!(history.starts_with("iter,feasibility,regression,mmd,group_norm_sum\n"));
    assert!(history.lines().count() > 2);

    let r = tgsr(
        &[
            "predict",
            "--model",
            "model.tgsr",
            "--features",
            "data/target_features.csv",
            "--out",
            "preds.csv",
        ],
        root,
    );
    assert_code(&r, 0, "predict");
    let preds = fs::read_to_string(root.join("preds.csv")).unwrap();
    // one header plus one row per target sample
    assert_eq!(preds.lines().count(), 61);

    let r = tgsr(
        &[
            "evaluate",
            "--predictions",
            "preds.csv",
            "--truth",
            "data/target_labels.csv",
            "--out",
            "report.json",
        ],
        root,
    );
    assert_code(&r, 0, "evaluate");
    assert!(r.stdout.contains("macro F1"), "{}", r.stdout);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("report.json")).unwrap()).unwrap();
    assert!(report["macro_f1"].as_f64().unwrap() > 0.9);

    let r = tgsr(
        &[
            "report-regions",
            "--model",
            "model.tgsr",
            "--out",
            "regions",
        ],
        root,
    );
    assert_code(&r, 0, "report-regions");
    let csv = fs::read_to_string(root.join("regions/regions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4); // header + three selected groups
    assert!(root.join("regions/mask.pgm").exists());
}

#[test]
fn missing_manifest_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let r = tgsr(
        &[
            "solve",
            "--manifest",
            "nope/missing.json",
            "--kappa",
            "3",
            "--xi",
            "0",
            "--out",
            "m.tgsr",
        ],
        dir.path(),
    );
    assert_code(&r, 2, "missing manifest");
    assert!(r.stderr.contains("missing.json"), "{}", r.stderr);
}

#[test]
fn kappa_zero_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_code(&tgsr(&synth_args("data", "1"), root), 0, "synth");
    let r = tgsr(
        &[
            "solve",
            "--manifest",
            "data/manifest.json",
            "--kappa",
            "0",
            "--xi",
            "0",
            "--out",
            "m.tgsr",
        ],
        root,
    );
    assert_code(&r, 2, "kappa 0");
    assert!(r.stderr.contains("kappa"), "{}", r.stderr);
}

#[test]
fn non_convergence_exits_3_and_writes_flagged_model() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_code(&tgsr(&synth_args("data", "2"), root), 0, "synth");
    let r = tgsr(
        &[
            "solve",
            "--manifest",
            "data/manifest.json",
            "--kappa",
            "3",
            "--xi",
            "0",
            "--max-iter",
            "2",
            "--epsilon",
            "1e-14",
            "--out",
            "m.tgsr",
        ],
        root,
    );
    assert_code(&r, 3, "non-convergence");
    let model = Model::load(&root.join("m.tgsr")).unwrap();
    assert!(!model.meta.converged);
    assert_eq!(model.meta.iterations, 2);
}

#[test]
fn zero_model_predicts_uniform_class_zero() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let meta = ModelMeta {
        k: 2,
        d: 2,
        categories: vec!["a".into(), "b".into(), "c".into()],
        kappa: 1,
        xi: 0.0,
        options: SolverOptions::new(1),
        converged: true,
        iterations: 1,
        final_feasibility: 0.0,
        selected_groups: vec![],
        layout: None,
        standardization: None,
    };
    Model::new(meta, Array2::zeros((4, 3)))
        .unwrap()
        .save(&root.join("zero.tgsr"))
        .unwrap();
    fs::write(root.join("x.csv"), "1,2\n3,4\n5,6\n7,8\n").unwrap();
    let r = tgsr(
        &[
            "predict",
            "--model",
            "zero.tgsr",
            "--features",
            "x.csv",
            "--out",
            "p.csv",
        ],
        root,
    );
    assert_code(&r, 0, "predict zero model");
    let preds = fs::read_to_string(root.join("p.csv")).unwrap();
    let rows: Vec<&str> = preds.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[1], "0");
        for p in &fields[3..] {
            let v: f64 = p.parse().unwrap();
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }
}

#[test]
fn tampered_feature_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_code(&tgsr(&synth_args("data", "3"), root), 0, "synth");
    assert_code(
        &tgsr(
            &[
                "solve",
                "--manifest",
                "data/manifest.json",
                "--kappa",
                "3",
                "--xi",
                "0",
                "--out",
                "m.tgsr",
            ],
            root,
        ),
        0,
        "solve",
    );
    // drop one row per group: 12 groups * 3 dims = 36 rows instead of 48
    let full = fs::read_to_string(root.join("data/target_features.csv")).unwrap();
    let truncated: Vec<&str> = full.lines().take(36).collect();
    fs::write(root.join("bad.csv"), truncated.join("\n")).unwrap();
    let r = tgsr(
        &[
            "predict",
            "--model",
            "m.tgsr",
            "--features",
            "bad.csv",
            "--out",
            "p.csv",
        ],
        root,
    );
    assert_code(&r, 2, "tampered features");
}

fn write_hand_case_files(root: &Path) {
    // confusion [[2,1],[0,3]]: truth 0,0,0,1,1,1; preds 0,0,1,1,1,1
    let mut preds = String::from("sample_id,predicted_index,predicted_name,p_a,p_b\n");
    for (i, p) in [0usize, 0, 1, 1, 1, 1].iter().enumerate() {
        let name = if *p == 0 { "a" } else { "b" };
        preds.push_str(&format!("{i},{p},{name},0.5,0.5\n"));
    }
    fs::write(root.join("preds.csv"), preds).unwrap();
    fs::write(root.join("truth.csv"), "0\n0\n0\n1\n1\n1\n").unwrap();
}

#[test]
fn evaluate_hand_case_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_hand_case_files(root);
    let r = tgsr(
        &[
            "evaluate",
            "--predictions",
            "preds.csv",
            "--truth",
            "truth.csv",
            "--out",
            "report.json",
        ],
        root,
    );
    assert_code(&r, 0, "evaluate");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("report.json")).unwrap()).unwrap();
    let mf1 = report["macro_f1"].as_f64().unwrap();
    assert!((mf1 - 0.8285714285714285).abs() < 1e-9, "macro F1 {mf1}");
    let acc = report["accuracy"].as_f64().unwrap();
    assert!((acc - 5.0 / 6.0).abs() < 1e-12);
}

#[test]
fn evaluate_rejects_empty_and_misaligned_files() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("empty.csv"), "").unwrap();
    fs::write(root.join("truth.csv"), "0\n1\n").unwrap();
    let r = tgsr(
        &[
            "evaluate",
            "--predictions",
            "empty.csv",
            "--truth",
            "truth.csv",
        ],
        root,
    );
    assert_code(&r, 2, "empty predictions");

    write_hand_case_files(root);
    fs::write(root.join("short_truth.csv"), "0\n1\n").unwrap();
    let r = tgsr(
        &[
            "evaluate",
            "--predictions",
            "preds.csv",
            "--truth",
            "short_truth.csv",
        ],
        root,
    );
    assert_code(&r, 2, "misaligned lengths");
    assert!(r.stderr.contains("misaligned"), "{}", r.stderr);

    // shuffled sample ids
    let text = fs::read_to_string(root.join("preds.csv")).unwrap();
    let swapped = text.replace("\n0,0,a", "\n9,0,a");
    fs::write(root.join("shuffled.csv"), swapped).unwrap();
    let r = tgsr(
        &[
            "evaluate",
            "--predictions",
            "shuffled.csv",
            "--truth",
            "truth.csv",
        ],
        root,
    );
    assert_code(&r, 2, "misaligned ids");
}

#[test]
fn grid_search_writes_all_points_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_code(&tgsr(&synth_args("data", "4"), root), 0, "synth");
    let grid_args = [
        "grid-search",
        "--manifest",
        "data/manifest.json",
        "--target-labels",
        "data/target_labels.csv",
        "--kappa-values",
        "2,3",
        "--xi-values",
        "0,0.5",
        "--out",
        "grid",
    ];
    let r = tgsr(&grid_args, root);
    assert_code(&r, 0, "grid-search");
    let grid_csv = fs::read_to_string(root.join("grid/grid.csv")).unwrap();
    assert_eq!(grid_csv.lines().count(), 5, "{grid_csv}"); // header + 4 points
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("grid/summary.json")).unwrap()).unwrap();
    assert!(summary["best"]["macro_f1"].as_f64().unwrap() > 0.9);
    assert!(summary["note"].as_str().unwrap().contains("transductive"));
    assert!(root.join("grid/best_model.tgsr").exists());

    // simulate an interrupted run: keep the ledger but tamper one completed
    // row with a sentinel score; a resumed run must trust it verbatim
    let ledger = fs::read_to_string(root.join("grid/ledger.csv")).unwrap();
    let mut lines: Vec<String> = ledger.lines().map(String::from).collect();
    let fields: Vec<&str> = lines[1].split(',').collect();
    lines[1] = format!(
        "{},{},{},{},0.123456789,0.5,{},{}",
        fields[0], fields[1], fields[2], fields[3], fields[6], fields[7]
    );
    lines.truncate(3); // drop the last two points entirely
    fs::write(root.join("grid/ledger.csv"), lines.join("\n") + "\n").unwrap();
    fs::remove_file(root.join("grid/grid.csv")).unwrap();

    let r = tgsr(&grid_args, root);
    assert_code(&r, 0, "grid-search resume");
    assert!(r.stdout.contains("resuming: 2 of 4"), "{}", r.stdout);
    let grid_csv = fs::read_to_string(root.join("grid/grid.csv")).unwrap();
    assert!(
        grid_csv.contains("0.123456789"),
        "tampered ledger row was recomputed:\n{grid_csv}"
    );
    assert_eq!(grid_csv.lines().count(), 5);
}

#[test]
fn grid_search_rejects_mismatched_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_code(&tgsr(&synth_args("data", "5"), root), 0, "synth");
    fs::create_dir_all(root.join("grid")).unwrap();
    fs::write(
        root.join("grid/ledger.csv"),
        "kappa_index,xi_index,kappa,xi,macro_f1,accuracy,iterations,converged\n0,0,7,3.5,0.5,0.5,10,true\n",
    )
    .unwrap();
    let r = tgsr(
        &[
            "grid-search",
            "--manifest",
            "data/manifest.json",
            "--target-labels",
            "data/target_labels.csv",
            "--kappa-values",
            "2,3",
            "--xi-values",
            "0,0.5",
            "--out",
            "grid",
        ],
        root,
    );
    assert_code(&r, 2, "stale ledger");
    assert!(r.stderr.contains("does not match"), "{}", r.stderr);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_code(&tgsr(&synth_args("data", "6"), root), 0, "synth");
    fs::write(
        root.join("cfg.json"),
        r#"{"manifest": "data/manifest.json", "kappa": 3, "xi": 0.5, "out": "from_config.tgsr", "max_iter": 400}"#,
    )
    .unwrap();
    let r = tgsr(&["solve", "--config", "cfg.json"], root);
    assert_code(&r, 0, "solve from config");
    let model = Model::load(&root.join("from_config.tgsr")).unwrap();
    assert_eq!(model.meta.kappa, 3);
    assert_eq!(model.meta.options.max_iter, 400);

    // flags override the config
    let r = tgsr(
        &[
            "solve",
            "--config",
            "cfg.json",
            "--kappa",
            "2",
            "--out",
            "flagged.tgsr",
        ],
        root,
    );
    assert_code(&r, 0, "flag override");
    let model = Model::load(&root.join("flagged.tgsr")).unwrap();
    assert_eq!(model.meta.kappa, 2);
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::write(root.join("bad.json"), r#"{"kappa": 3, "banana": 1}"#).unwrap();
    let r = tgsr(
        &[
            "solve",
            "--config",
            "bad.json",
            "--manifest",
            "x.json",
            "--xi",
            "0",
            "--out",
            "m",
        ],
        root,
    );
    assert_code(&r, 2, "unknown config key");
    assert!(r.stderr.contains("banana"), "{}", r.stderr);
}

#[test]
fn report_regions_requires_layout() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let meta = ModelMeta {
        k: 2,
        d: 2,
        categories: vec!["a".into(), "b".into()],
        kappa: 1,
        xi: 0.0,
        options: SolverOptions::new(1),
        converged: true,
        iterations: 1,
        final_feasibility: 0.0,
        selected_groups: vec![0],
        layout: None,
        standardization: None,
    };
    Model::new(meta, Array2::zeros((4, 2)))
        .unwrap()
        .save(&root.join("nolayout.tgsr"))
        .unwrap();
    let r = tgsr(
        &["report-regions", "--model", "nolayout.tgsr", "--out", "r"],
        root,
    );
    assert_code(&r, 2, "model without layout");
    assert!(r.stderr.contains("layout"), "{}", r.stderr);
}

#[test]
fn report_regions_on_planted_model_lists_planted_rects() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    // an 85-group dataset exercises the real multi-scale layout
    let r = tgsr(
        &[
            "synth",
            "--k",
            "85",
            "--d",
            "3",
            "--classes",
            "3",
            "--ns",
            "80",
            "--nt",
            "60",
            "--planted",
            "0,21,84",
            "--seed",
            "9",
            "--out",
            "data",
        ],
        root,
    );
    assert_code(&r, 0, "synth 85");
    assert_code(
        &tgsr(
            &[
                "solve",
                "--manifest",
                "data/manifest.json",
                "--kappa",
                "3",
                "--xi",
                "0",
                "--out",
                "m.tgsr",
            ],
            root,
        ),
        0,
        "solve",
    );
    assert_code(
        &tgsr(&["report-regions", "--model", "m.tgsr", "--out", "r"], root),
        0,
        "report",
    );
    let csv = fs::read_to_string(root.join("r/regions.csv")).unwrap();
    // group 84 is the bottom-right 8x8 cell of the 112x112 frame
    assert!(
        csv.lines().any(|l| l.starts_with("84,8,7,7,98,98,14,14")),
        "{csv}"
    );
    assert!(
        csv.lines().any(|l| l.starts_with("0,1,0,0,0,0,112,112")),
        "{csv}"
    );
}

#[test]
fn report_regions_on_zero_model_is_empty_and_black() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let meta = ModelMeta {
        k: 5,
        d: 2,
        categories: vec!["a".into(), "b".into()],
        kappa: 1,
        xi: 0.0,
        options: SolverOptions::new(1),
        converged: true,
        iterations: 1,
        final_feasibility: 0.0,
        selected_groups: vec![],
        layout: Some(LayoutSpec {
            scales: vec![1, 2],
            frame: (8, 8),
        }),
        standardization: None,
    };
    Model::new(meta, Array2::zeros((10, 2)))
        .unwrap()
        .save(&root.join("zero.tgsr"))
        .unwrap();
    let r = tgsr(
        &["report-regions", "--model", "zero.tgsr", "--out", "r"],
        root,
    );
    assert_code(&r, 0, "report zero model");
    let csv = fs::read_to_string(root.join("r/regions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "only the header expected: {csv}");
    let pgm = fs::read(root.join("r/mask.pgm")).unwrap();
    let header = b"P5\n8 8\n255\n";
    assert_eq!(&pgm[..header.len()], header);
    assert!(
        pgm[header.len()..].iter().all(|&b| b == 0),
        "mask must be black"
    );
}

#[test]
fn standardize_round_trips_through_model() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_code(&tgsr(&synth_args("data", "7"), root), 0, "synth");
    let r = tgsr(
        &[
            "solve",
            "--manifest",
            "data/manifest.json",
            "--kappa",
            "3",
            "--xi",
            "0",
            "--standardize",
            "--out",
            "m.tgsr",
        ],
        root,
    );
    assert_code(&r, 0, "solve standardized");
    let model = Model::load(&root.join("m.tgsr")).unwrap();
    assert!(model.meta.standardization.is_some());
    // prediction applies the stored transform to raw features
    let r = tgsr(
        &[
            "predict",
            "--model",
            "m.tgsr",
            "--features",
            "data/target_features.csv",
            "--out",
            "p.csv",
        ],
        root,
    );
    assert_code(&r, 0, "predict standardized");
    assert_code(
        &tgsr(
            &[
                "evaluate",
                "--predictions",
                "p.csv",
                "--truth",
                "data/target_labels.csv",
            ],
            root,
        ),
        0,
        "evaluate standardized",
    );
}
