//! Transfer group sparse regression for cross-database classification.
//!
//! The pipeline: grouped features for a labeled source domain and an
//! unlabeled target domain are tied together by a mean-discrepancy
//! regularizer, an inexact augmented Lagrangian iteration fits a regression
//! matrix that keeps at most `kappa` feature groups alive, and predictions
//! come from projecting scores onto the probability simplex. Group survival
//! maps back to grid regions of the input frame, giving a direct view of
//! which regions drive the classifier.
//!
//! Modules follow the pipeline: [`data`] (model + file formats), [`problem`]
//! (objective assembly), [`solver`] (the iteration), [`predict`],
//! [`metrics`], [`grid`] (hyper-parameter search), [`regions`] (reporting),
//! [`synth`] (verification datasets), [`model`] (trained-model archive).

pub mod data;
pub mod error;
pub mod grid;
pub mod layout;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod predict;
pub mod problem;
pub mod regions;
pub mod solver;
pub mod synth;

pub use data::{load_domain_pair, save_domain_pair, DomainPair, GroupedFeatureMatrix, LabelMatrix};
pub use error::{Error, Result};
pub use grid::{default_grid, grid_search, GridConfig, GridPoint, GridResult, GridSpec};
pub use layout::{build_grid_layout, GroupLayout, Region};
pub use metrics::{accuracy, confusion, evaluation_report, macro_f1, ConfusionMatrix};
pub use model::{Model, ModelMeta};
pub use predict::{classify, classify_batch, project_simplex, score, PredictedLabel};
pub use problem::{build_augmented_problem, mmd_value, objective_breakdown, AugmentedProblem};
pub use regions::{region_report, selected_groups, RegionReport};
pub use solver::{solve, SolveResult, SolverOptions, SolverState};
pub use synth::{generate, SyntheticData, SyntheticSpec};
