//! Costs, profit boundaries, and simulation for software defect prediction.
//!
//! The crate models a product as artifacts and post-release defects with an
//! n-to-m incidence ([`model`]), prices acting on a prediction under a general
//! QA cost model and six initializations of it ([`cost`]), derives the range
//! of defect-to-QA cost ratios for which a prediction saves money
//! ([`boundary`]), and sweeps Bernoulli-simulated predictors over an accuracy
//! grid ([`simulation`]). [`ingest`] and [`report`] handle the file formats.
//!
//! The `parallel` feature (on by default) evaluates grid cells with rayon.

pub mod boundary;
pub mod cost;
pub mod error;
pub mod ingest;
pub mod model;
pub mod report;
pub mod simulation;
pub mod synthetic;

pub use boundary::{
    boundary_interval, lower_boundary, theorem_boundary, upper_boundary, BoundaryCondition,
    BoundaryInterval, ConditionKind, ExtendedBound,
};
pub use cost::{
    cost_general, cost_init, cost_random, qa_failure, CostParams, GeneralCostInputs, ModelKind,
    QaMode,
};
pub use error::{Error, ParseError, Result};
pub use ingest::{parse_matrix, parse_prediction, summarize, write_matrix, SummaryStats};
pub use model::{
    classify, partition_artifacts, project_view, Artifact, ConfusionMatrix, Defect,
    OutcomeSummary, Prediction, Project, Relationship,
};
pub use simulation::{run_grid, run_grid_with, simulate_prediction, Execution, ExperimentRecord, GridConfig};
