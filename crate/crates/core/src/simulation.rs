//! Bernoulli-simulated predictors swept over an accuracy grid.
//!
//! Every (accuracy, repetition) cell draws one labeling and evaluates the
//! boundary interval of every requested model kind and `p_qf` on it.
//!
//! Randomness is fully determined by the master seed. The seed of a cell is
//!
//! ```text
//! cell_seed = mix(mix(mix(seed) ^ accuracy_index) ^ repetition_index)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer. The cell seed is expanded into a
//! ChaCha8 stream (`ChaCha8Rng::seed_from_u64`), and each artifact, in the
//! project's stored order, consumes one `u64` mapped to `[0, 1)` through its
//! top 53 bits. The label is correct iff that draw is below the accuracy.
//! Cells never share a stream, so output does not depend on scheduling.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::boundary::{boundary_interval, ExtendedBound};
use crate::cost::{check_p_qf, CostParams, ModelKind};
use crate::error::{Error, Result};
use crate::model::{classify, project_view, ConfusionMatrix, Prediction, Project, Relationship};

/// Sweep definition. [`Default`] gives accuracies 0.05..=0.95 in steps of
/// 0.05, 100 repetitions, `p_qf ∈ {0, 0.5}`, and all six model kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub accuracies: Vec<f64>,
    pub repetitions: u32,
    pub p_qf_values: Vec<f64>,
    pub seed: u64,
    pub model_kinds: Vec<ModelKind>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            accuracies: accuracy_grid(0.05, 0.95, 0.05).expect("default grid is valid"),
            repetitions: 100,
            p_qf_values: vec![0.0, 0.5],
            seed: 0,
            model_kinds: ModelKind::ALL.to_vec(),
        }
    }
}

impl GridConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.accuracies.is_empty() {
            return Err(Error::InvalidParam("accuracy grid is empty".into()));
        }
        if let Some(a) = self.accuracies.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidParam(format!("accuracy {a} outside [0, 1]")));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParam("repetitions must be at least 1".into()));
        }
        if self.p_qf_values.is_empty() {
            return Err(Error::InvalidParam("no p_qf values given".into()));
        }
        for &p in &self.p_qf_values {
            check_p_qf(p)?;
        }
        if self.model_kinds.is_empty() {
            return Err(Error::InvalidParam("no model kinds given".into()));
        }
        Ok(())
    }

    /// Number of records [`run_grid`] emits for this configuration.
    pub fn record_count(&self) -> usize {
        let mut kinds = self.model_kinds.clone();
        kinds.sort();
        kinds.dedup();
        self.accuracies.len() * self.repetitions as usize * self.p_qf_values.len() * kinds.len()
    }
}

/// `min, min + step, ..., max` with every value snapped to the nearest
/// 10-decimal number, so `0.05 + 2·0.05` comes out as `0.15`.
pub fn accuracy_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(0.0..=1.0).contains(&min) || !(0.0..=1.0).contains(&max) || min > max {
        return Err(Error::InvalidParam(format!(
            "invalid accuracy range {min}..={max} step {step}"
        )));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| snap(min + i as f64 * step)).collect())
}

fn snap(v: f64) -> f64 {
    format!("{v:.10}").parse().expect("formatted float parses")
}

/// One grid cell's result for a single `p_qf` and model kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub project: String,
    pub accuracy: f64,
    pub repetition: u32,
    pub p_qf: f64,
    pub kind: ModelKind,
    pub cm: ConfusionMatrix,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub lower: ExtendedBound,
    pub upper: ExtendedBound,
    pub cost_saving: bool,
}

/// How grid cells are scheduled. Without the `parallel` feature both
/// variants run sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the cell at (`accuracy_index`, `repetition`).
pub fn cell_seed(seed: u64, accuracy_index: usize, repetition: u32) -> u64 {
    mix(mix(mix(seed) ^ accuracy_index as u64) ^ u64::from(repetition))
}

#[inline]
fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Labels each artifact correctly with probability `accuracy`, otherwise
/// with the flipped label.
pub fn simulate_prediction(project: &Project, accuracy: f64, cell_seed: u64) -> Prediction {
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
    let labels = project
        .defective_mask()
        .iter()
        .map(|&truth| {
            let correct = unit_f64(rng.next_u64()) < accuracy;
            truth == correct
        })
        .collect();
    Prediction::from_vec(labels)
}

struct Views {
    by_relationship: Vec<(Relationship, Project)>,
}

impl Views {
    fn new(project: &Project, kinds: &[ModelKind]) -> Result<Self> {
        let mut rels: Vec<Relationship> = kinds.iter().map(|k| k.relationship).collect();
        rels.sort();
        rels.dedup();
        let by_relationship = rels
            .into_iter()
            .map(|r| Ok((r, project_view(project, r)?)))
            .collect::<Result<_>>()?;
        Ok(Self { by_relationship })
    }
}

fn run_cell(
    project: &Project,
    views: &Views,
    config: &GridConfig,
    kinds: &[ModelKind],
    accuracy_index: usize,
    repetition: u32,
) -> Result<Vec<ExperimentRecord>> {
    let accuracy = config.accuracies[accuracy_index];
    let prediction = simulate_prediction(
        project,
        accuracy,
        cell_seed(config.seed, accuracy_index, repetition),
    );
    let outcomes = views
        .by_relationship
        .iter()
        .map(|(r, view)| Ok((*r, classify(view, &prediction)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::with_capacity(config.p_qf_values.len() * kinds.len());
    for &p_qf in &config.p_qf_values {
        for &kind in kinds {
            let (view, outcome) = views
                .by_relationship
                .iter()
                .zip(&outcomes)
                .find(|((r, _), _)| *r == kind.relationship)
                .map(|((_, v), (_, o))| (v, o))
                .expect("view exists for every requested relationship");
            let params = CostParams::new(1.0, p_qf, kind.qa_mode);
            let interval = boundary_interval(view, outcome, &params, kind)?;
            records.push(ExperimentRecord {
                project: project.name().to_string(),
                accuracy,
                repetition,
                p_qf,
                kind,
                cm: outcome.cm,
                precision: outcome.cm.precision(),
                recall: outcome.cm.recall(),
                lower: interval.lower,
                upper: interval.upper,
                cost_saving: interval.cost_saving_possible,
            });
        }
    }
    Ok(records)
}

/// Runs the full sweep with the default [`Execution`].
pub fn run_grid(project: &Project, config: &GridConfig) -> Result<Vec<ExperimentRecord>> {
    run_grid_with(project, config, Execution::default())
}

/// Runs the full sweep. Records come out sorted by accuracy, repetition,
/// `p_qf`, then model kind.
pub fn run_grid_with(
    project: &Project,
    config: &GridConfig,
    execution: Execution,
) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    if project.relationship() != Relationship::NtoM {
        return Err(Error::ViewSource(project.relationship()));
    }
    let mut kinds = config.model_kinds.clone();
    kinds.sort();
    kinds.dedup();
    let views = Views::new(project, &kinds)?;
    let reps = config.repetitions;
    let n_cells = config.accuracies.len() * reps as usize;
    let cell = |c: usize| {
        let (a, r) = (c / reps as usize, (c % reps as usize) as u32);
        run_cell(project, &views, config, &kinds, a, r)
    };

    let chunks: Vec<Vec<ExperimentRecord>> = match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n_cells).into_par_iter().map(cell).collect::<Result<_>>()?,
        _ => (0..n_cells).map(cell).collect::<Result<_>>()?,
    };
    let mut records: Vec<ExperimentRecord> = chunks.into_iter().flatten().collect();
    records.sort_by(|a, b| {
        a.accuracy
            .total_cmp(&b.accuracy)
            .then(a.repetition.cmp(&b.repetition))
            .then(a.p_qf.total_cmp(&b.p_qf))
            .then(a.kind.cmp(&b.kind))
    });
    Ok(records)
}
