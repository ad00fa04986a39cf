//! The general quality-assurance cost model and its six initializations.
//!
//! Defect costs are expressed through the ratio `C = C_DEF / C_QA` with the
//! QA cost unit fixed at 1, so a QA cost is either 1 per artifact
//! ([`QaMode::Constant`]) or the artifact size ([`QaMode::SizeAware`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{OutcomeSummary, Project, Relationship};

/// How the QA cost of a single artifact is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QaMode {
    /// One unit per artifact.
    #[serde(rename = "constant")]
    Constant,
    /// One unit per line of code.
    #[serde(rename = "size")]
    SizeAware,
}

impl QaMode {
    pub const ALL: [QaMode; 2] = [Self::Constant, Self::SizeAware];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::SizeAware => "size",
        }
    }

    /// `qa(s)` for an artifact of the given size.
    #[inline]
    pub fn qa_cost(self, size: u64) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::SizeAware => size as f64,
        }
    }
}

impl fmt::Display for QaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" | "const" => Ok(Self::Constant),
            "size" | "size-aware" => Ok(Self::SizeAware),
            other => Err(Error::InvalidParam(format!(
                "unknown qa mode {other:?} (expected constant or size)"
            ))),
        }
    }
}

/// One of the six initializations: a QA cost mode paired with a relationship.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelKind {
    pub qa_mode: QaMode,
    pub relationship: Relationship,
}

impl ModelKind {
    pub const fn new(qa_mode: QaMode, relationship: Relationship) -> Self {
        Self {
            qa_mode,
            relationship,
        }
    }

    /// All six kinds, ordered by QA mode, then relationship.
    pub const ALL: [ModelKind; 6] = [
        Self::new(QaMode::Constant, Relationship::NtoM),
        Self::new(QaMode::Constant, Relationship::OneToM),
        Self::new(QaMode::Constant, Relationship::OneToOne),
        Self::new(QaMode::SizeAware, Relationship::NtoM),
        Self::new(QaMode::SizeAware, Relationship::OneToM),
        Self::new(QaMode::SizeAware, Relationship::OneToOne),
    ];
}

/// Rendered as `<qa-mode>:<relationship>`, e.g. `size:n-to-m`.
impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.qa_mode, self.relationship)
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mode, rel) = s.split_once(':').ok_or_else(|| {
            Error::InvalidParam(format!(
                "model kind {s:?} must look like <constant|size>:<n-to-m|1-to-m|1-to-1>"
            ))
        })?;
        Ok(Self::new(mode.parse()?, rel.parse()?))
    }
}

/// Parameters shared by the initialized cost models and the boundary analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// `C`, the cost of one defect in QA cost units.
    pub c_ratio: f64,
    /// Probability that QA misses a defect within a single artifact.
    pub p_qf: f64,
    /// One-time cost of introducing the prediction model.
    pub c_init: f64,
    /// Continuous cost of running the prediction model.
    pub c_exec: f64,
    pub qa_mode: QaMode,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            c_ratio: 1.0,
            p_qf: 0.0,
            c_init: 0.0,
            c_exec: 0.0,
            qa_mode: QaMode::Constant,
        }
    }
}

impl CostParams {
    pub fn new(c_ratio: f64, p_qf: f64, qa_mode: QaMode) -> Self {
        Self {
            c_ratio,
            p_qf,
            qa_mode,
            ..Self::default()
        }
    }

    pub fn with_fixed_costs(mut self, c_init: f64, c_exec: f64) -> Self {
        self.c_init = c_init;
        self.c_exec = c_exec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_ratio > 0.0 && self.c_ratio.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "cost ratio must be positive and finite, got {}",
                self.c_ratio
            )));
        }
        check_p_qf(self.p_qf)?;
        for (name, v) in [("c_init", self.c_init), ("c_exec", self.c_exec)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn fixed_costs(&self) -> f64 {
        self.c_init + self.c_exec
    }
}

pub(crate) fn check_p_qf(p_qf: f64) -> Result<()> {
    if (0.0..1.0).contains(&p_qf) {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("p_qf must lie in [0, 1), got {p_qf}")))
    }
}

/// Probability that QA misses a defect spread over `cardinality` artifacts
/// when it misses within each artifact independently with probability `p_qf`.
pub fn qa_failure(p_qf: f64, cardinality: usize) -> Result<f64> {
    if cardinality == 0 {
        return Err(Error::ZeroCardinality);
    }
    Ok(1.0 - qa_success(p_qf, cardinality))
}

/// `(1 - p_qf)^cardinality`, the chance QA reveals the defect.
#[inline]
pub(crate) fn qa_success(p_qf: f64, cardinality: usize) -> f64 {
    (1.0 - p_qf).powi(cardinality as i32)
}

/// Per-artifact QA costs and per-defect losses and miss probabilities for the
/// uninitialized cost model. Vectors follow the project's artifact and defect order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneralCostInputs {
    pub qa_costs: Vec<f64>,
    pub losses: Vec<f64>,
    pub qf_values: Vec<f64>,
    pub c_init: f64,
    pub c_exec: f64,
}

impl GeneralCostInputs {
    /// The inputs an initialization induces: `qa` by mode, `loss(d) = C`,
    /// `qf(d) = 1 - (1 - p_qf)^|d|`.
    pub fn induced(project: &Project, params: &CostParams, qa_mode: QaMode) -> Self {
        Self {
            qa_costs: project
                .artifacts()
                .iter()
                .map(|a| qa_mode.qa_cost(a.size))
                .collect(),
            losses: vec![params.c_ratio; project.defects().len()],
            qf_values: project
                .defects()
                .iter()
                .map(|d| 1.0 - qa_success(params.p_qf, d.cardinality()))
                .collect(),
            c_init: params.c_init,
            c_exec: params.c_exec,
        }
    }

    fn check(&self, project: &Project) -> Result<()> {
        let missing = |what, id: &str| Error::MissingCostEntry {
            what,
            id: id.to_string(),
        };
        if let Some(a) = project.artifacts().get(self.qa_costs.len()) {
            return Err(missing("qa cost", &a.id));
        }
        if let Some(d) = project.defects().get(self.losses.len()) {
            return Err(missing("loss", &d.id));
        }
        if let Some(d) = project.defects().get(self.qf_values.len()) {
            return Err(missing("qa failure probability", &d.id));
        }
        if self.qa_costs.len() != project.len()
            || self.losses.len() != project.defects().len()
            || self.qf_values.len() != project.defects().len()
        {
            return Err(Error::InvalidParam(
                "cost inputs have more entries than the project".into(),
            ));
        }
        Ok(())
    }
}

/// `C_INIT + C_EXEC + Σ_{h(s)=1} qa(s) + Σ_{D_MISS} loss(d) + Σ_{D_PRED} qf(d)·loss(d)`.
pub fn cost_general(
    project: &Project,
    outcome: &OutcomeSummary,
    inputs: &GeneralCostInputs,
) -> Result<f64> {
    inputs.check(project)?;
    let qa: f64 = outcome
        .labels
        .iter()
        .zip(&inputs.qa_costs)
        .filter(|(&l, _)| l)
        .map(|(_, &q)| q)
        .sum();
    let missed: f64 = outcome.missed.iter().map(|&d| inputs.losses[d]).sum();
    let predicted: f64 = outcome
        .predicted
        .iter()
        .map(|&d| inputs.qf_values[d] * inputs.losses[d])
        .sum();
    Ok(inputs.c_init + inputs.c_exec + qa + missed + predicted)
}

pub(crate) fn check_view(project: &Project, kind: ModelKind) -> Result<()> {
    if project.relationship() == kind.relationship {
        Ok(())
    } else {
        Err(Error::RelationshipMismatch {
            expected: kind.relationship,
            found: project.relationship(),
        })
    }
}

/// QA spent on the artifacts labeled defective.
pub(crate) fn flagged_qa(outcome: &OutcomeSummary, qa_mode: QaMode) -> f64 {
    match qa_mode {
        QaMode::Constant => (outcome.cm.tp + outcome.cm.fp) as f64,
        QaMode::SizeAware => outcome.flagged_size as f64,
    }
}

/// QA that labeling everything defective would additionally spend.
pub(crate) fn unflagged_qa(outcome: &OutcomeSummary, qa_mode: QaMode) -> f64 {
    match qa_mode {
        QaMode::Constant => (outcome.cm.tn + outcome.cm.fn_) as f64,
        QaMode::SizeAware => outcome.unflagged_size as f64,
    }
}

/// Cost of acting on a prediction under one of the six initializations.
///
/// `kind.qa_mode` selects the QA term; `params.qa_mode` is not consulted.
pub fn cost_init(
    project: &Project,
    outcome: &OutcomeSummary,
    params: &CostParams,
    kind: ModelKind,
) -> Result<f64> {
    params.validate()?;
    check_view(project, kind)?;
    let c = params.c_ratio;
    let p = params.p_qf;
    let qa = flagged_qa(outcome, kind.qa_mode);
    let defects = match kind.relationship {
        Relationship::NtoM => {
            let escaped: f64 = outcome
                .predicted
                .iter()
                .map(|&d| 1.0 - qa_success(p, project.defects()[d].cardinality()))
                .sum();
            outcome.missed.len() as f64 * c + escaped * c
        }
        Relationship::OneToM => {
            outcome.missed.len() as f64 * c + outcome.predicted.len() as f64 * p * c
        }
        Relationship::OneToOne => outcome.cm.fn_ as f64 * c + outcome.cm.tp as f64 * p * c,
    };
    Ok(qa + defects + params.fixed_costs())
}

/// Expected cost when QA is applied to each artifact independently with
/// probability `p_qa`. Fixed model costs do not apply.
pub fn cost_random(project: &Project, p_qa: f64, params: &CostParams) -> Result<f64> {
    params.validate()?;
    if !(0.0..=1.0).contains(&p_qa) {
        return Err(Error::InvalidParam(format!("p_qa must lie in [0, 1], got {p_qa}")));
    }
    let c = params.c_ratio;
    let qa: f64 = project
        .artifacts()
        .iter()
        .map(|a| p_qa * params.qa_mode.qa_cost(a.size))
        .sum();
    let defects: f64 = project
        .defects()
        .iter()
        .map(|d| {
            let k = d.cardinality();
            let hit = p_qa.powi(k as i32);
            let qf = 1.0 - qa_success(params.p_qf, k);
            (1.0 - hit) * c + hit * qf * c
        })
        .sum();
    Ok(qa + defects)
}
