//! Conditions on the cost ratio `C` under which acting on a prediction is
//! cheaper than a baseline.
//!
//! [`theorem_boundary`] compares against QA applied at random with
//! probability `p_qa`. Its two endpoints give the [`lower_boundary`] (versus
//! no QA at all) and the [`upper_boundary`] (versus QA everywhere).
//! [`boundary_interval`] evaluates the closed forms of the six cost model
//! initializations directly from counts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cost::{
    check_view, flagged_qa, qa_success, unflagged_qa, CostParams, ModelKind, QaMode,
};
use crate::error::{Error, Result};
use crate::model::{OutcomeSummary, Project, Relationship};

/// A real threshold, or `Unbounded` when its denominator vanished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedBound {
    Finite(f64),
    Unbounded,
}

impl ExtendedBound {
    fn ratio(num: f64, den: f64) -> Self {
        if den == 0.0 {
            Self::Unbounded
        } else {
            Self::Finite(num / den)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Unbounded => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }
}

/// `Unbounded` renders as `inf`.
impl fmt::Display for ExtendedBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Unbounded => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(*v),
            Self::Unbounded => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedBound {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Self::Finite(v)),
            Repr::Text(t) if t == "inf" => Ok(Self::Unbounded),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionKind {
    /// Profitable when `C < y / x` (`x > 0`).
    UpperBound,
    /// Profitable when `C > y / x` (`x < 0`).
    LowerBound,
    /// `x = 0` and `y > 0`: profitable for every `C`.
    AlwaysProfitable,
    /// `x = 0` and `y <= 0`: profitable for no `C`.
    NeverProfitable,
}

/// The inequality `C·x < y` that positive profit against random QA requires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub x: f64,
    pub y: f64,
    pub kind: ConditionKind,
    /// `y / x`, or `Unbounded` when `x = 0`.
    pub threshold: ExtendedBound,
}

impl BoundaryCondition {
    fn from_xy(x: f64, y: f64) -> Self {
        let kind = if x > 0.0 {
            ConditionKind::UpperBound
        } else if x < 0.0 {
            ConditionKind::LowerBound
        } else if y > 0.0 {
            ConditionKind::AlwaysProfitable
        } else {
            ConditionKind::NeverProfitable
        };
        Self {
            x,
            y,
            kind,
            threshold: ExtendedBound::ratio(y, x),
        }
    }

    /// Whether a given cost ratio satisfies the condition.
    pub fn admits(&self, c_ratio: f64) -> bool {
        match self.kind {
            ConditionKind::UpperBound | ConditionKind::LowerBound => c_ratio * self.x < self.y,
            ConditionKind::AlwaysProfitable => true,
            ConditionKind::NeverProfitable => false,
        }
    }
}

/// The range of `C` for which a prediction beats both trivial baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryInterval {
    pub lower: ExtendedBound,
    pub upper: ExtendedBound,
    pub cost_saving_possible: bool,
}

impl BoundaryInterval {
    pub fn new(lower: ExtendedBound, upper: ExtendedBound) -> Self {
        let cost_saving_possible = match (lower, upper) {
            (ExtendedBound::Finite(_), ExtendedBound::Unbounded) => true,
            (ExtendedBound::Finite(l), ExtendedBound::Finite(u)) => l < u,
            (ExtendedBound::Unbounded, _) => false,
        };
        Self {
            lower,
            upper,
            cost_saving_possible,
        }
    }

    /// Whether `c_ratio` lies strictly inside the interval.
    pub fn contains(&self, c_ratio: f64) -> bool {
        let above = matches!(self.lower, ExtendedBound::Finite(l) if c_ratio > l);
        let below = match self.upper {
            ExtendedBound::Finite(u) => c_ratio < u,
            ExtendedBound::Unbounded => true,
        };
        above && below
    }
}

fn qa_of(project: &Project, i: usize, mode: QaMode) -> f64 {
    mode.qa_cost(project.artifacts()[i].size)
}

/// Theorem quantities `x` and `y` for random QA with probability `p_qa`.
///
/// `x` is accumulated as `Σ_{D_PRED} (1-qf)(p_qa^|d| - 1) + Σ_{D_MISS} p_qa^|d| (1-qf)`
/// and `y` as `Σ_{h=0} p_qa·qa + Σ_{h=1} (p_qa - 1)·qa - C_INIT - C_EXEC`;
/// both are algebraically equal to the textbook sums and exact at `p_qa ∈ {0, 1}`.
pub fn theorem_boundary(
    project: &Project,
    outcome: &OutcomeSummary,
    p_qa: f64,
    params: &CostParams,
) -> Result<BoundaryCondition> {
    params.validate()?;
    if !(0.0..=1.0).contains(&p_qa) {
        return Err(Error::InvalidParam(format!("p_qa must lie in [0, 1], got {p_qa}")));
    }
    let defects = project.defects();
    let reveal = |d: usize| qa_success(params.p_qf, defects[d].cardinality());
    let hit = |d: usize| p_qa.powi(defects[d].cardinality() as i32);
    let x: f64 = outcome
        .predicted
        .iter()
        .map(|&d| reveal(d) * (hit(d) - 1.0))
        .sum::<f64>()
        + outcome
            .missed
            .iter()
            .map(|&d| hit(d) * reveal(d))
            .sum::<f64>();
    let y: f64 = outcome
        .labels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let qa = qa_of(project, i, params.qa_mode);
            if l {
                (p_qa - 1.0) * qa
            } else {
                p_qa * qa
            }
        })
        .sum::<f64>()
        - params.fixed_costs();
    Ok(BoundaryCondition::from_xy(x, y))
}

/// Smallest `C` above which the prediction beats doing no QA.
pub fn lower_boundary(
    project: &Project,
    outcome: &OutcomeSummary,
    params: &CostParams,
) -> Result<ExtendedBound> {
    params.validate()?;
    let qa: f64 = outcome
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l)
        .map(|(i, _)| qa_of(project, i, params.qa_mode))
        .sum();
    let den: f64 = outcome
        .predicted
        .iter()
        .map(|&d| qa_success(params.p_qf, project.defects()[d].cardinality()))
        .sum();
    Ok(ExtendedBound::ratio(qa + params.fixed_costs(), den))
}

/// Largest `C` below which the prediction beats QA on every artifact.
/// A negative numerator clamps to 0.
pub fn upper_boundary(
    project: &Project,
    outcome: &OutcomeSummary,
    params: &CostParams,
) -> Result<ExtendedBound> {
    params.validate()?;
    let qa: f64 = outcome
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| !l)
        .map(|(i, _)| qa_of(project, i, params.qa_mode))
        .sum();
    let den: f64 = outcome
        .missed
        .iter()
        .map(|&d| qa_success(params.p_qf, project.defects()[d].cardinality()))
        .sum();
    Ok(ExtendedBound::ratio((qa - params.fixed_costs()).max(0.0), den))
}

/// Lower and upper boundary of one cost model initialization, evaluated from
/// its closed form. `kind.qa_mode` selects the QA term.
pub fn boundary_interval(
    project: &Project,
    outcome: &OutcomeSummary,
    params: &CostParams,
    kind: ModelKind,
) -> Result<BoundaryInterval> {
    params.validate()?;
    check_view(project, kind)?;
    let reveal = 1.0 - params.p_qf;
    let (pred_den, miss_den) = match kind.relationship {
        Relationship::NtoM => {
            let sum = |ds: &[usize]| -> f64 {
                ds.iter()
                    .map(|&d| qa_success(params.p_qf, project.defects()[d].cardinality()))
                    .sum()
            };
            (sum(&outcome.predicted), sum(&outcome.missed))
        }
        Relationship::OneToM => (
            outcome.predicted.len() as f64 * reveal,
            outcome.missed.len() as f64 * reveal,
        ),
        Relationship::OneToOne => (outcome.cm.tp as f64 * reveal, outcome.cm.fn_ as f64 * reveal),
    };
    let fixed = params.fixed_costs();
    let lower = ExtendedBound::ratio(flagged_qa(outcome, kind.qa_mode) + fixed, pred_den);
    let upper = ExtendedBound::ratio((unflagged_qa(outcome, kind.qa_mode) - fixed).max(0.0), miss_den);
    Ok(BoundaryInterval::new(lower, upper))
}
