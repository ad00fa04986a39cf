//! Artifacts, defects, their n-to-m incidence, predictions, and outcome
//! classification.
//!
//! A [`Project`] owns an ordered list of artifacts and an ordered list of
//! defects. Each defect stores the artifact *indices* it affects, sorted and
//! de-duplicated, so every downstream computation works on positions rather
//! than string lookups. Ids are kept for reporting and error messages.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which defect/artifact relationship a [`Project`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relationship {
    /// Defects may span several artifacts and artifacts may carry several defects.
    #[serde(rename = "n-to-m")]
    NtoM,
    /// Every defect lives in exactly one artifact (bug-count data).
    #[serde(rename = "1-to-m")]
    OneToM,
    /// Binary per-artifact labels.
    #[serde(rename = "1-to-1")]
    OneToOne,
}

impl Relationship {
    pub const ALL: [Relationship; 3] = [Self::NtoM, Self::OneToM, Self::OneToOne];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::NtoM => "n-to-m",
            Self::OneToM => "1-to-m",
            Self::OneToOne => "1-to-1",
        }
    }
}

impl fmt::Display for Relationship {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relationship {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n-to-m" | "n/m" | "ntom" => Ok(Self::NtoM),
            "1-to-m" | "1/m" | "1tom" => Ok(Self::OneToM),
            "1-to-1" | "1/1" | "1to1" => Ok(Self::OneToOne),
            other => Err(Error::InvalidParam(format!(
                "unknown relationship {other:?} (expected n-to-m, 1-to-m or 1-to-1)"
            ))),
        }
    }
}

/// A unit of software that a prediction labels defective or clean.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub id: String,
    /// Logical lines of code; at least 1.
    pub size: u64,
}

impl Artifact {
    pub fn new(id: impl Into<String>, size: u64) -> Self {
        Self {
            id: id.into(),
            size,
        }
    }
}

/// A post-release defect and the artifacts it affects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Defect {
    pub id: String,
    members: Vec<usize>,
}

impl Defect {
    /// Builds a defect from artifact indices. Indices are sorted and
    /// de-duplicated; range checks happen when the defect joins a [`Project`].
    pub fn new(id: impl Into<String>, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self {
            id: id.into(),
            members,
        }
    }

    /// Indices of the affected artifacts, ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// `|d|`, the number of affected artifacts.
    pub fn cardinality(&self) -> usize {
        self.members.len()
    }
}

/// Artifacts plus the defect incidence for one software product.
#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    name: String,
    artifacts: Vec<Artifact>,
    defects: Vec<Defect>,
    relationship: Relationship,
    defective: Vec<bool>,
    index: HashMap<String, usize>,
}

impl Project {
    /// Builds an n-to-m project from artifact records and `(defect id, member ids)` pairs.
    pub fn new<I, S, M>(artifacts: Vec<Artifact>, defects: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, M)>,
        S: Into<String>,
        M: IntoIterator,
        M::Item: AsRef<str>,
    {
        let index = build_index(&artifacts)?;
        let mut resolved = Vec::new();
        for (id, members) in defects {
            let id = id.into();
            let mut idx = Vec::new();
            for m in members {
                let m = m.as_ref();
                match index.get(m) {
                    Some(&i) => idx.push(i),
                    None => {
                        return Err(Error::UnknownMember {
                            defect: id,
                            artifact: m.to_string(),
                        })
                    }
                }
            }
            resolved.push(Defect::new(id, idx));
        }
        Self::assemble(artifacts, resolved, Relationship::NtoM, index)
    }

    /// Builds a project from already-resolved defects, validating the
    /// invariants of `relationship`.
    pub fn from_defects(
        artifacts: Vec<Artifact>,
        defects: Vec<Defect>,
        relationship: Relationship,
    ) -> Result<Self> {
        let index = build_index(&artifacts)?;
        Self::assemble(artifacts, defects, relationship, index)
    }

    fn assemble(
        artifacts: Vec<Artifact>,
        defects: Vec<Defect>,
        relationship: Relationship,
        index: HashMap<String, usize>,
    ) -> Result<Self> {
        let n = artifacts.len();
        let mut defective = vec![false; n];
        let mut seen_ids = HashMap::with_capacity(defects.len());
        for d in &defects {
            if seen_ids.insert(d.id.as_str(), ()).is_some() {
                return Err(Error::InvalidParam(format!("duplicate defect id {}", d.id)));
            }
            if d.members.is_empty() {
                return Err(Error::EmptyDefect(d.id.clone()));
            }
            if let Some(&bad) = d.members.iter().find(|&&m| m >= n) {
                return Err(Error::UnknownMember {
                    defect: d.id.clone(),
                    artifact: format!("#{bad}"),
                });
            }
            if relationship != Relationship::NtoM && d.members.len() != 1 {
                return Err(Error::RelationshipViolation {
                    relationship,
                    defect: d.id.clone(),
                    reason: "defect affects more than one artifact",
                });
            }
            for &m in &d.members {
                if relationship == Relationship::OneToOne && defective[m] {
                    return Err(Error::RelationshipViolation {
                        relationship,
                        defect: d.id.clone(),
                        reason: "artifact already carries a defect",
                    });
                }
                defective[m] = true;
            }
        }
        Ok(Self {
            name: String::new(),
            artifacts,
            defects,
            relationship,
            defective,
            index,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    pub fn defects(&self) -> &[Defect] {
        &self.defects
    }

    pub fn relationship(&self) -> Relationship {
        self.relationship
    }

    pub fn len(&self) -> usize {
        self.artifacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.artifacts.is_empty()
    }

    /// Position of the artifact with the given id.
    pub fn artifact_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Whether artifact `i` belongs to S_DEF.
    pub fn is_defective(&self, i: usize) -> bool {
        self.defective[i]
    }

    /// The S_DEF indicator in artifact order.
    pub fn defective_mask(&self) -> &[bool] {
        &self.defective
    }

    /// Number of artifacts affected by at least one defect.
    pub fn n_defective(&self) -> usize {
        self.defective.iter().filter(|&&b| b).count()
    }

    /// Ids of the artifacts of defect `d`.
    pub fn member_ids<'a>(&'a self, d: &'a Defect) -> impl Iterator<Item = &'a str> + 'a {
        d.members.iter().map(|&m| self.artifacts[m].id.as_str())
    }
}

fn build_index(artifacts: &[Artifact]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(artifacts.len());
    for (i, a) in artifacts.iter().enumerate() {
        if a.size == 0 {
            return Err(Error::ZeroSize(a.id.clone()));
        }
        if index.insert(a.id.clone(), i).is_some() {
            return Err(Error::DuplicateArtifact(a.id.clone()));
        }
    }
    Ok(index)
}

/// Defective and clean artifact indices, each in artifact order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub defective: Vec<usize>,
    pub clean: Vec<usize>,
}

/// Splits the artifacts into S_DEF (touched by some defect) and S_CLEAN.
pub fn partition_artifacts(project: &Project) -> Partition {
    let (defective, clean) = (0..project.len()).partition(|&i| project.is_defective(i));
    Partition { defective, clean }
}

/// Derives the `target` view from n-to-m data.
///
/// The 1-to-m view expands every (defect, artifact) incidence into its own
/// single-artifact defect. The 1-to-1 view keeps one defect per defective
/// artifact. Synthesized ids take the form `<defect-id>#<artifact-id>`, where
/// the 1-to-1 view uses the first defect touching the artifact.
pub fn project_view(project: &Project, target: Relationship) -> Result<Project> {
    if project.relationship != Relationship::NtoM {
        return Err(Error::ViewSource(project.relationship));
    }
    let artifacts = &project.artifacts;
    let defects = match target {
        Relationship::NtoM => return Ok(project.clone()),
        Relationship::OneToM => project
            .defects
            .iter()
            .flat_map(|d| {
                d.members
                    .iter()
                    .map(move |&m| Defect::new(format!("{}#{}", d.id, artifacts[m].id), vec![m]))
            })
            .collect(),
        Relationship::OneToOne => {
            let mut first: Vec<Option<usize>> = vec![None; artifacts.len()];
            for (di, d) in project.defects.iter().enumerate() {
                for &m in &d.members {
                    first[m].get_or_insert(di);
                }
            }
            first
                .iter()
                .enumerate()
                .filter_map(|(m, di)| {
                    di.map(|di| {
                        Defect::new(
                            format!("{}#{}", project.defects[di].id, artifacts[m].id),
                            vec![m],
                        )
                    })
                })
                .collect()
        }
    };
    Ok(Project {
        name: project.name.clone(),
        artifacts: project.artifacts.clone(),
        defects,
        relationship: target,
        defective: project.defective.clone(),
        index: project.index.clone(),
    })
}

/// A binary label per artifact, in the project's artifact order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    labels: Vec<bool>,
}

impl Prediction {
    pub fn from_vec(labels: Vec<bool>) -> Self {
        Self { labels }
    }

    /// Builds a total labeling from `(artifact id, label)` pairs.
    pub fn from_labels<I, S>(project: &Project, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, bool)>,
        S: AsRef<str>,
    {
        let mut labels: Vec<Option<bool>> = vec![None; project.len()];
        for (id, label) in pairs {
            let id = id.as_ref();
            let i = project
                .artifact_index(id)
                .ok_or_else(|| Error::UnknownArtifact(id.to_string()))?;
            if labels[i].replace(label).is_some() {
                return Err(Error::DuplicateLabel(id.to_string()));
            }
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| l.ok_or_else(|| Error::UnlabeledArtifact(project.artifacts[i].id.clone())))
            .collect::<Result<_>>()?;
        Ok(Self { labels })
    }

    /// The perfect predictor: labels equal the S_DEF indicator.
    pub fn truth(project: &Project) -> Self {
        Self {
            labels: project.defective.clone(),
        }
    }

    /// Labels every artifact with `label`.
    pub fn constant(project: &Project, label: bool) -> Self {
        Self {
            labels: vec![label; project.len()],
        }
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.labels[i]
    }

    fn check(&self, project: &Project) -> Result<()> {
        match self.labels.len().cmp(&project.len()) {
            std::cmp::Ordering::Equal => Ok(()),
            std::cmp::Ordering::Less => Err(Error::UnlabeledArtifact(
                project.artifacts[self.labels.len()].id.clone(),
            )),
            std::cmp::Ordering::Greater => Err(Error::LabelCount {
                expected: project.len(),
                found: self.labels.len(),
            }),
        }
    }
}

/// Artifact-level confusion matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `tp / (tp + fp)`, or `None` when nothing was predicted defective.
    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    /// `tp / (tp + fn)`, or `None` when there are no defective artifacts.
    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn precision(cm: &ConfusionMatrix) -> Option<f64> {
    cm.precision()
}

pub fn recall(cm: &ConfusionMatrix) -> Option<f64> {
    cm.recall()
}

/// Confusion matrix plus the split of defects into predicted and missed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSummary {
    pub cm: ConfusionMatrix,
    /// Indices of D_PRED: defects whose every artifact is labeled defective.
    pub predicted: Vec<usize>,
    /// Indices of D_MISS: defects with at least one artifact labeled clean.
    pub missed: Vec<usize>,
    /// The labels the outcome was computed from.
    pub labels: Vec<bool>,
    /// Total size of the artifacts labeled defective.
    pub flagged_size: u64,
    /// Total size of the artifacts labeled clean.
    pub unflagged_size: u64,
}

impl OutcomeSummary {
    pub fn predicted_ids<'a>(&'a self, project: &'a Project) -> Vec<&'a str> {
        self.predicted.iter().map(|&d| project.defects[d].id.as_str()).collect()
    }

    pub fn missed_ids<'a>(&'a self, project: &'a Project) -> Vec<&'a str> {
        self.missed.iter().map(|&d| project.defects[d].id.as_str()).collect()
    }
}

/// Counts the artifact outcomes and splits the defects into D_PRED and D_MISS.
pub fn classify(project: &Project, prediction: &Prediction) -> Result<OutcomeSummary> {
    prediction.check(project)?;
    let mut cm = ConfusionMatrix::default();
    let (mut flagged_size, mut unflagged_size) = (0, 0);
    for ((&def, &label), art) in project.defective.iter().zip(&prediction.labels).zip(&project.artifacts) {
        if label {
            flagged_size += art.size;
        } else {
            unflagged_size += art.size;
        }
        match (def, label) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    let (predicted, missed) = (0..project.defects.len())
        .partition(|&d| project.defects[d].members.iter().all(|&m| prediction.labels[m]));
    Ok(OutcomeSummary {
        cm,
        predicted,
        missed,
        labels: prediction.labels.clone(),
        flagged_size,
        unflagged_size,
    })
}
