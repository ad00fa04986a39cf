use std::fmt;

use thiserror::Error;

use crate::model::Relationship;

/// Errors raised when inputs violate a model, cost, or configuration contract.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate artifact {0}")]
    DuplicateArtifact(String),
    #[error("artifact {0} has size 0; sizes must be at least 1")]
    ZeroSize(String),
    #[error("defect {0} affects no artifact")]
    EmptyDefect(String),
    #[error("defect {defect} references unknown artifact {artifact}")]
    UnknownMember { defect: String, artifact: String },
    #[error("{relationship} view violated by defect {defect}: {reason}")]
    RelationshipViolation {
        relationship: Relationship,
        defect: String,
        reason: &'static str,
    },
    #[error("unlabeled artifact {0}")]
    UnlabeledArtifact(String),
    #[error("unknown artifact {0}")]
    UnknownArtifact(String),
    #[error("duplicate label for artifact {0}")]
    DuplicateLabel(String),
    #[error("prediction has {found} labels but the project has {expected} artifacts")]
    LabelCount { expected: usize, found: usize },
    #[error("project is a {found} view but the cost model expects {expected}")]
    RelationshipMismatch {
        expected: Relationship,
        found: Relationship,
    },
    #[error("views can only be derived from n-to-m data, got {0}")]
    ViewSource(Relationship),
    #[error("qa failure needs a defect with at least one artifact")]
    ZeroCardinality,
    #[error("missing {what} for {id}")]
    MissingCostEntry { what: &'static str, id: String },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A located failure while reading one of the CSV input formats.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    /// 1-based column (field) number, when the failure is tied to one cell.
    pub column: Option<usize>,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(line: usize, column: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(col) => write!(f, "line {}, column {}: {}", self.line, col, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}
