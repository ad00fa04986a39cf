//! Reading and writing the defect matrix and prediction CSV formats.
//!
//! Matrix: header `file,loc,<defect-id>...`, then one row per artifact with
//! its size and a `0`/`1` incidence cell per defect. Prediction: header
//! `file,label`, then one `path,{0|1}` row per artifact. Fields are never
//! quoted, so ids cannot contain commas. LF and CRLF line endings are both
//! accepted.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, ParseError, Result};
use crate::model::{Artifact, Defect, Prediction, Project, Relationship};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let trimmed = text.trim_end_matches(['\n', '\r']);
    trimmed
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .take_while(move |_| !trimmed.is_empty())
}

fn cell(line: usize, col: usize, field: &str) -> Result<bool, ParseError> {
    match field {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(ParseError::at(line, Some(col), format!("expected 0 or 1, got {other:?}"))),
    }
}

/// Parses a defect matrix into an n-to-m [`Project`].
pub fn parse_matrix(text: &str) -> Result<Project> {
    let mut lines = data_lines(text);
    let (_, header) = lines
        .next()
        .ok_or_else(|| ParseError::at(1, None, "missing header `file,loc,...`"))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 2 || columns[0] != "file" || columns[1] != "loc" {
        return Err(ParseError::at(1, None, "header must start with `file,loc`").into());
    }
    let defect_ids = &columns[2..];
    let mut seen = HashSet::new();
    for (j, id) in defect_ids.iter().enumerate() {
        if id.is_empty() {
            return Err(ParseError::at(1, Some(j + 3), "empty defect id").into());
        }
        if !seen.insert(*id) {
            return Err(ParseError::at(1, Some(j + 3), format!("duplicate defect {id}")).into());
        }
    }

    let mut artifacts = Vec::new();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); defect_ids.len()];
    let mut file_ids = HashSet::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != columns.len() {
            return Err(ParseError::at(
                line,
                None,
                format!("expected {} fields, found {}", columns.len(), fields.len()),
            )
            .into());
        }
        let id = fields[0];
        if id.is_empty() {
            return Err(ParseError::at(line, Some(1), "empty file id").into());
        }
        if !file_ids.insert(id) {
            return Err(ParseError::at(line, Some(1), format!("duplicate file {id}")).into());
        }
        let size: u64 = fields[1]
            .parse()
            .map_err(|_| ParseError::at(line, Some(2), format!("invalid loc {:?}", fields[1])))?;
        if size < 1 {
            return Err(ParseError::at(line, Some(2), "loc must be at least 1").into());
        }
        let a = artifacts.len();
        for (j, f) in fields[2..].iter().enumerate() {
            if cell(line, j + 3, f)? {
                members[j].push(a);
            }
        }
        artifacts.push(Artifact::new(id, size));
    }

    if let Some(j) = members.iter().position(Vec::is_empty) {
        return Err(ParseError::at(
            1,
            Some(j + 3),
            format!("defect {} affects no file", defect_ids[j]),
        )
        .into());
    }
    let defects = defect_ids
        .iter()
        .zip(members)
        .map(|(id, m)| Defect::new(*id, m))
        .collect();
    Project::from_defects(artifacts, defects, Relationship::NtoM)
}

/// Serializes an n-to-m project back into the matrix format.
pub fn write_matrix(project: &Project) -> String {
    let mut out = String::from("file,loc");
    for d in project.defects() {
        out.push(',');
        out.push_str(&d.id);
    }
    out.push('\n');
    let mut row = vec![false; project.defects().len()];
    for (i, a) in project.artifacts().iter().enumerate() {
        for (j, d) in project.defects().iter().enumerate() {
            row[j] = d.members().binary_search(&i).is_ok();
        }
        let _ = write!(out, "{},{}", a.id, a.size);
        for &b in &row {
            out.push_str(if b { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}

/// Parses a `file,label` CSV into a total labeling of `project`.
pub fn parse_prediction(text: &str, project: &Project) -> Result<Prediction> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((_, "file,label")) => {}
        _ => return Err(ParseError::at(1, None, "header must be `file,label`").into()),
    }
    let mut labels: Vec<Option<bool>> = vec![None; project.len()];
    for (line, row) in lines {
        let (id, label) = row
            .split_once(',')
            .filter(|(_, l)| !l.contains(','))
            .ok_or_else(|| ParseError::at(line, None, "expected 2 fields"))?;
        let i = project
            .artifact_index(id)
            .ok_or_else(|| ParseError::at(line, Some(1), format!("unknown artifact {id}")))?;
        let label = cell(line, 2, label)?;
        if labels[i].replace(label).is_some() {
            return Err(ParseError::at(line, Some(1), format!("duplicate label for {id}")).into());
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| Error::UnlabeledArtifact(project.artifacts()[i].id.clone())))
        .collect::<Result<_>>()?;
    Ok(Prediction::from_vec(labels))
}

pub fn write_prediction(project: &Project, prediction: &Prediction) -> String {
    let mut out = String::from("file,label\n");
    for (a, &l) in project.artifacts().iter().zip(prediction.labels()) {
        let _ = writeln!(out, "{},{}", a.id, u8::from(l));
    }
    out
}

/// Dataset-level statistics of a project.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub n_artifacts: usize,
    pub n_defective: usize,
    pub n_defects: usize,
    /// Mean `|d|`; 0 when there are no defects (see `no_defects`).
    pub mean_members: f64,
    pub mean_size: f64,
    pub no_defects: bool,
}

pub fn summarize(project: &Project) -> SummaryStats {
    let n_defects = project.defects().len();
    let members: usize = project.defects().iter().map(|d| d.cardinality()).sum();
    let size: u64 = project.artifacts().iter().map(|a| a.size).sum();
    let mean = |total: f64, n: usize| if n == 0 { 0.0 } else { total / n as f64 };
    SummaryStats {
        n_artifacts: project.len(),
        n_defective: project.n_defective(),
        n_defects,
        mean_members: mean(members as f64, n_defects),
        mean_size: mean(size as f64, project.len()),
        no_defects: n_defects == 0,
    }
}
