//! Record serialization, binned trends of boundaries against precision or
//! recall, and SVG scatter plots.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boundary::ExtendedBound;
use crate::cost::{ModelKind, QaMode};
use crate::error::{Error, ParseError, Result};
use crate::model::{ConfusionMatrix, Relationship};
use crate::simulation::ExperimentRecord;

pub const RECORD_HEADER: &str =
    "project,accuracy,repetition,p_qf,qa_mode,relationship,tp,fp,tn,fn,precision,recall,lower,upper,cost_saving";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Flat, serde-friendly shape of an [`ExperimentRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RecordRow {
    project: String,
    accuracy: f64,
    repetition: u32,
    p_qf: f64,
    qa_mode: QaMode,
    relationship: Relationship,
    tp: u64,
    fp: u64,
    tn: u64,
    #[serde(rename = "fn")]
    fn_: u64,
    precision: Option<f64>,
    recall: Option<f64>,
    lower: ExtendedBound,
    upper: ExtendedBound,
    cost_saving: bool,
}

impl From<&ExperimentRecord> for RecordRow {
    fn from(r: &ExperimentRecord) -> Self {
        Self {
            project: r.project.clone(),
            accuracy: r.accuracy,
            repetition: r.repetition,
            p_qf: r.p_qf,
            qa_mode: r.kind.qa_mode,
            relationship: r.kind.relationship,
            tp: r.cm.tp,
            fp: r.cm.fp,
            tn: r.cm.tn,
            fn_: r.cm.fn_,
            precision: r.precision,
            recall: r.recall,
            lower: r.lower,
            upper: r.upper,
            cost_saving: r.cost_saving,
        }
    }
}

impl From<RecordRow> for ExperimentRecord {
    fn from(r: RecordRow) -> Self {
        Self {
            project: r.project,
            accuracy: r.accuracy,
            repetition: r.repetition,
            p_qf: r.p_qf,
            kind: ModelKind::new(r.qa_mode, r.relationship),
            cm: ConfusionMatrix::new(r.tp, r.fp, r.tn, r.fn_),
            precision: r.precision,
            recall: r.recall,
            lower: r.lower,
            upper: r.upper,
            cost_saving: r.cost_saving,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Renders records as CSV (with header) or as a JSON array.
///
/// Floats use the shortest decimal that round-trips. An unbounded boundary
/// is written as `inf`; an undefined precision or recall is an empty CSV
/// field or JSON `null`.
pub fn emit_records(records: &[ExperimentRecord], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::with_capacity(96 * (records.len() + 1));
            out.push_str(RECORD_HEADER);
            out.push('\n');
            for r in records {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.project,
                    r.accuracy,
                    r.repetition,
                    r.p_qf,
                    r.kind.qa_mode,
                    r.kind.relationship,
                    r.cm.tp,
                    r.cm.fp,
                    r.cm.tn,
                    r.cm.fn_,
                    opt(r.precision),
                    opt(r.recall),
                    r.lower,
                    r.upper,
                    r.cost_saving
                );
            }
            out
        }
        Format::Json => {
            let rows: Vec<RecordRow> = records.iter().map(RecordRow::from).collect();
            serde_json::to_string_pretty(&rows).expect("records serialize") + "\n"
        }
    }
}

fn field<T: FromStr>(line: usize, col: usize, s: &str) -> Result<T, ParseError> {
    s.parse()
        .map_err(|_| ParseError::at(line, Some(col), format!("cannot parse {s:?}")))
}

fn opt_field(line: usize, col: usize, s: &str) -> Result<Option<f64>, ParseError> {
    if s.is_empty() {
        Ok(None)
    } else {
        field(line, col, s).map(Some)
    }
}

fn bound_field(line: usize, col: usize, s: &str) -> Result<ExtendedBound, ParseError> {
    if s == "inf" {
        Ok(ExtendedBound::Unbounded)
    } else {
        field(line, col, s).map(ExtendedBound::Finite)
    }
}

/// Reads records written by [`emit_records`].
pub fn parse_records(text: &str, format: Format) -> Result<Vec<ExperimentRecord>> {
    if format == Format::Json {
        let rows: Vec<RecordRow> = serde_json::from_str(text)
            .map_err(|e| ParseError::at(e.line(), Some(e.column()), e.to_string()))?;
        return Ok(rows.into_iter().map(ExperimentRecord::from).collect());
    }
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == RECORD_HEADER => {}
        _ => return Err(ParseError::at(1, None, "unexpected record header").into()),
    }
    let mut out = Vec::new();
    for (n, line) in lines {
        let line = line.trim_end_matches('\r');
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 15 {
            return Err(ParseError::at(n, None, format!("expected 15 fields, found {}", f.len())).into());
        }
        let mode: QaMode = f[4]
            .parse()
            .map_err(|_| ParseError::at(n, Some(5), format!("unknown qa mode {:?}", f[4])))?;
        let rel: Relationship = f[5]
            .parse()
            .map_err(|_| ParseError::at(n, Some(6), format!("unknown relationship {:?}", f[5])))?;
        out.push(ExperimentRecord {
            project: f[0].to_string(),
            accuracy: field(n, 2, f[1])?,
            repetition: field(n, 3, f[2])?,
            p_qf: field(n, 4, f[3])?,
            kind: ModelKind::new(mode, rel),
            cm: ConfusionMatrix::new(
                field(n, 7, f[6])?,
                field(n, 8, f[7])?,
                field(n, 9, f[8])?,
                field(n, 10, f[9])?,
            ),
            precision: opt_field(n, 11, f[10])?,
            recall: opt_field(n, 12, f[11])?,
            lower: bound_field(n, 13, f[12])?,
            upper: bound_field(n, 14, f[13])?,
            cost_saving: field(n, 15, f[14])?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Precision,
    Recall,
}

impl Metric {
    pub fn of(self, r: &ExperimentRecord) -> Option<f64> {
        match self {
            Self::Precision => r.precision,
            Self::Recall => r.recall,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Precision => "precision",
            Self::Recall => "recall",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "precision" => Ok(Self::Precision),
            "recall" => Ok(Self::Recall),
            other => Err(Error::InvalidParam(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    Lower,
    Upper,
}

impl BoundSide {
    pub fn of(self, r: &ExperimentRecord) -> ExtendedBound {
        match self {
            Self::Lower => r.lower,
            Self::Upper => r.upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendBin {
    pub midpoint: f64,
    /// Mean boundary of the bin; `None` for an empty bin.
    pub mean: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendSeries {
    pub metric: Metric,
    pub kind: ModelKind,
    pub bound: BoundSide,
    pub bins: Vec<TrendBin>,
    /// Records of `kind` left out for an undefined metric or unbounded boundary.
    pub excluded: usize,
}

fn bin_of(v: f64, n_bins: usize) -> usize {
    ((v * n_bins as f64).floor() as usize).min(n_bins - 1)
}

/// Mean boundary per equal-width metric bin over `[0, 1]`, for records of
/// `kind`. Values in a bin are summed in sorted order, so the result does
/// not depend on record order.
pub fn trend(
    records: &[ExperimentRecord],
    metric: Metric,
    kind: ModelKind,
    bound: BoundSide,
    n_bins: usize,
) -> Result<TrendSeries> {
    if n_bins < 2 {
        return Err(Error::InvalidParam(format!("need at least 2 bins, got {n_bins}")));
    }
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    let mut excluded = 0;
    for r in records.iter().filter(|r| r.kind == kind) {
        match (metric.of(r), bound.of(r)) {
            (Some(m), ExtendedBound::Finite(b)) => values[bin_of(m, n_bins)].push(b),
            _ => excluded += 1,
        }
    }
    let bins = values
        .into_iter()
        .enumerate()
        .map(|(i, mut vs)| {
            vs.sort_by(f64::total_cmp);
            TrendBin {
                midpoint: (i as f64 + 0.5) / n_bins as f64,
                mean: (!vs.is_empty()).then(|| vs.iter().sum::<f64>() / vs.len() as f64),
                count: vs.len(),
            }
        })
        .collect();
    Ok(TrendSeries {
        metric,
        kind,
        bound,
        bins,
        excluded,
    })
}

/// Lower edge of the first metric bin in which at least half of the records
/// of `kind` are cost-saving.
pub fn first_saving_bin(
    records: &[ExperimentRecord],
    metric: Metric,
    kind: ModelKind,
    n_bins: usize,
) -> Option<f64> {
    let n_bins = n_bins.max(1);
    let mut tally = vec![(0usize, 0usize); n_bins];
    for r in records.iter().filter(|r| r.kind == kind) {
        if let Some(m) = metric.of(r) {
            let t = &mut tally[bin_of(m, n_bins)];
            t.0 += usize::from(r.cost_saving);
            t.1 += 1;
        }
    }
    tally
        .iter()
        .position(|&(saving, total)| total > 0 && 2 * saving >= total)
        .map(|i| i as f64 / n_bins as f64)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const LOWER_COLOR: &str = "#1f77b4";
const UPPER_COLOR: &str = "#d62728";

/// Scatter of lower and upper boundaries against `metric` for records of
/// `kind`, overlaid with their `n_bins` trend lines, as an SVG 1.1 document.
pub fn render_scatter(
    records: &[ExperimentRecord],
    metric: Metric,
    kind: ModelKind,
    n_bins: usize,
) -> Result<String> {
    let mut lower_pts = Vec::new();
    let mut upper_pts = Vec::new();
    for r in records.iter().filter(|r| r.kind == kind) {
        let Some(m) = metric.of(r) else { continue };
        if let ExtendedBound::Finite(v) = r.lower {
            lower_pts.push((m, v));
        }
        if let ExtendedBound::Finite(v) = r.upper {
            upper_pts.push((m, v));
        }
    }
    if lower_pts.is_empty() && upper_pts.is_empty() {
        return Err(Error::InvalidParam("nothing to plot".into()));
    }
    let lower_trend = trend(records, metric, kind, BoundSide::Lower, n_bins)?;
    let upper_trend = trend(records, metric, kind, BoundSide::Upper, n_bins)?;

    let y_max = lower_pts
        .iter()
        .chain(&upper_pts)
        .map(|p| p.1)
        .fold(0.0f64, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + x * plot_w;
    let sy = |y: f64| MARGIN_T + plot_h - y / y_max * plot_h;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">Cost ratio boundaries, {kind}</text>"#,
        WIDTH / 2.0
    );

    // Axes and ticks.
    let (x0, x1, y0, y1) = (sx(0.0), sx(1.0), sy(0.0), sy(y_max));
    let _ = writeln!(svg, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#);
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let x = sx(t);
        let y = sy(t * y_max);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}"/>"#, y0 + 5.0);
        let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}"/>"#, x0 - 5.0);
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="11">"#);
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{t:.1}</text>"#,
            sx(t),
            y0 + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            sy(t * y_max) + 4.0,
            tick_label(t * y_max)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        metric.name()
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">cost ratio C</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );

    for (pts, color, class) in [(&lower_pts, LOWER_COLOR, "lower"), (&upper_pts, UPPER_COLOR, "upper")] {
        let _ = writeln!(svg, r#"<g class="{class}" fill="{color}" fill-opacity="0.35">"#);
        for &(m, v) in pts.iter() {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, sx(m), sy(v));
        }
        let _ = writeln!(svg, "</g>");
    }

    for (series, color) in [(&lower_trend, LOWER_COLOR), (&upper_trend, UPPER_COLOR)] {
        let points: Vec<String> = series
            .bins
            .iter()
            .filter_map(|b| b.mean.map(|m| format!("{:.2},{:.2}", sx(b.midpoint), sy(m))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
    }

    // Legend.
    let lx = MARGIN_L + 12.0;
    for (i, (label, color)) in [("lower boundary", LOWER_COLOR), ("upper boundary", UPPER_COLOR)]
        .iter()
        .enumerate()
    {
        let ly = MARGIN_T + 10.0 + 18.0 * i as f64;
        let _ = writeln!(svg, r#"<rect x="{lx:.2}" y="{:.2}" width="10" height="10" fill="{color}"/>"#, ly - 9.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{ly:.2}" font-family="sans-serif" font-size="11">{label}</text>"#,
            lx + 16.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn tick_label(v: f64) -> String {
    if v >= 100.0 {
        format!("{v:.0}")
    } else if v >= 10.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KIND: ModelKind = ModelKind::new(QaMode::Constant, Relationship::NtoM);

    fn record(precision: Option<f64>, lower: ExtendedBound, upper: ExtendedBound) -> ExperimentRecord {
        ExperimentRecord {
            project: "p".into(),
            accuracy: 0.5,
            repetition: 0,
            p_qf: 0.0,
            kind: KIND,
            cm: ConfusionMatrix::new(1, 1, 1, 1),
            precision,
            recall: Some(0.5),
            lower,
            upper,
            cost_saving: true,
        }
    }

    #[test]
    fn csv_rendering_rules() {
        let r = record(None, ExtendedBound::Finite(1.5), ExtendedBound::Unbounded);
        let csv = emit_records(&[r.clone()], Format::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], RECORD_HEADER);
        assert_eq!(lines[1], "p,0.5,0,0,constant,n-to-m,1,1,1,1,,0.5,1.5,inf,true");
        assert_eq!(parse_records(&csv, Format::Csv).unwrap(), [r]);
    }

    #[test]
    fn json_round_trip() {
        let rs = vec![
            record(None, ExtendedBound::Finite(0.1 + 0.2), ExtendedBound::Unbounded),
            record(Some(1.0 / 3.0), ExtendedBound::Unbounded, ExtendedBound::Finite(2.0)),
        ];
        let json = emit_records(&rs, Format::Json);
        assert!(json.contains("\"precision\": null"));
        assert!(json.contains("\"upper\": \"inf\""));
        assert_eq!(parse_records(&json, Format::Json).unwrap(), rs);
    }

    #[test]
    fn malformed_csv_records() {
        assert!(parse_records("nope\n", Format::Csv).is_err());
        let bad = format!("{RECORD_HEADER}\np,0.5,0,0,constant,n-to-m,1,1,1,1,,0.5,x,inf,true\n");
        match parse_records(&bad, Format::Csv).unwrap_err() {
            Error::Parse(e) => assert_eq!((e.line, e.column), (2, Some(13))),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn trend_binning() {
        let rs = [
            record(Some(0.1), ExtendedBound::Finite(1.0), ExtendedBound::Unbounded),
            record(Some(0.9), ExtendedBound::Finite(3.0), ExtendedBound::Unbounded),
        ];
        let t = trend(&rs, Metric::Precision, KIND, BoundSide::Lower, 2).unwrap();
        assert_eq!(
            t.bins,
            [
                TrendBin { midpoint: 0.25, mean: Some(1.0), count: 1 },
                TrendBin { midpoint: 0.75, mean: Some(3.0), count: 1 }
            ]
        );
        let t = trend(&rs, Metric::Precision, KIND, BoundSide::Upper, 2).unwrap();
        assert!(t.bins.iter().all(|b| b.count == 0 && b.mean.is_none()));
        assert_eq!(t.excluded, 2);
        assert!(trend(&rs, Metric::Precision, KIND, BoundSide::Upper, 1).is_err());
    }

    #[test]
    fn trend_puts_perfect_precision_in_last_bin() {
        let rs: Vec<_> = (0..5)
            .map(|i| record(Some(1.0), ExtendedBound::Finite(i as f64), ExtendedBound::Unbounded))
            .collect();
        let t = trend(&rs, Metric::Precision, KIND, BoundSide::Lower, 20).unwrap();
        assert_eq!(t.bins[19].count, 5);
        assert_eq!(t.bins.iter().map(|b| b.count).sum::<usize>(), 5);
        assert_eq!(t.bins[19].mean, Some(2.0));
    }

    #[test]
    fn scatter_elements() {
        let rs: Vec<_> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&p| record(Some(p), ExtendedBound::Finite(p * 2.0), ExtendedBound::Finite(p * 5.0)))
            .collect();
        let svg = render_scatter(&rs, Metric::Precision, KIND, 20).unwrap();
        assert_eq!(svg.matches("<circle").count(), 6);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">precision</text>"));
        assert_eq!(render_scatter(&rs, Metric::Precision, KIND, 20).unwrap(), svg);
        let err = render_scatter(&[], Metric::Precision, KIND, 20).unwrap_err();
        assert!(err.to_string().contains("nothing to plot"));
    }

    #[test]
    fn saving_bin() {
        let mut rs = vec![
            record(Some(0.05), ExtendedBound::Unbounded, ExtendedBound::Unbounded),
            record(Some(0.45), ExtendedBound::Finite(1.0), ExtendedBound::Unbounded),
        ];
        rs[0].cost_saving = false;
        assert_eq!(first_saving_bin(&rs, Metric::Precision, KIND, 10), Some(0.4));
        rs[1].cost_saving = false;
        assert_eq!(first_saving_bin(&rs, Metric::Precision, KIND, 10), None);
    }
}
