//! Delimited-text exports: scree data, cluster projections, confusion
//! matrices and cross-case summaries.

use std::path::Path;

use cirsense_core::channel::Scenario;
use cirsense_core::linalg::Mat;
use cirsense_core::report::ConfusionMatrix;

use crate::conf::atomic_write;
use crate::error::{AppError, Result};

/// Write scree pairs as `component,percent` lines.
pub fn write_scree(path: &Path, scree: &[(usize, f64)]) -> Result<()> {
    let mut out = String::from("component,percent\n");
    for (idx, pct) in scree {
        out.push_str(&format!("{idx},{pct}\n"));
    }
    atomic_write(path, out.as_bytes())
}

/// Write a k-column projection with a trailing label column.
pub fn write_projection(path: &Path, coords: &Mat, labels: &[Scenario]) -> Result<()> {
    if coords.rows() != labels.len() {
        return Err(AppError::Config(format!(
            "{} projection rows vs {} labels",
            coords.rows(),
            labels.len()
        )));
    }
    let mut out = String::new();
    for k in 0..coords.cols() {
        out.push_str(&format!("pc{},", k + 1));
    }
    out.push_str("label\n");
    for i in 0..coords.rows() {
        for v in coords.row(i) {
            out.push_str(&format!("{v},"));
        }
        out.push_str(labels[i].name());
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Parse a confusion matrix back from its delimited rendering
/// (`report::render_matrix` with `RenderFormat::DelimitedText`).
///
/// Entries come back at the rendered three-decimal precision, which is the
/// precision cross-case summaries are defined on.
pub fn parse_matrix_csv(text: &str) -> Result<ConfusionMatrix> {
    let mut names: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut row_counts: Vec<usize> = Vec::new();
    let mut case_id = None;
    for line in text.lines() {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields[0] == "case" {
            names = fields[1..].iter().map(|s| s.to_string()).collect();
            continue;
        }
        let (case_field, _) = fields[0]
            .split_once(' ')
            .ok_or_else(|| AppError::Format(format!("matrix row `{line}` lacks a case tag")))?;
        let id: u32 = case_field
            .strip_prefix("case")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| AppError::Format(format!("bad case tag `{case_field}`")))?;
        case_id = Some(id);
        let mut row = Vec::new();
        let mut empty = false;
        for f in &fields[1..] {
            if *f == "n=0" {
                empty = true;
                continue;
            }
            row.push(
                f.parse::<f64>()
                    .map_err(|_| AppError::Format(format!("bad matrix entry `{f}`")))?,
            );
        }
        row_counts.push(if empty { 0 } else { 1 });
        rows.push(row);
    }
    let n = names.len();
    if n == 0 || rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(AppError::Format(
            "matrix csv does not contain an n x n block with a class header".into(),
        ));
    }
    let mut classes = Vec::with_capacity(n);
    for name in &names {
        classes.push(
            Scenario::from_name(name)
                .map_err(|_| AppError::Format(format!("unknown class `{name}`")))?
                .code(),
        );
    }
    Ok(ConfusionMatrix {
        classes,
        names,
        entries: rows.into_iter().flatten().collect(),
        row_counts,
        case_id: case_id.unwrap_or(0),
    })
}
