//! Confusion matrices and cross-case classification summaries.
//!
//! Entries are percentages normalized by true class: entry `[t][p]` is
//! `100 * count(true = t and predicted = p) / count(true = t)`, so every
//! row with observations sums to 100. Rendering prints percentages with
//! exactly three decimals using grid-snapped truncation (see
//! [`format_pct`]), and every output starts with a class-order header that
//! states the normalization convention.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-normalized percentage confusion matrix for one case.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    /// Class codes in presentation order.
    pub classes: Vec<u8>,
    /// Class names matching `classes`.
    pub names: Vec<String>,
    /// Row-major percentages, `classes.len()` squared.
    pub entries: Vec<f64>,
    /// Number of true observations per class; 0 flags an empty row.
    pub row_counts: Vec<usize>,
    pub case_id: u32,
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Percentage at (true class index, predicted class index).
    pub fn entry(&self, t: usize, p: usize) -> f64 {
        self.entries[t * self.classes.len() + p]
    }

    /// Diagonal (correct classification) percentages.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_classes()).map(|k| self.entry(k, k)).collect()
    }
}

/// Count predictions into a row-normalized percentage matrix.
///
/// `classes` fixes the row/column order; every label in `truths` and
/// `predictions` must appear in it. A class with no true observations gets
/// a row of zeros and keeps `row_counts` at 0 so renderers can flag it.
pub fn confusion(
    truths: &[u8],
    predictions: &[u8],
    classes: &[(u8, &str)],
    case_id: u32,
) -> Result<ConfusionMatrix> {
    if truths.len() != predictions.len() {
        return Err(Error::Argument(format!(
            "{} truths vs {} predictions",
            truths.len(),
            predictions.len()
        )));
    }
    if classes.is_empty() {
        return Err(Error::Argument("class list is empty".into()));
    }
    let n = classes.len();
    let index_of = |code: u8| -> Result<usize> {
        classes
            .iter()
            .position(|&(c, _)| c == code)
            .ok_or_else(|| Error::Argument(format!("label {code} not in the class list")))
    };
    let mut counts = vec![0usize; n * n];
    let mut row_counts = vec![0usize; n];
    for (&t, &p) in truths.iter().zip(predictions) {
        let ti = index_of(t)?;
        let pi = index_of(p)?;
        counts[ti * n + pi] += 1;
        row_counts[ti] += 1;
    }
    let mut entries = vec![0.0; n * n];
    for t in 0..n {
        if row_counts[t] == 0 {
            continue;
        }
        for p in 0..n {
            entries[t * n + p] = 100.0 * counts[t * n + p] as f64 / row_counts[t] as f64;
        }
    }
    Ok(ConfusionMatrix {
        classes: classes.iter().map(|&(c, _)| c).collect(),
        names: classes.iter().map(|&(_, s)| String::from(s)).collect(),
        entries,
        row_counts,
        case_id,
    })
}

/// Mean of the diagonal per class across cases, in class order.
///
/// All matrices must share the same class ordering.
pub fn average_correct(matrices: &[ConfusionMatrix]) -> Result<Vec<(String, f64)>> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::Argument("no matrices to average".into()))?;
    for m in matrices {
        if m.classes != first.classes {
            return Err(Error::Argument(
                "matrices do not share a class ordering".into(),
            ));
        }
    }
    Ok(first
        .names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            // Summing in value order makes the mean independent of the
            // order the matrices were supplied in, bit for bit.
            let mut diags: Vec<f64> = matrices.iter().map(|m| m.entry(k, k)).collect();
            diags.sort_by(f64::total_cmp);
            let mean = diags.iter().sum::<f64>() / matrices.len() as f64;
            (name.clone(), mean)
        })
        .collect())
}

/// Output styles for [`render_matrix`] and [`render_averages`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    /// Comma-separated values with a header row.
    DelimitedText,
    /// Fixed-width human-readable table.
    AlignedTable,
}

/// Three-decimal fixed-point percentage.
///
/// Values are scaled to thousandths, snapped onto the grid when within
/// 1e-9 of a grid point (absorbing binary representation error in inputs
/// that are exact three-decimal figures), then truncated toward zero.
/// Truncation rather than rounding is what reproduces published
/// three-decimal averages of three-decimal inputs digit for digit.
pub fn format_pct(value: f64) -> String {
    debug_assert!(value >= 0.0, "percentages are nonnegative");
    let milli = libm::floor(value * 1000.0 + 1e-6) as i64;
    format!("{}.{:03}", milli / 1000, milli % 1000)
}

fn header(classes: &[String]) -> String {
    format!(
        "# rows: true class (each row sums to 100); columns: predicted class\n# classes: {}\n",
        classes.join(",")
    )
}

/// Render one confusion matrix.
pub fn render_matrix(matrix: &ConfusionMatrix, format: RenderFormat) -> String {
    let n = matrix.n_classes();
    let mut out = header(&matrix.names);
    match format {
        RenderFormat::DelimitedText => {
            out.push_str(&format!("case,{}\n", matrix.names.join(",")));
            for t in 0..n {
                let mut row = format!("case{} {}", matrix.case_id, matrix.names[t]);
                for p in 0..n {
                    row.push(',');
                    row.push_str(&format_pct(matrix.entry(t, p)));
                }
                if matrix.row_counts[t] == 0 {
                    row.push_str(",n=0");
                }
                row.push('\n');
                out.push_str(&row);
            }
        }
        RenderFormat::AlignedTable => {
            let width = matrix
                .names
                .iter()
                .map(|n| n.len())
                .max()
                .unwrap_or(8)
                .max(8);
            out.push_str(&format!("{:width$}", "", width = width + 2));
            for name in &matrix.names {
                out.push_str(&format!("{name:>width$}", width = width + 2));
            }
            out.push('\n');
            for t in 0..n {
                out.push_str(&format!("{:width$}", matrix.names[t], width = width + 2));
                for p in 0..n {
                    out.push_str(&format!(
                        "{:>width$}",
                        format_pct(matrix.entry(t, p)),
                        width = width + 2
                    ));
                }
                if matrix.row_counts[t] == 0 {
                    out.push_str("  (n=0)");
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Render per-class average correct classification figures.
pub fn render_averages(averages: &[(String, f64)], format: RenderFormat) -> String {
    let names: Vec<String> = averages.iter().map(|(n, _)| n.clone()).collect();
    let mut out = header(&names);
    match format {
        RenderFormat::DelimitedText => {
            out.push_str("class,average_correct\n");
            for (name, v) in averages {
                out.push_str(&format!("{name},{}\n", format_pct(*v)));
            }
        }
        RenderFormat::AlignedTable => {
            let width = names.iter().map(|n| n.len()).max().unwrap_or(8).max(8);
            for (name, v) in averages {
                out.push_str(&format!(
                    "{name:width$}  {:>10}\n",
                    format_pct(*v),
                    width = width
                ));
            }
        }
    }
    out
}
