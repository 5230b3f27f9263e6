//! Trained model files: delimited text, one hyperplane line per class.
//!
//! ```text
//! # linear-svm-model v1
//! classes person_stationary,no_person,person_moving
//! frame_len 40
//! c 1
//! person_stationary <bias> <w0> ... <w39>
//! ...
//! ```
//!
//! Floats print at full (shortest round-trip) precision, so reading a file
//! back reproduces the model exactly.

use std::path::Path;

use cirsense_core::channel::Scenario;
use cirsense_core::linalg::Mat;
use cirsense_core::svm::LinearSvmModel;

use crate::conf::atomic_write;
use crate::error::{io_error, AppError, Result};

pub fn write_model(model: &LinearSvmModel, path: &Path) -> Result<()> {
    let names: Vec<&str> = model
        .classes
        .iter()
        .map(|&c| {
            Scenario::from_code(c)
                .map(|s| s.name())
                .unwrap_or("unknown")
        })
        .collect();
    let mut out = String::from("# linear-svm-model v1\n");
    out.push_str(&format!("classes {}\n", names.join(",")));
    out.push_str(&format!("frame_len {}\n", model.weights.cols()));
    out.push_str(&format!("c {}\n", model.c));
    for (k, name) in names.iter().enumerate() {
        out.push_str(name);
        out.push_str(&format!(" {}", model.biases[k]));
        for w in model.weights.row(k) {
            out.push_str(&format!(" {w}"));
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_model(path: &Path) -> Result<LinearSvmModel> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_model(&text).map_err(|e| e.in_stage(&path.display().to_string()))
}

pub fn parse_model(text: &str) -> Result<LinearSvmModel> {
    let mut names: Vec<String> = Vec::new();
    let mut frame_len = 0usize;
    let mut c = 1.0f64;
    let mut rows: Vec<(u8, f64, Vec<f64>)> = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let (head, rest) = line
            .split_once(' ')
            .ok_or_else(|| AppError::Format(format!("bad model line `{line}`")))?;
        match head {
            "classes" => names = rest.split(',').map(|s| s.to_string()).collect(),
            "frame_len" => {
                frame_len = rest
                    .parse()
                    .map_err(|_| AppError::Format(format!("bad frame_len `{rest}`")))?
            }
            "c" => {
                c = rest
                    .parse()
                    .map_err(|_| AppError::Format(format!("bad penalty `{rest}`")))?
            }
            name => {
                let scenario = Scenario::from_name(name)
                    .map_err(|_| AppError::Format(format!("unknown class `{name}`")))?;
                let mut values = Vec::new();
                for tok in rest.split_whitespace() {
                    values.push(
                        tok.parse::<f64>()
                            .map_err(|_| AppError::Format(format!("bad weight `{tok}`")))?,
                    );
                }
                if values.len() != frame_len + 1 {
                    return Err(AppError::Format(format!(
                        "class `{name}`: {} values for frame_len {frame_len}",
                        values.len()
                    )));
                }
                let bias = values[0];
                rows.push((scenario.code(), bias, values[1..].to_vec()));
            }
        }
    }
    if rows.len() != names.len() || rows.is_empty() {
        return Err(AppError::Format(format!(
            "model lists {} classes but {} hyperplane lines",
            names.len(),
            rows.len()
        )));
    }
    let mut weights = Mat::zeros(rows.len(), frame_len);
    let mut biases = Vec::with_capacity(rows.len());
    let mut classes = Vec::with_capacity(rows.len());
    for (k, (code, bias, w)) in rows.iter().enumerate() {
        classes.push(*code);
        biases.push(*bias);
        weights.row_mut(k).copy_from_slice(w);
    }
    Ok(LinearSvmModel {
        classes,
        weights,
        biases,
        c,
        iterations: vec![0; rows.len()],
        objectives: vec![0.0; rows.len()],
    })
}
