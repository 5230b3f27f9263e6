//! The four pipeline commands: simulate, pca, eval, pipeline.
//!
//! Every command is a pure function of the resolved [`RunConfig`] and the
//! filesystem: all randomness is keyed from the configured seeds, outputs
//! are written atomically, and rerunning with the same config reproduces
//! every byte.

use std::path::{Path, PathBuf};

use cirsense_core::channel::{Event, Scenario};
use cirsense_core::dataset::{build_case, case_event, pca_subset, FrameSet, Normalizer};
use cirsense_core::estimator::run_capture;
use cirsense_core::pca::{pca, project, scree};
use cirsense_core::report::{
    average_correct, confusion, render_averages, render_matrix, ConfusionMatrix, RenderFormat,
};
use cirsense_core::rng;
use cirsense_core::svm::{predict, train, Multiclass, SvmConfig};

use crate::conf::{atomic_write, RunConfig};
use crate::error::{AppError, Result};
use crate::exports::{parse_matrix_csv, write_projection, write_scree};
use crate::framefile::{read_frame_file, write_frames};
use crate::model_file::write_model;
use crate::scenario_file::ScenarioLibrary;

/// Conventional frame file name for one capture.
pub fn frame_file_name(set_id: u32, scenario: Scenario) -> String {
    format!("set{set_id}_{}.csns", scenario.name())
}

fn matrix_csv_name(case_id: u8) -> String {
    format!("case{case_id}_confusion.csv")
}

fn matrix_table_name(case_id: u8) -> String {
    format!("case{case_id}_confusion.txt")
}

fn model_name(case_id: u8) -> String {
    format!("case{case_id}_model.txt")
}

fn summary_csv_name(event: Event) -> String {
    format!("summary_{}_avg.csv", event.name())
}

fn summary_table_name(event: Event) -> String {
    format!("summary_{}_avg.txt", event.name())
}

/// The per-capture seed: keyed by the set seed and the scenario code so
/// every capture draws an independent, reproducible stream.
fn capture_seed(set_seed: u64, scenario: Scenario) -> u64 {
    rng::mix(&[set_seed, scenario.code() as u64])
}

/// Simulate all three sets of the configured event: nine frame files.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let library = ScenarioLibrary::load(&cfg.scenario_file)?;
    let taps = cfg.cir_taps();
    let mut paths = Vec::with_capacity(9);
    for set_idx in 0..3usize {
        let set_id = set_idx as u32 + 1;
        for scenario in cfg.event.scenarios() {
            let spec = library.spec_with_snr(scenario, cfg.snr_db)?;
            let frames = run_capture(
                &spec,
                cfg.frames_per_set,
                capture_seed(cfg.seeds[set_idx], scenario),
                taps,
                cfg.tsc_index,
                set_id,
            )?;
            let path = cfg.out_dir.join(frame_file_name(set_id, scenario));
            write_frames(&frames, &path)?;
            paths.push(path);
        }
    }
    Ok(paths)
}

/// Read one set's three scenario files into a validated [`FrameSet`].
fn load_frame_set(paths: &[PathBuf], event: Event) -> Result<FrameSet> {
    if paths.len() != 3 {
        return Err(AppError::Config(format!(
            "a set needs exactly 3 scenario files, got {}",
            paths.len()
        )));
    }
    let mut collected: Vec<(u32, Scenario, Vec<cirsense_core::CirFrame>)> = Vec::new();
    for path in paths {
        let (header, frames) = read_frame_file(path)?;
        if header.event != event {
            return Err(AppError::Config(format!(
                "{}: event ({}) file used in an event ({}) run",
                path.display(),
                header.event.name(),
                event.name()
            )));
        }
        collected.push((header.set_id, header.scenario, frames));
    }
    let set_id = collected[0].0;
    if collected.iter().any(|(id, _, _)| *id != set_id) {
        return Err(AppError::Config(
            "scenario files come from different sets".into(),
        ));
    }
    let mut per_scenario: [Option<Vec<cirsense_core::CirFrame>>; 3] = [None, None, None];
    for (_, scenario, frames) in collected {
        let slot = event
            .scenarios()
            .iter()
            .position(|&s| s == scenario)
            .expect("event checked above");
        if per_scenario[slot].replace(frames).is_some() {
            return Err(AppError::Config(format!(
                "scenario `{}` appears twice in the set",
                scenario.name()
            )));
        }
    }
    let [a, b, c] = per_scenario;
    let (Some(a), Some(b), Some(c)) = (a, b, c) else {
        return Err(AppError::Config(
            "the set does not cover all three scenarios of the event".into(),
        ));
    };
    Ok(FrameSet::new(set_id, event, [a, b, c])?)
}

/// Default frame file paths of one set under the configured output dir.
fn default_set_paths(cfg: &RunConfig, set_id: u32) -> Vec<PathBuf> {
    cfg.event
        .scenarios()
        .iter()
        .map(|&s| cfg.out_dir.join(frame_file_name(set_id, s)))
        .collect()
}

/// PCA clustering export over the first `pca_n` frames per scenario of one
/// set (set 1 by default): a scree file and a k-column projection.
pub fn cmd_pca(cfg: &RunConfig, files: &[PathBuf]) -> Result<[PathBuf; 2]> {
    let paths = if files.is_empty() {
        default_set_paths(cfg, 1)
    } else {
        files.to_vec()
    };
    let set = load_frame_set(&paths, cfg.event)?;
    let subset = pca_subset(&set, cfg.pca_n)?;
    let normalized = Normalizer::fit(&subset.x)?.apply(&subset.x)?;
    let result = pca(&normalized)?;
    let coords = project(&result, cfg.pca_k)?;

    let scree_path = cfg.out_dir.join("scree.csv");
    write_scree(&scree_path, &scree(&result))?;
    let proj_path = cfg.out_dir.join("pca_projection.csv");
    write_projection(&proj_path, &coords, &subset.labels)?;
    Ok([scree_path, proj_path])
}

/// Everything one evaluation produces.
#[derive(Debug, Clone)]
pub struct EvalOutputs {
    pub matrix_csv: PathBuf,
    pub matrix_table: PathBuf,
    pub model: PathBuf,
    pub confusion: ConfusionMatrix,
    /// Written once all three cases of the event exist on disk.
    pub summary: Option<[PathBuf; 2]>,
}

/// Train on two sets, test on the held-out set, report the confusion
/// matrix, and refresh the cross-case summary when it becomes complete.
pub fn cmd_eval(cfg: &RunConfig, case_id: u8, files: &[PathBuf]) -> Result<EvalOutputs> {
    let event = case_event(case_id)?;
    if event != cfg.event {
        return Err(AppError::Config(format!(
            "case {case_id} belongs to event ({}), run is configured for event ({})",
            event.name(),
            cfg.event.name()
        )));
    }
    let paths = if files.is_empty() {
        (1..=3u32).flat_map(|id| default_set_paths(cfg, id)).collect()
    } else {
        files.to_vec()
    };
    if paths.len() != 9 {
        return Err(AppError::Config(format!(
            "eval needs the event's 9 frame files, got {}",
            paths.len()
        )));
    }
    let sets = [
        load_frame_set(&paths[0..3], event)?,
        load_frame_set(&paths[3..6], event)?,
        load_frame_set(&paths[6..9], event)?,
    ];
    let split = build_case(case_id, &sets)?;

    let normalizer = Normalizer::fit(&split.train.x)?;
    let train_x = normalizer.apply(&split.train.x)?;
    let test_x = normalizer.apply(&split.test.x)?;
    let train_labels: Vec<u8> = split.train.labels.iter().map(|s| s.code()).collect();

    let svm_config = SvmConfig {
        c: cfg.svm_c,
        tolerance: cfg.svm_tolerance,
        max_iterations: cfg.svm_max_iterations,
        multiclass: Multiclass::OneVsRest,
    };
    let model = train(&train_x, &train_labels, &svm_config)?;
    let predictions = predict(&model, &test_x)?;

    let truths: Vec<u8> = split.test.labels.iter().map(|s| s.code()).collect();
    let predicted: Vec<u8> = predictions.iter().map(|p| p.label).collect();
    let classes: Vec<(u8, &str)> = event
        .scenarios()
        .iter()
        .map(|&s| (s.code(), s.name()))
        .collect();
    let matrix = confusion(&truths, &predicted, &classes, case_id as u32)?;

    let matrix_csv = cfg.out_dir.join(matrix_csv_name(case_id));
    atomic_write(
        &matrix_csv,
        render_matrix(&matrix, RenderFormat::DelimitedText).as_bytes(),
    )?;
    let matrix_table = cfg.out_dir.join(matrix_table_name(case_id));
    atomic_write(
        &matrix_table,
        render_matrix(&matrix, RenderFormat::AlignedTable).as_bytes(),
    )?;
    let model_path = cfg.out_dir.join(model_name(case_id));
    write_model(&model, &model_path)?;

    let summary = refresh_summary(cfg, event)?;
    Ok(EvalOutputs {
        matrix_csv,
        matrix_table,
        model: model_path,
        confusion: matrix,
        summary,
    })
}

/// Event's case ids: 1-3 for (a), 4-6 for (b).
pub fn event_cases(event: Event) -> [u8; 3] {
    match event {
        Event::A => [1, 2, 3],
        Event::B => [4, 5, 6],
    }
}

/// When all three case matrices of the event exist, average their
/// diagonals into the cross-case summary files.
fn refresh_summary(cfg: &RunConfig, event: Event) -> Result<Option<[PathBuf; 2]>> {
    let mut matrices = Vec::new();
    for case_id in event_cases(event) {
        let path = cfg.out_dir.join(matrix_csv_name(case_id));
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path)
            .map_err(|e| crate::error::io_error(&path, e))?;
        matrices.push(parse_matrix_csv(&text)?);
    }
    let averages = average_correct(&matrices)?;
    let csv = cfg.out_dir.join(summary_csv_name(event));
    atomic_write(
        &csv,
        render_averages(&averages, RenderFormat::DelimitedText).as_bytes(),
    )?;
    let table = cfg.out_dir.join(summary_table_name(event));
    atomic_write(
        &table,
        render_averages(&averages, RenderFormat::AlignedTable).as_bytes(),
    )?;
    Ok(Some([csv, table]))
}

/// Run the whole experiment: simulate, PCA exports, all three cases, and a
/// manifest tying the outputs to the config.
pub fn cmd_pipeline(cfg: &RunConfig) -> Result<PathBuf> {
    let frame_files = cmd_simulate(cfg).map_err(|e| e.in_stage("simulate"))?;
    let pca_files = cmd_pca(cfg, &[]).map_err(|e| e.in_stage("pca"))?;
    let mut matrix_files = Vec::new();
    let mut table_files = Vec::new();
    let mut model_files = Vec::new();
    let mut summary_files = None;
    for case_id in event_cases(cfg.event) {
        let out = cmd_eval(cfg, case_id, &[])
            .map_err(|e| e.in_stage(&format!("eval case {case_id}")))?;
        matrix_files.push(out.matrix_csv);
        table_files.push(out.matrix_table);
        model_files.push(out.model);
        summary_files = out.summary;
    }
    let summary_files = summary_files.expect("all three cases evaluated");

    let rel = |p: &Path| -> String {
        p.strip_prefix(&cfg.out_dir)
            .unwrap_or(p)
            .display()
            .to_string()
    };
    let mut manifest = String::new();
    manifest.push_str(&format!("config_hash = {}\n", cfg.hash()));
    for (i, seed) in cfg.seeds.iter().enumerate() {
        manifest.push_str(&format!("seed_set{} = {seed}\n", i + 1));
    }
    for p in &frame_files {
        manifest.push_str(&format!("frame_file = {}\n", rel(p)));
    }
    for p in &pca_files {
        manifest.push_str(&format!("pca_export = {}\n", rel(p)));
    }
    for p in &matrix_files {
        manifest.push_str(&format!("matrix = {}\n", rel(p)));
    }
    for p in &table_files {
        manifest.push_str(&format!("matrix_table = {}\n", rel(p)));
    }
    for p in &model_files {
        manifest.push_str(&format!("model = {}\n", rel(p)));
    }
    manifest.push_str(&format!("summary = {}\n", rel(&summary_files[0])));
    manifest.push_str(&format!("summary_table = {}\n", rel(&summary_files[1])));

    let manifest_path = cfg.out_dir.join("manifest.txt");
    atomic_write(&manifest_path, manifest.as_bytes())?;
    Ok(manifest_path)
}
