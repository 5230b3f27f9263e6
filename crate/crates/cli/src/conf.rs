//! Run configuration: line-oriented `key = value` files plus command-line
//! overrides, with a canonical form hashed into the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cirsense_core::channel::Event;
use sha2::{Digest, Sha256};

use crate::error::{io_error, AppError, Result};

/// Fully resolved configuration of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub event: Event,
    pub scenario_file: PathBuf,
    pub out_dir: PathBuf,
    /// Frames per scenario per set (6500 at full scale, 650 on the desk).
    pub frames_per_set: usize,
    /// Capture seeds for sets 1..3; must be pairwise distinct.
    pub seeds: [u64; 3],
    /// When set, overrides every scenario's configured SNR.
    pub snr_db: Option<f64>,
    pub svm_c: f64,
    pub svm_tolerance: f64,
    pub svm_max_iterations: usize,
    /// Accepted for provenance; meaningless under a linear kernel and
    /// ignored with a warning.
    pub svm_gamma: Option<f64>,
    /// Frames per scenario stacked for the PCA cluster export.
    pub pca_n: usize,
    /// Components kept in the projection export.
    pub pca_k: usize,
    pub tsc_index: u8,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            event: Event::A,
            scenario_file: PathBuf::from("config/scenarios.conf"),
            out_dir: PathBuf::from("out"),
            frames_per_set: cirsense_core::dataset::FULL_FRAMES_PER_SET,
            seeds: [1001, 2002, 3003],
            snr_db: None,
            svm_c: 1.0,
            svm_tolerance: 1e-6,
            svm_max_iterations: 2_000_000,
            svm_gamma: None,
            pca_n: 3000,
            pca_k: 3,
            tsc_index: 0,
        }
    }
}

/// Command-line overrides; any set field wins over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub event: Option<String>,
    pub out: Option<PathBuf>,
    pub seed_set: [Option<u64>; 3],
    pub frames_per_set: Option<usize>,
    pub snr_db: Option<f64>,
    pub svm_c: Option<f64>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| AppError::Config(format!("cannot parse `{key} = {value}`")))
}

fn parse_snr(value: &str) -> Result<f64> {
    match value {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        _ => parse_num("snr_db", value),
    }
}

/// Split one `key = value` line; comments start with `#`.
pub fn split_key_value(line: &str) -> Option<(&str, &str)> {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return None;
    }
    let (key, value) = line.split_once('=')?;
    Some((key.trim(), value.trim()))
}

impl RunConfig {
    /// Load a config file (when given) and apply overrides on top of the
    /// defaults. Returns the resolved config plus any warnings to surface.
    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<(Self, Vec<String>)> {
        let mut cfg = RunConfig::default();
        let mut explicit_frame_len: Option<usize> = None;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                AppError::Config(format!("config file {}: {e}", path.display()))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let Some((key, value)) = split_key_value(line) else {
                    continue;
                };
                match key {
                    "event" => cfg.event = Event::from_name(value)?,
                    "frame_len" => explicit_frame_len = Some(parse_num(key, value)?),
                    "scenario_file" => cfg.scenario_file = PathBuf::from(value),
                    "out_dir" => cfg.out_dir = PathBuf::from(value),
                    "frames_per_set" => cfg.frames_per_set = parse_num(key, value)?,
                    "seed_set1" => cfg.seeds[0] = parse_num(key, value)?,
                    "seed_set2" => cfg.seeds[1] = parse_num(key, value)?,
                    "seed_set3" => cfg.seeds[2] = parse_num(key, value)?,
                    "snr_db" => cfg.snr_db = Some(parse_snr(value)?),
                    "svm_c" => cfg.svm_c = parse_num(key, value)?,
                    "svm_tolerance" => cfg.svm_tolerance = parse_num(key, value)?,
                    "svm_max_iterations" => cfg.svm_max_iterations = parse_num(key, value)?,
                    "svm_gamma" => cfg.svm_gamma = Some(parse_num(key, value)?),
                    "pca_n" => cfg.pca_n = parse_num(key, value)?,
                    "pca_k" => cfg.pca_k = parse_num(key, value)?,
                    "tsc_index" => cfg.tsc_index = parse_num(key, value)?,
                    _ => {
                        return Err(AppError::Config(format!(
                            "{}:{}: unknown key `{key}`",
                            path.display(),
                            lineno + 1
                        )))
                    }
                }
            }
        }
        if let Some(event) = &overrides.event {
            cfg.event = Event::from_name(event)?;
        }
        if let Some(out) = &overrides.out {
            cfg.out_dir = out.clone();
        }
        for (slot, value) in cfg.seeds.iter_mut().zip(overrides.seed_set) {
            if let Some(v) = value {
                *slot = v;
            }
        }
        if let Some(v) = overrides.frames_per_set {
            cfg.frames_per_set = v;
        }
        if let Some(v) = overrides.snr_db {
            cfg.snr_db = Some(v);
        }
        if let Some(v) = overrides.svm_c {
            cfg.svm_c = v;
        }

        let mut warnings = Vec::new();
        if let Some(gamma) = cfg.svm_gamma {
            warnings.push(format!(
                "svm_gamma = {gamma} is accepted for provenance but ignored: the kernel is linear"
            ));
        }
        cfg.validate(explicit_frame_len)?;
        Ok((cfg, warnings))
    }

    fn validate(&self, explicit_frame_len: Option<usize>) -> Result<()> {
        if let Some(len) = explicit_frame_len {
            if len != self.event.frame_len() {
                return Err(AppError::Config(format!(
                    "frame_len {len} conflicts with event ({}) which records {}-value frames",
                    self.event.name(),
                    self.event.frame_len()
                )));
            }
        }
        if self.seeds[0] == self.seeds[1]
            || self.seeds[0] == self.seeds[2]
            || self.seeds[1] == self.seeds[2]
        {
            return Err(AppError::Config(format!(
                "set seeds must be pairwise distinct, got {:?}",
                self.seeds
            )));
        }
        if cirsense_core::dataset::test_frames_for(self.frames_per_set) == 0 {
            return Err(AppError::Config(format!(
                "frames_per_set = {} is too small to carve a test split from",
                self.frames_per_set
            )));
        }
        if self.tsc_index > 7 {
            return Err(AppError::Config(format!(
                "tsc_index {} out of range 0..=7",
                self.tsc_index
            )));
        }
        if !(self.svm_c > 0.0) {
            return Err(AppError::Config("svm_c must be positive".into()));
        }
        if self.pca_n == 0 || self.pca_k == 0 {
            return Err(AppError::Config("pca_n and pca_k must be positive".into()));
        }
        Ok(())
    }

    /// Estimated CIR taps per frame for this event.
    pub fn cir_taps(&self) -> usize {
        self.event.frame_len() / 2
    }

    /// Canonical `key = value` rendering with sorted keys; two configs are
    /// equal exactly when their canonical forms are.
    pub fn canonical(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert("event", self.event.name().to_string());
        map.insert("frame_len", self.event.frame_len().to_string());
        map.insert(
            "scenario_file",
            self.scenario_file.display().to_string(),
        );
        map.insert("out_dir", self.out_dir.display().to_string());
        map.insert("frames_per_set", self.frames_per_set.to_string());
        map.insert("seed_set1", self.seeds[0].to_string());
        map.insert("seed_set2", self.seeds[1].to_string());
        map.insert("seed_set3", self.seeds[2].to_string());
        map.insert(
            "snr_db",
            self.snr_db.map_or("unset".into(), |v| v.to_string()),
        );
        map.insert("svm_c", self.svm_c.to_string());
        map.insert("svm_tolerance", self.svm_tolerance.to_string());
        map.insert("svm_max_iterations", self.svm_max_iterations.to_string());
        map.insert(
            "svm_gamma",
            self.svm_gamma.map_or("unset".into(), |v| v.to_string()),
        );
        map.insert("pca_n", self.pca_n.to_string());
        map.insert("pca_k", self.pca_k.to_string());
        map.insert("tsc_index", self.tsc_index.to_string());
        let mut out = String::new();
        for (k, v) in map {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// SHA-256 of the canonical form, as lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Write text to `path` atomically (temp file in the same directory, then
/// rename over the target).
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
        }
    }
    let tmp = path.with_extension("tmp-write");
    std::fs::write(&tmp, contents).map_err(|e| io_error(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_error(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn defaults_resolve_without_a_file() {
        let (cfg, warnings) = RunConfig::resolve(None, &Overrides::default()).unwrap();
        assert_eq!(cfg.event, Event::A);
        assert_eq!(cfg.frames_per_set, 6500);
        assert!(warnings.is_empty());
    }

    #[test]
    fn file_values_and_overrides_stack() {
        let f = write_temp(
            "# comment\nevent = b\nframes_per_set = 650\nseed_set1 = 7\n\nsnr_db = 15\n",
        );
        let overrides = Overrides {
            snr_db: Some(25.0),
            ..Default::default()
        };
        let (cfg, _) = RunConfig::resolve(Some(f.path()), &overrides).unwrap();
        assert_eq!(cfg.event, Event::B);
        assert_eq!(cfg.frames_per_set, 650);
        assert_eq!(cfg.seeds[0], 7);
        assert_eq!(cfg.snr_db, Some(25.0)); // override wins
    }

    #[test]
    fn frame_len_must_match_event() {
        let f = write_temp("event = b\nframe_len = 40\n");
        let err = RunConfig::resolve(Some(f.path()), &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let f = write_temp("evnt = a\n");
        assert!(RunConfig::resolve(Some(f.path()), &Overrides::default()).is_err());
    }

    #[test]
    fn duplicate_seeds_are_rejected() {
        let f = write_temp("seed_set1 = 5\nseed_set2 = 5\n");
        assert!(RunConfig::resolve(Some(f.path()), &Overrides::default()).is_err());
    }

    #[test]
    fn gamma_triggers_a_warning_only() {
        let f = write_temp("svm_gamma = 0.025\n");
        let (cfg, warnings) = RunConfig::resolve(Some(f.path()), &Overrides::default()).unwrap();
        assert_eq!(cfg.svm_gamma, Some(0.025));
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("ignored"));
    }

    #[test]
    fn hash_changes_iff_any_field_changes() {
        let (base, _) = RunConfig::resolve(None, &Overrides::default()).unwrap();
        let (same, _) = RunConfig::resolve(None, &Overrides::default()).unwrap();
        assert_eq!(base.hash(), same.hash());
        let mut touched = base.clone();
        touched.pca_k = 4;
        assert_ne!(base.hash(), touched.hash());
        let mut snr = base.clone();
        snr.snr_db = Some(20.0);
        assert_ne!(base.hash(), snr.hash());
    }

    #[test]
    fn infinite_snr_parses() {
        let f = write_temp("snr_db = inf\n");
        let (cfg, _) = RunConfig::resolve(Some(f.path()), &Overrides::default()).unwrap();
        assert_eq!(cfg.snr_db, Some(f64::INFINITY));
    }
}
