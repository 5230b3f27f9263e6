//! Scenario parameter files: one `[section]` per scenario name, line
//! oriented `key = value` entries.
//!
//! ```text
//! [person_stationary]
//! snr_db = 20
//! wall_attenuation = 0.45
//! tap_direct = 0 1.0,0.0
//! tap_person = 2 0.28,0.21
//! ```
//!
//! Tap values are `<delay> <re>,<im> [<variation>]`: integer delay in
//! samples, complex gain as a `re,im` pair, and an optional variation of
//! `static`, `sin:<amplitude>:<period_bursts>` or `walk:<step_std>`.
//! Taps keep their file order; gains are as configured, wall attenuation
//! is applied when the channel is built.

use std::collections::BTreeMap;
use std::path::Path;

use cirsense_core::channel::{Scenario, ScenarioSpec, Tap, TapVariation};
use num_complex::Complex64;

use crate::conf::split_key_value;
use crate::error::{AppError, Result};

/// Parsed scenario parameter file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioLibrary {
    specs: BTreeMap<Scenario, ScenarioSpec>,
}

impl ScenarioLibrary {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            AppError::Config(format!("scenario file {}: {e}", path.display()))
        })?;
        Self::parse(&text)
            .map_err(|e| e.in_stage(&format!("scenario file {}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut specs = BTreeMap::new();
        let mut current: Option<(Scenario, f64, f64, Vec<Tap>)> = None;
        let flush = |entry: Option<(Scenario, f64, f64, Vec<Tap>)>,
                     specs: &mut BTreeMap<Scenario, ScenarioSpec>|
         -> Result<()> {
            if let Some((name, snr_db, wall, taps)) = entry {
                if taps.is_empty() {
                    return Err(AppError::Config(format!(
                        "scenario `{}` lists no taps",
                        name.name()
                    )));
                }
                specs.insert(
                    name,
                    ScenarioSpec {
                        name,
                        wall_attenuation: wall,
                        snr_db,
                        taps,
                    },
                );
            }
            Ok(())
        };

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let context = |msg: String| AppError::Config(format!("line {}: {msg}", lineno + 1));
            if let Some(section) = line.strip_prefix('[') {
                let name = section
                    .strip_suffix(']')
                    .ok_or_else(|| context(format!("malformed section `{line}`")))?;
                let scenario = Scenario::from_name(name.trim())
                    .map_err(|e| context(e.to_string()))?;
                flush(current.take(), &mut specs)?;
                if specs.contains_key(&scenario) {
                    return Err(context(format!("duplicate section `{}`", scenario.name())));
                }
                current = Some((scenario, 20.0, 1.0, Vec::new()));
                continue;
            }
            let Some((key, value)) = split_key_value(line) else {
                return Err(context(format!("expected `key = value`, got `{line}`")));
            };
            let Some((_, snr, wall, taps)) = current.as_mut() else {
                return Err(context(format!("`{key}` appears before any [section]")));
            };
            match key {
                "snr_db" => {
                    *snr = if matches!(value, "inf" | "+inf" | "infinity") {
                        f64::INFINITY
                    } else {
                        value
                            .parse()
                            .map_err(|_| context(format!("bad snr_db `{value}`")))?
                    }
                }
                "wall_attenuation" => {
                    *wall = value
                        .parse()
                        .map_err(|_| context(format!("bad wall_attenuation `{value}`")))?
                }
                k if k.starts_with("tap_") => {
                    taps.push(parse_tap(value).map_err(|e| context(format!("{k}: {e}")))?)
                }
                other => return Err(context(format!("unknown key `{other}`"))),
            }
        }
        flush(current.take(), &mut specs)?;
        if specs.is_empty() {
            return Err(AppError::Config("scenario file defines no scenarios".into()));
        }
        Ok(ScenarioLibrary { specs })
    }

    /// The parameters of one scenario; every scenario a run uses must be
    /// present in the file.
    pub fn spec(&self, scenario: Scenario) -> Result<&ScenarioSpec> {
        self.specs.get(&scenario).ok_or_else(|| {
            AppError::Config(format!(
                "scenario `{}` is not defined in the scenario file",
                scenario.name()
            ))
        })
    }

    /// Clone a scenario's spec, optionally forcing the SNR.
    pub fn spec_with_snr(&self, scenario: Scenario, snr_db: Option<f64>) -> Result<ScenarioSpec> {
        let mut spec = self.spec(scenario)?.clone();
        if let Some(snr) = snr_db {
            spec.snr_db = snr;
        }
        Ok(spec)
    }

    pub fn scenarios(&self) -> impl Iterator<Item = Scenario> + '_ {
        self.specs.keys().copied()
    }
}

fn parse_tap(value: &str) -> std::result::Result<Tap, String> {
    let mut parts = value.split_whitespace();
    let delay: usize = parts
        .next()
        .ok_or("missing delay")?
        .parse()
        .map_err(|_| "delay must be a nonnegative integer".to_string())?;
    let gain_str = parts.next().ok_or("missing gain")?;
    let (re, im) = gain_str
        .split_once(',')
        .ok_or_else(|| format!("gain `{gain_str}` must be `re,im`"))?;
    let gain = Complex64::new(
        re.parse().map_err(|_| format!("bad gain real part `{re}`"))?,
        im.parse().map_err(|_| format!("bad gain imag part `{im}`"))?,
    );
    let variation = match parts.next() {
        None | Some("static") => TapVariation::Static,
        Some(spec) if spec.starts_with("sin:") => {
            let rest: Vec<&str> = spec[4..].split(':').collect();
            if rest.len() != 2 {
                return Err(format!("variation `{spec}` must be sin:<amplitude>:<period>"));
            }
            TapVariation::Sinusoidal {
                amplitude: rest[0].parse().map_err(|_| "bad sin amplitude".to_string())?,
                period_bursts: rest[1].parse().map_err(|_| "bad sin period".to_string())?,
            }
        }
        Some(spec) if spec.starts_with("walk:") => TapVariation::RandomWalk {
            step_std: spec[5..].parse().map_err(|_| "bad walk step".to_string())?,
        },
        Some(other) => return Err(format!("unknown variation `{other}`")),
    };
    if parts.next().is_some() {
        return Err(format!("trailing tokens in tap `{value}`"));
    }
    Ok(Tap {
        delay,
        gain,
        variation,
    })
}
