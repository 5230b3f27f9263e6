//! Labeled frame collections, train/test case splits and normalization.
//!
//! A *set* is one capture of all three scenarios of an event (nominally
//! 30 s, i.e. 6500 frames per scenario at one monitored timeslot per TDMA
//! frame). A *case* holds one of the three sets out for testing and trains
//! on the other two; with full-size sets that is 39000 training rows and
//! 12000 test rows (the first 4000 frames per scenario of the held-out
//! set). Smaller sets split proportionally, preserving the 6500:4000
//! ratio.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{Event, Scenario};
use crate::error::{Error, Result};
use crate::estimator::CirFrame;
use crate::linalg::Mat;

/// Frames per scenario in a full-size set: 30 s of one timeslot per TDMA
/// frame, 30 / 4.615e-3 rounded down to a round number.
pub const FULL_FRAMES_PER_SET: usize = 6500;
/// Test frames per scenario drawn from the held-out set at full size.
pub const FULL_TEST_FRAMES: usize = 4000;
/// Standard deviation floor used by the normalizer.
pub const STD_FLOOR: f64 = 1e-12;

/// Test rows per scenario for a given per-set size, preserving the
/// full-scale 6500:4000 proportion.
pub fn test_frames_for(per_set: usize) -> usize {
    per_set * FULL_TEST_FRAMES / FULL_FRAMES_PER_SET
}

/// One set: equally sized per-scenario frame lists for one event.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    set_id: u32,
    event: Event,
    frame_len: usize,
    /// Frame lists ordered as `event.scenarios()`.
    per_scenario: [Vec<CirFrame>; 3],
}

impl FrameSet {
    /// Assemble a set from per-scenario frame lists (ordered as
    /// `event.scenarios()`), validating labels, lengths and counts.
    pub fn new(set_id: u32, event: Event, per_scenario: [Vec<CirFrame>; 3]) -> Result<Self> {
        let frame_len = event.frame_len();
        let count = per_scenario[0].len();
        if count == 0 {
            return Err(Error::Argument("frame set has no frames".into()));
        }
        for (frames, scenario) in per_scenario.iter().zip(event.scenarios()) {
            if frames.len() != count {
                return Err(Error::Argument(format!(
                    "uneven scenario counts in set {set_id}: {} vs {count}",
                    frames.len()
                )));
            }
            for f in frames {
                if f.label != scenario {
                    return Err(Error::Argument(format!(
                        "frame labeled `{}` in the `{}` list of set {set_id}",
                        f.label.name(),
                        scenario.name()
                    )));
                }
                if f.frame_len() != frame_len {
                    return Err(Error::Argument(format!(
                        "frame length {} in event ({}) set {set_id}; expected {frame_len}",
                        f.frame_len(),
                        event.name()
                    )));
                }
            }
        }
        Ok(FrameSet {
            set_id,
            event,
            frame_len,
            per_scenario,
        })
    }

    pub fn set_id(&self) -> u32 {
        self.set_id
    }

    pub fn event(&self) -> Event {
        self.event
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    /// Frames per scenario.
    pub fn frames_per_scenario(&self) -> usize {
        self.per_scenario[0].len()
    }

    pub fn scenario_frames(&self, scenario: Scenario) -> Result<&[CirFrame]> {
        let idx = self
            .event
            .scenarios()
            .iter()
            .position(|&s| s == scenario)
            .ok_or_else(|| {
                Error::Argument(format!(
                    "scenario `{}` does not belong to event ({})",
                    scenario.name(),
                    self.event.name()
                ))
            })?;
        Ok(&self.per_scenario[idx])
    }
}

/// Feature matrix plus per-row scenario labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub x: Mat,
    pub labels: Vec<Scenario>,
}

impl LabeledMatrix {
    fn from_frames<'a>(groups: impl Iterator<Item = &'a [CirFrame]>, frame_len: usize) -> Self {
        let mut rows: Vec<f64> = Vec::new();
        let mut labels = Vec::new();
        let mut n = 0;
        for frames in groups {
            for f in frames {
                rows.extend(f.values.iter().map(|&v| v as f64));
                labels.push(f.label);
                n += 1;
            }
        }
        LabeledMatrix {
            x: Mat::from_vec(n, frame_len, rows).expect("consistent frame lengths"),
            labels,
        }
    }

    pub fn rows(&self) -> usize {
        self.x.rows()
    }
}

/// One train/test partition of Table-style protocol: cases 1-3 hold out
/// sets 1-3 of event (a), cases 4-6 sets 1-3 of event (b).
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSplit {
    pub case_id: u8,
    pub train: LabeledMatrix,
    pub test: LabeledMatrix,
}

/// The event a case id belongs to, or an error for ids outside 1..=6.
pub fn case_event(case_id: u8) -> Result<Event> {
    match case_id {
        1..=3 => Ok(Event::A),
        4..=6 => Ok(Event::B),
        _ => Err(Error::Argument(format!("case id {case_id} out of range 1..=6"))),
    }
}

/// Set id the case holds out for testing.
pub fn case_test_set(case_id: u8) -> Result<u32> {
    case_event(case_id)?;
    Ok(((case_id - 1) % 3 + 1) as u32)
}

/// Build the train/test split for a case from the event's three sets
/// (set ids 1, 2, 3 in any order).
pub fn build_case(case_id: u8, sets: &[FrameSet; 3]) -> Result<CaseSplit> {
    let event = case_event(case_id)?;
    let mut by_id: [Option<&FrameSet>; 3] = [None, None, None];
    for set in sets {
        if set.event() != event {
            return Err(Error::Argument(format!(
                "case {case_id} needs event ({}) sets; set {} is event ({})",
                event.name(),
                set.set_id(),
                set.event().name()
            )));
        }
        let id = set.set_id();
        if !(1..=3).contains(&id) {
            return Err(Error::Argument(format!("set id {id} out of range 1..=3")));
        }
        if by_id[(id - 1) as usize].replace(set).is_some() {
            return Err(Error::Argument(format!("duplicate set id {id}")));
        }
    }
    let by_id = by_id.map(|s| s.expect("all three set ids present"));
    let per_set = by_id[0].frames_per_scenario();
    if by_id.iter().any(|s| s.frames_per_scenario() != per_set) {
        return Err(Error::Argument("sets have different sizes".into()));
    }
    let frame_len = event.frame_len();

    let held_out = case_test_set(case_id)?;
    let test_n = test_frames_for(per_set);
    if test_n == 0 {
        return Err(Error::Argument(format!(
            "sets of {per_set} frames per scenario are too small to split"
        )));
    }

    let train_sets: Vec<&FrameSet> = by_id
        .iter()
        .filter(|s| s.set_id() != held_out)
        .copied()
        .collect();
    let test_set = by_id
        .iter()
        .find(|s| s.set_id() == held_out)
        .expect("held-out set present");

    let train = LabeledMatrix::from_frames(
        train_sets.iter().flat_map(|set| {
            event
                .scenarios()
                .into_iter()
                .map(move |sc| set.scenario_frames(sc).expect("validated scenario"))
        }),
        frame_len,
    );
    let test = LabeledMatrix::from_frames(
        event.scenarios().into_iter().map(|sc| {
            &test_set.scenario_frames(sc).expect("validated scenario")[..test_n]
        }),
        frame_len,
    );
    Ok(CaseSplit {
        case_id,
        train,
        test,
    })
}

/// Stack the first `n` frames of each scenario of one set, in scenario
/// order, for PCA clustering.
pub fn pca_subset(set: &FrameSet, n: usize) -> Result<LabeledMatrix> {
    if n == 0 {
        return Err(Error::Argument("subset size must be positive".into()));
    }
    if n > set.frames_per_scenario() {
        return Err(Error::Argument(format!(
            "subset of {n} frames per scenario exceeds the set's {}",
            set.frames_per_scenario()
        )));
    }
    Ok(LabeledMatrix::from_frames(
        set.event()
            .scenarios()
            .into_iter()
            .map(|sc| &set.scenario_frames(sc).expect("validated scenario")[..n]),
        set.frame_len(),
    ))
}

/// Per-feature z-score normalizer, fitted on training rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Normalizer {
    /// Fit per-column mean and (population) standard deviation, the latter
    /// floored at [`STD_FLOOR`] so constant columns normalize to zero.
    pub fn fit(train: &Mat) -> Result<Self> {
        if train.rows() == 0 {
            return Err(Error::Argument("cannot fit a normalizer on no rows".into()));
        }
        let mean = train.col_means();
        let mut var = vec![0.0; train.cols()];
        for i in 0..train.rows() {
            for (j, v) in train.row(i).iter().enumerate() {
                let d = v - mean[j];
                var[j] += d * d;
            }
        }
        let n = train.rows() as f64;
        let std = var
            .into_iter()
            .map(|v| libm::sqrt(v / n).max(STD_FLOOR))
            .collect();
        Ok(Normalizer { mean, std })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    /// Apply `(x - mean) / std` column-wise.
    pub fn apply(&self, x: &Mat) -> Result<Mat> {
        if x.cols() != self.mean.len() {
            return Err(Error::Argument(format!(
                "normalizer fitted on {} features, matrix has {}",
                self.mean.len(),
                x.cols()
            )));
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            let row = out.row_mut(i);
            for j in 0..row.len() {
                row[j] = (row[j] - self.mean[j]) / self.std[j];
            }
        }
        Ok(out)
    }
}
