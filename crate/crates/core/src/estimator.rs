//! Channel impulse response estimation from the burst training sequence.
//!
//! The receiver knows the 26 modulated midamble chips `m`. A length-`L`
//! channel turns them into the convolution `m * h`, observed over the
//! `26 + L - 1` samples starting at the midamble position. The estimator
//! solves the least-squares problem `min || y - M h ||` where `M` is the
//! Toeplitz convolution matrix of the known chips and `y` is the received
//! window with its first `L - 1` samples dropped: those samples mix in
//! symbols transmitted before the midamble and carry no clean information.
//! That leaves a full-rank `26 x L` system for any `L` up to
//! [`MAX_CIR_TAPS`], solved by QR factorization (factored once per
//! configuration, applied to the real and imaginary parts separately).
//!
//! The model assumes the window past the midamble is free of other symbol
//! energy. Capture runs therefore sound the channel with each burst's
//! training segment in isolation: the pseudorandom payload surrounding the
//! midamble in the full burst would otherwise bleed into the trailing
//! window samples and perturb the estimate in a payload-dependent way.
//! Sounding with the training segment keeps every frame an exact function
//! of the channel and the noise draw alone.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::channel::{propagate, scenario, Scenario, ScenarioSpec};
use crate::error::{Error, Result};
use crate::gsm::{
    build_normal_burst, modulate, training_sequence, SymbolSequence, MIDAMBLE_OFFSET,
    PAYLOAD_BITS, TRAINING_SEQUENCE_LEN,
};
use crate::linalg::{Mat, QrLs};
use crate::rng::SeededRng;

/// Largest estimable CIR length: two of the 26 midamble chips are held back
/// as guard, capping the tap count at 24 (the 48-value frame configuration).
pub const MAX_CIR_TAPS: usize = 24;

const TAG_PAYLOAD: u64 = 0x5041_594c; // "PAYL"

/// A channel impulse response estimated from one burst.
#[derive(Debug, Clone, PartialEq)]
pub struct CirEstimate {
    pub taps: Vec<Complex64>,
    pub burst_index: u64,
    pub tsc_index: u8,
}

/// One flattened CIR observation: `2L` real values interleaving the real
/// and imaginary parts of the `L` estimated taps, plus labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CirFrame {
    pub values: Vec<f32>,
    pub label: Scenario,
    pub set_id: u32,
    pub burst_index: u32,
}

impl CirFrame {
    pub fn frame_len(&self) -> usize {
        self.values.len()
    }
}

/// Reusable least-squares estimator for a fixed `(tsc_index, L)` pair.
#[derive(Debug, Clone)]
pub struct MidambleLs {
    qr: QrLs,
    tsc_index: u8,
    taps: usize,
}

impl MidambleLs {
    /// Build and factor the Toeplitz system for `l` taps of training
    /// sequence `tsc_index`.
    pub fn new(tsc_index: u8, l: usize) -> Result<Self> {
        if l < 1 || l > MAX_CIR_TAPS {
            return Err(Error::Argument(format!(
                "cir length {l} out of range 1..={MAX_CIR_TAPS}"
            )));
        }
        let chips = training_sequence(tsc_index)?.chips();
        // Rows L-1 .. 26+L-1 of the full convolution matrix: the steady
        // interior plus the trailing edge where the midamble leaves the
        // channel.
        let rows = TRAINING_SEQUENCE_LEN;
        let mut m = Mat::zeros(rows, l);
        for r in 0..rows {
            let n = r + l - 1;
            for tap in 0..l {
                if n >= tap && n - tap < TRAINING_SEQUENCE_LEN {
                    m[(r, tap)] = chips[n - tap];
                }
            }
        }
        let qr = QrLs::new(&m).map_err(|e| match e {
            Error::Estimation(msg) => Error::Estimation(format!(
                "midamble system degenerate for tsc {tsc_index}, L={l}: {msg}"
            )),
            other => other,
        })?;
        Ok(MidambleLs {
            qr,
            tsc_index,
            taps: l,
        })
    }

    /// Number of estimated taps.
    pub fn taps(&self) -> usize {
        self.taps
    }

    /// Estimate the CIR from `received`, whose midamble response starts at
    /// sample `midamble_position`.
    ///
    /// The target window is `[midamble_position + L - 1,
    /// midamble_position + 26 + L - 1)`; samples past the end of `received`
    /// are taken as zero, which is exact whenever the channel tail has been
    /// fully captured (propagation always emits it).
    pub fn estimate(
        &self,
        received: &SymbolSequence,
        midamble_position: usize,
        burst_index: u64,
    ) -> Result<CirEstimate> {
        if received.oversampling != 1 {
            return Err(Error::Argument(format!(
                "estimation runs at symbol rate; got oversampling {}",
                received.oversampling
            )));
        }
        if received.len() < midamble_position + TRAINING_SEQUENCE_LEN {
            return Err(Error::Argument(format!(
                "received sequence of {} samples does not cover the midamble \
                 window at position {midamble_position}",
                received.len()
            )));
        }
        let lo = midamble_position + self.taps - 1;
        let mut y_re = vec![0.0; TRAINING_SEQUENCE_LEN];
        let mut y_im = vec![0.0; TRAINING_SEQUENCE_LEN];
        for (r, (re, im)) in y_re.iter_mut().zip(y_im.iter_mut()).enumerate() {
            if let Some(s) = received.samples.get(lo + r) {
                *re = s.re;
                *im = s.im;
            }
        }
        let h_re = self.qr.solve(&y_re);
        let h_im = self.qr.solve(&y_im);
        let taps = h_re
            .into_iter()
            .zip(h_im)
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        Ok(CirEstimate {
            taps,
            burst_index,
            tsc_index: self.tsc_index,
        })
    }
}

/// One-shot convenience wrapper around [`MidambleLs`].
pub fn estimate_cir(
    received: &SymbolSequence,
    tsc_index: u8,
    l: usize,
    midamble_position: usize,
) -> Result<CirEstimate> {
    MidambleLs::new(tsc_index, l)?.estimate(received, midamble_position, 0)
}

/// Flatten a CIR estimate into a labeled frame of interleaved re/im values.
pub fn cir_to_frame(cir: &CirEstimate, label: Scenario, set_id: u32) -> CirFrame {
    let mut values = Vec::with_capacity(2 * cir.taps.len());
    for tap in &cir.taps {
        values.push(tap.re as f32);
        values.push(tap.im as f32);
    }
    CirFrame {
        values,
        label,
        set_id,
        burst_index: cir.burst_index as u32,
    }
}

/// Simulate one 30-second-style capture: `n_frames` bursts through the
/// scenario channel at consecutive burst indices, one estimated frame each.
///
/// Per frame a full normal burst with seeded pseudorandom payload is built
/// and modulated; its training segment is what sounds the channel (see the
/// module notes), so frames never depend on payload content. Deterministic
/// in `(spec, seed)`.
pub fn run_capture(
    spec: &ScenarioSpec,
    n_frames: usize,
    seed: u64,
    l: usize,
    tsc_index: u8,
    set_id: u32,
) -> Result<Vec<CirFrame>> {
    if n_frames < 1 {
        return Err(Error::Argument("capture needs at least one frame".into()));
    }
    let estimator = MidambleLs::new(tsc_index, l)?;
    let channel = scenario(spec, seed)?;
    if channel.max_delay() >= l {
        return Err(Error::Argument(format!(
            "scenario `{}` has a tap at delay {} outside the {l}-tap estimator",
            spec.name.name(),
            channel.max_delay()
        )));
    }
    let mut frames = Vec::with_capacity(n_frames);
    for k in 0..n_frames as u64 {
        let payload = SeededRng::new(&[seed, TAG_PAYLOAD, k]).bits(PAYLOAD_BITS);
        let burst = build_normal_burst(&payload, tsc_index, (0, 0))?;
        let tx = modulate(&burst, 1)?;
        let sounding = SymbolSequence {
            samples: tx.samples[MIDAMBLE_OFFSET..MIDAMBLE_OFFSET + TRAINING_SEQUENCE_LEN]
                .to_vec(),
            oversampling: 1,
            symbol_rate: tx.symbol_rate,
        };
        let received = propagate(&sounding, &channel, k);
        let estimate = estimator.estimate(&received, 0, k)?;
        frames.push(cir_to_frame(&estimate, spec.name, set_id));
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{MultipathChannel, Tap, TapVariation};
    use crate::gsm::modulate_bits;

    fn sound_midamble(tsc: u8) -> SymbolSequence {
        modulate_bits(training_sequence(tsc).unwrap().bits(), 1).unwrap()
    }

    fn noiseless(taps: Vec<Tap>) -> MultipathChannel {
        MultipathChannel::new(taps, f64::INFINITY, 0).unwrap()
    }

    #[test]
    fn single_tap_identity_recovers_unit_impulse() {
        let ch = noiseless(vec![Tap::fixed(0, Complex64::new(1.0, 0.0))]);
        let rx = propagate(&sound_midamble(0), &ch, 0);
        let est = estimate_cir(&rx, 0, 20, 0).unwrap();
        assert!((est.taps[0] - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        for tap in &est.taps[1..] {
            assert!(tap.norm() < 1e-9);
        }
    }

    #[test]
    fn two_tap_channel_recovers_exactly() {
        let truth = [
            (0usize, Complex64::new(0.8, 0.0)),
            (2, Complex64::new(0.3, -0.1)),
        ];
        let ch = noiseless(truth.iter().map(|&(d, g)| Tap::fixed(d, g)).collect());
        let rx = propagate(&sound_midamble(0), &ch, 0);
        let est = estimate_cir(&rx, 0, 20, 0).unwrap();
        for (i, tap) in est.taps.iter().enumerate() {
            let expected = truth
                .iter()
                .find(|&&(d, _)| d == i)
                .map(|&(_, g)| g)
                .unwrap_or(Complex64::new(0.0, 0.0));
            assert!(
                (tap - expected).norm() < 1e-9,
                "tap {i}: {tap} vs {expected}"
            );
        }
    }

    #[test]
    fn zero_window_gives_zero_estimate() {
        let rx = SymbolSequence {
            samples: vec![Complex64::new(0.0, 0.0); 64],
            oversampling: 1,
            symbol_rate: 1.0,
        };
        let est = estimate_cir(&rx, 3, 20, 0).unwrap();
        assert!(est.taps.iter().all(|t| t.norm() == 0.0));
    }

    #[test]
    fn estimate_uses_only_its_window() {
        // Perturbing samples outside [pos+L-1, pos+26+L-1) leaves the
        // estimate bit-identical.
        let ch = noiseless(vec![
            Tap::fixed(0, Complex64::new(0.7, 0.2)),
            Tap::fixed(4, Complex64::new(-0.1, 0.3)),
        ]);
        let l = 20;
        let pos = 30;
        let mut padded = vec![Complex64::new(9.0, -9.0); pos];
        let rx = propagate(&sound_midamble(1), &ch, 0);
        padded.extend_from_slice(&rx.samples);
        padded.extend(core::iter::repeat(Complex64::new(5.0, 5.0)).take(40));
        let mut seq = SymbolSequence {
            samples: padded,
            oversampling: 1,
            symbol_rate: 1.0,
        };
        let est1 = estimate_cir(&seq, 1, l, pos).unwrap();
        // Scribble over everything outside the window.
        for (i, s) in seq.samples.iter_mut().enumerate() {
            if i < pos + l - 1 || i >= pos + 26 + l - 1 {
                *s = Complex64::new(-3.3, 7.7);
            }
        }
        let est2 = estimate_cir(&seq, 1, l, pos).unwrap();
        assert_eq!(est1.taps, est2.taps);
    }

    #[test]
    fn cir_length_bounds_are_enforced() {
        let rx = SymbolSequence {
            samples: vec![Complex64::new(0.0, 0.0); 64],
            oversampling: 1,
            symbol_rate: 1.0,
        };
        assert!(matches!(estimate_cir(&rx, 0, 0, 0), Err(Error::Argument(_))));
        assert!(matches!(
            estimate_cir(&rx, 0, MAX_CIR_TAPS + 1, 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn short_received_sequence_is_rejected() {
        let rx = SymbolSequence {
            samples: vec![Complex64::new(0.0, 0.0); 20],
            oversampling: 1,
            symbol_rate: 1.0,
        };
        assert!(matches!(estimate_cir(&rx, 0, 4, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn oversampled_input_is_rejected() {
        let seq = modulate_bits(&[0u8; 40], 2).unwrap();
        assert!(matches!(estimate_cir(&seq, 0, 4, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn frame_interleaves_re_im() {
        let cir = CirEstimate {
            taps: vec![Complex64::new(1.0, 2.0), Complex64::new(3.0, -4.0)],
            burst_index: 9,
            tsc_index: 0,
        };
        let frame = cir_to_frame(&cir, Scenario::NoPerson, 2);
        assert_eq!(frame.values, vec![1.0, 2.0, 3.0, -4.0]);
        assert_eq!(frame.set_id, 2);
        assert_eq!(frame.burst_index, 9);
    }

    #[test]
    fn frame_lengths_match_events() {
        let cir20 = CirEstimate {
            taps: vec![Complex64::new(0.0, 0.0); 20],
            burst_index: 0,
            tsc_index: 0,
        };
        let cir24 = CirEstimate {
            taps: vec![Complex64::new(0.0, 0.0); 24],
            burst_index: 0,
            tsc_index: 0,
        };
        assert_eq!(cir_to_frame(&cir20, Scenario::NoPerson, 0).frame_len(), 40);
        assert_eq!(cir_to_frame(&cir24, Scenario::NoWeapon, 0).frame_len(), 48);
    }

    fn toy_spec(taps: Vec<Tap>, snr_db: f64) -> ScenarioSpec {
        ScenarioSpec {
            name: Scenario::PersonStationary,
            wall_attenuation: 1.0,
            snr_db,
            taps,
        }
    }

    #[test]
    fn capture_counts_and_determinism() {
        let spec = toy_spec(
            vec![
                Tap::fixed(0, Complex64::new(1.0, 0.0)),
                Tap::fixed(2, Complex64::new(0.4, 0.1)),
            ],
            20.0,
        );
        let a = run_capture(&spec, 50, 11, 20, 0, 1).unwrap();
        let b = run_capture(&spec, 50, 11, 20, 0, 1).unwrap();
        assert_eq!(a.len(), 50);
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(k, f)| f.burst_index == k as u32));
        assert!(a.iter().all(|f| f.frame_len() == 40 && f.set_id == 1));
    }

    #[test]
    fn capture_of_identity_channel_yields_unit_frames() {
        let spec = toy_spec(vec![Tap::fixed(0, Complex64::new(1.0, 0.0))], f64::INFINITY);
        let frames = run_capture(&spec, 1, 3, 20, 0, 0).unwrap();
        assert_eq!(frames.len(), 1);
        let v = &frames[0].values;
        assert!((v[0] - 1.0).abs() < 1e-7);
        assert!(v[1..].iter().all(|x| x.abs() < 1e-7));
    }

    #[test]
    fn capture_rejects_taps_beyond_estimator_length() {
        let spec = toy_spec(
            vec![
                Tap::fixed(0, Complex64::new(1.0, 0.0)),
                Tap::fixed(21, Complex64::new(0.1, 0.0)),
            ],
            20.0,
        );
        assert!(matches!(
            run_capture(&spec, 1, 0, 20, 0, 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn frames_do_not_depend_on_payload_bits() {
        // Two bursts with different payloads share the training segment, so
        // the sounding waveform and hence the frames are identical.
        let spec = toy_spec(
            vec![
                Tap::fixed(0, Complex64::new(0.9, 0.1)),
                Tap::fixed(3, Complex64::new(0.2, -0.3)),
            ],
            f64::INFINITY,
        );
        let channel = scenario(&spec, 21).unwrap();
        let est = MidambleLs::new(0, 20).unwrap();
        let mut payload_a = [0u8; PAYLOAD_BITS];
        let mut payload_b = [1u8; PAYLOAD_BITS];
        payload_a[10] = 1;
        payload_b[99] = 0;
        let mut frames = Vec::new();
        for payload in [payload_a, payload_b] {
            let burst = build_normal_burst(&payload, 0, (0, 0)).unwrap();
            let tx = modulate(&burst, 1).unwrap();
            let sounding = SymbolSequence {
                samples: tx.samples
                    [MIDAMBLE_OFFSET..MIDAMBLE_OFFSET + TRAINING_SEQUENCE_LEN]
                    .to_vec(),
                oversampling: 1,
                symbol_rate: tx.symbol_rate,
            };
            let rx = propagate(&sounding, &channel, 0);
            let cir = est.estimate(&rx, 0, 0).unwrap();
            frames.push(cir_to_frame(&cir, spec.name, 0));
        }
        assert_eq!(frames[0], frames[1]);
    }

    #[test]
    fn estimates_are_unbiased_over_noiseless_bursts() {
        let truth = Complex64::new(0.6, -0.4);
        let spec = toy_spec(
            vec![
                Tap::fixed(0, Complex64::new(1.0, 0.0)),
                Tap::fixed(5, truth),
            ],
            f64::INFINITY,
        );
        let frames = run_capture(&spec, 1000, 8, 20, 0, 0).unwrap();
        let mut worst = 0.0f64;
        for f in &frames {
            let err0 = (f.values[0] as f64 - 1.0).abs();
            let err5 = Complex64::new(f.values[10] as f64 - truth.re, f.values[11] as f64 - truth.im)
                .norm();
            worst = worst.max(err0).max(err5);
        }
        // f32 storage caps the precision; the estimates themselves are ~1e-15.
        assert!(worst < 1e-6, "worst frame error {worst}");

        let est = MidambleLs::new(0, 20).unwrap();
        let channel = MultipathChannel::new(
            vec![
                Tap::fixed(0, Complex64::new(1.0, 0.0)),
                Tap::fixed(5, truth),
            ],
            f64::INFINITY,
            8,
        )
        .unwrap();
        let mut mean_err = Complex64::new(0.0, 0.0);
        for k in 0..1000u64 {
            let rx = propagate(&sound_midamble(0), &channel, k);
            let cir = est.estimate(&rx, 0, k).unwrap();
            mean_err += cir.taps[5] - truth;
        }
        assert!((mean_err / 1000.0).norm() < 1e-9);
    }

    #[test]
    fn estimation_error_shrinks_as_snr_grows() {
        let truth = Complex64::new(0.5, 0.2);
        let est = MidambleLs::new(0, 20).unwrap();
        let mut stds = Vec::new();
        for snr in [0.0, 10.0, 20.0, 30.0] {
            let channel = MultipathChannel::new(
                vec![
                    Tap::fixed(0, Complex64::new(1.0, 0.0)),
                    Tap::fixed(2, truth),
                ],
                snr,
                42,
            )
            .unwrap();
            let mut acc = 0.0;
            let bursts = 1000u64;
            for k in 0..bursts {
                let rx = propagate(&sound_midamble(0), &channel, k);
                let cir = est.estimate(&rx, 0, k).unwrap();
                acc += (cir.taps[2] - truth).norm_sqr();
            }
            stds.push(libm::sqrt(acc / bursts as f64));
        }
        for w in stds.windows(2) {
            assert!(
                w[1] < w[0],
                "error std did not shrink with snr: {stds:?}"
            );
        }
    }

    #[test]
    fn moving_person_tap_modulates_frames() {
        let spec = ScenarioSpec {
            name: Scenario::PersonMoving,
            wall_attenuation: 1.0,
            snr_db: f64::INFINITY,
            taps: vec![
                Tap::fixed(0, Complex64::new(1.0, 0.0)),
                Tap {
                    delay: 2,
                    gain: Complex64::new(0.3, 0.0),
                    variation: TapVariation::Sinusoidal {
                        amplitude: 0.5,
                        period_bursts: 8.0,
                    },
                },
            ],
        };
        let frames = run_capture(&spec, 8, 5, 20, 0, 0).unwrap();
        // Tap 2 real part occupies value index 4; it should trace the sine.
        let vals: Vec<f32> = frames.iter().map(|f| f.values[4]).collect();
        let spread = vals.iter().cloned().fold(f32::MIN, f32::max)
            - vals.iter().cloned().fold(f32::MAX, f32::min);
        assert!(spread > 0.2, "sinusoidal tap barely moved: {vals:?}");
    }
}
