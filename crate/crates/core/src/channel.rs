//! Stochastic tapped-delay-line multipath channels and the scenario library.
//!
//! Each experimental scenario (person present, moving, carrying a weapon,
//! and so on) is modelled as a sparse set of complex channel taps: a
//! through-wall direct path at delay zero, a handful of static room
//! reflections, and per-scenario extra taps for the person and for a
//! strong reflector standing in for a foil-covered weapon. The wall enters
//! as a scalar attenuation applied to every tap. Tap gains may vary from
//! burst to burst (sinusoidal for periodic walking, random walk for
//! sensitivity studies), and receiver noise is white circular Gaussian
//! scaled to a configured per-burst average SNR.
//!
//! Everything is keyed by `(seed, burst_index)`: realizing the channel at a
//! given burst index is a pure function, so bursts can be propagated in any
//! order or in parallel with identical results.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gsm::SymbolSequence;
use crate::rng::SeededRng;

/// How a tap gain evolves across burst indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TapVariation {
    /// Constant gain.
    Static,
    /// Gain performs a complex Gaussian random walk with the given per-burst
    /// step standard deviation.
    RandomWalk { step_std: f64 },
    /// Gain is `base * (1 + amplitude * sin(2*pi*k / period_bursts))` at
    /// burst `k`; models periodic motion such as walking a loop.
    Sinusoidal { amplitude: f64, period_bursts: f64 },
}

/// One channel tap: an integer sample delay, a complex gain and a
/// burst-to-burst variation law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay: usize,
    pub gain: Complex64,
    pub variation: TapVariation,
}

impl Tap {
    pub fn fixed(delay: usize, gain: Complex64) -> Self {
        Tap {
            delay,
            gain,
            variation: TapVariation::Static,
        }
    }
}

/// The six test scenarios, three per event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    PersonStationary,
    NoPerson,
    PersonMoving,
    ConcealedWeapon,
    NoWeapon,
    VisibleWeapon,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::PersonStationary,
        Scenario::NoPerson,
        Scenario::PersonMoving,
        Scenario::ConcealedWeapon,
        Scenario::NoWeapon,
        Scenario::VisibleWeapon,
    ];

    /// Stable one-byte code used in file metadata.
    pub fn code(self) -> u8 {
        match self {
            Scenario::PersonStationary => 0,
            Scenario::NoPerson => 1,
            Scenario::PersonMoving => 2,
            Scenario::ConcealedWeapon => 3,
            Scenario::NoWeapon => 4,
            Scenario::VisibleWeapon => 5,
        }
    }

    pub fn from_code(code: u8) -> Result<Scenario> {
        Scenario::ALL
            .into_iter()
            .find(|s| s.code() == code)
            .ok_or_else(|| Error::Argument(format!("unknown scenario code {code}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::PersonStationary => "person_stationary",
            Scenario::NoPerson => "no_person",
            Scenario::PersonMoving => "person_moving",
            Scenario::ConcealedWeapon => "concealed_weapon",
            Scenario::NoWeapon => "no_weapon",
            Scenario::VisibleWeapon => "visible_weapon",
        }
    }

    pub fn from_name(name: &str) -> Result<Scenario> {
        Scenario::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::Argument(format!("unknown scenario name `{name}`")))
    }

    /// The event this scenario belongs to.
    pub fn event(self) -> Event {
        match self {
            Scenario::PersonStationary | Scenario::NoPerson | Scenario::PersonMoving => Event::A,
            _ => Event::B,
        }
    }
}

/// The two experiment events: (a) person detection with 40-value frames,
/// (b) weapon detection with 48-value frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    A,
    B,
}

impl Event {
    pub fn code(self) -> u8 {
        match self {
            Event::A => 0,
            Event::B => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<Event> {
        match code {
            0 => Ok(Event::A),
            1 => Ok(Event::B),
            _ => Err(Error::Argument(format!("unknown event code {code}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Event::A => "a",
            Event::B => "b",
        }
    }

    pub fn from_name(name: &str) -> Result<Event> {
        match name {
            "a" => Ok(Event::A),
            "b" => Ok(Event::B),
            _ => Err(Error::Argument(format!("unknown event `{name}`"))),
        }
    }

    /// Frame length this event records: 40 for (a), 48 for (b).
    pub fn frame_len(self) -> usize {
        match self {
            Event::A => 40,
            Event::B => 48,
        }
    }

    /// The three scenarios of this event, in class-code order.
    pub fn scenarios(self) -> [Scenario; 3] {
        match self {
            Event::A => [
                Scenario::PersonStationary,
                Scenario::NoPerson,
                Scenario::PersonMoving,
            ],
            Event::B => [
                Scenario::ConcealedWeapon,
                Scenario::NoWeapon,
                Scenario::VisibleWeapon,
            ],
        }
    }
}

/// Full parameter set for one scenario: the tap list (before wall
/// attenuation), the wall attenuation scalar and the receiver SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: Scenario,
    /// Scalar attenuation applied to every tap gain (and to random-walk
    /// step sizes), modelling the wall.
    pub wall_attenuation: f64,
    /// Per-burst average SNR at the receiver in dB; `f64::INFINITY` means
    /// noiseless.
    pub snr_db: f64,
    /// Taps as configured, gains not yet wall-attenuated.
    pub taps: Vec<Tap>,
}

impl ScenarioSpec {
    /// Expected (mean) noiseless channel impulse response of this scenario:
    /// static and sinusoidal taps contribute their base gain, random walks
    /// their starting gain. Used to compare scenario separations.
    pub fn expected_cir(&self, len: usize) -> Vec<Complex64> {
        let mut h = vec![Complex64::new(0.0, 0.0); len];
        for tap in &self.taps {
            if tap.delay < len {
                h[tap.delay] += self.wall_attenuation * tap.gain;
            }
        }
        h
    }
}

/// A realized multipath channel: taps after wall attenuation, plus the
/// noise level and the seed every stochastic draw is keyed by.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    taps: Vec<Tap>,
    snr_db: f64,
    seed: u64,
}

// Key-part tags so the per-purpose random streams never collide.
const TAG_NOISE: u64 = 0x4e4f_4953; // "NOIS"
const TAG_WALK: u64 = 0x57_414c4b; // "WALK"

/// Build the channel a scenario describes.
///
/// Applies wall attenuation to every tap and validates the tap structure:
/// at least one tap, and a direct (delay 0) path must be present.
pub fn scenario(spec: &ScenarioSpec, seed: u64) -> Result<MultipathChannel> {
    if spec.taps.is_empty() {
        return Err(Error::Argument(format!(
            "scenario `{}` has no taps",
            spec.name.name()
        )));
    }
    if !spec.taps.iter().any(|t| t.delay == 0) {
        return Err(Error::Argument(format!(
            "scenario `{}` has no direct (delay 0) tap",
            spec.name.name()
        )));
    }
    if !spec.wall_attenuation.is_finite() || spec.wall_attenuation <= 0.0 {
        return Err(Error::Argument(format!(
            "wall attenuation must be positive and finite, got {}",
            spec.wall_attenuation
        )));
    }
    let mut taps = Vec::with_capacity(spec.taps.len());
    for tap in &spec.taps {
        if !tap.gain.re.is_finite() || !tap.gain.im.is_finite() {
            return Err(Error::Argument("tap gain must be finite".into()));
        }
        let variation = match tap.variation {
            TapVariation::RandomWalk { step_std } => {
                if step_std < 0.0 {
                    return Err(Error::Argument("random walk step_std must be >= 0".into()));
                }
                TapVariation::RandomWalk {
                    step_std: step_std * spec.wall_attenuation,
                }
            }
            TapVariation::Sinusoidal {
                amplitude,
                period_bursts,
            } => {
                if period_bursts <= 0.0 {
                    return Err(Error::Argument("sinusoidal period must be > 0".into()));
                }
                TapVariation::Sinusoidal {
                    amplitude,
                    period_bursts,
                }
            }
            TapVariation::Static => TapVariation::Static,
        };
        taps.push(Tap {
            delay: tap.delay,
            gain: spec.wall_attenuation * tap.gain,
            variation,
        });
    }
    Ok(MultipathChannel {
        taps,
        snr_db: spec.snr_db,
        seed,
    })
}

impl MultipathChannel {
    /// Construct directly from taps (mostly for tests and custom studies).
    pub fn new(taps: Vec<Tap>, snr_db: f64, seed: u64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Argument("channel needs at least one tap".into()));
        }
        if !taps.iter().any(|t| t.delay == 0) {
            return Err(Error::Argument("channel needs a delay-0 tap".into()));
        }
        Ok(MultipathChannel { taps, snr_db, seed })
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Largest tap delay.
    pub fn max_delay(&self) -> usize {
        self.taps.iter().map(|t| t.delay).max().unwrap_or(0)
    }

    /// Tap gains realized at a burst index. Pure in `(self, burst_index)`.
    ///
    /// Random-walk taps resum their per-burst steps from the start so that
    /// the realization at index `k` is independent of evaluation order.
    pub fn realize(&self, burst_index: u64) -> Vec<(usize, Complex64)> {
        self.taps
            .iter()
            .enumerate()
            .map(|(tap_idx, tap)| {
                let gain = match tap.variation {
                    TapVariation::Static => tap.gain,
                    TapVariation::Sinusoidal {
                        amplitude,
                        period_bursts,
                    } => {
                        let phase =
                            2.0 * core::f64::consts::PI * burst_index as f64 / period_bursts;
                        tap.gain * (1.0 + amplitude * libm::sin(phase))
                    }
                    TapVariation::RandomWalk { step_std } => {
                        let mut rng =
                            SeededRng::new(&[self.seed, TAG_WALK, tap_idx as u64]);
                        let mut acc = Complex64::new(0.0, 0.0);
                        for _ in 0..burst_index {
                            acc += rng.complex_gaussian();
                        }
                        tap.gain + step_std * acc
                    }
                };
                (tap.delay, gain)
            })
            .collect()
    }

    /// Dense impulse response at a burst index (length `max_delay + 1`).
    pub fn impulse_response(&self, burst_index: u64) -> Vec<Complex64> {
        let mut h = vec![Complex64::new(0.0, 0.0); self.max_delay() + 1];
        for (delay, gain) in self.realize(burst_index) {
            h[delay] += gain;
        }
        h
    }
}

/// Propagate a sample stream through the channel at a given burst index.
///
/// The output is the discrete convolution of the input with the tap impulse
/// response realized at `burst_index` (length `input + max_delay`), plus
/// circular-symmetric white Gaussian noise scaled so that the average
/// per-sample SNR against the convolved signal equals the channel's
/// `snr_db`. Noise is keyed by `(seed, burst_index)` only.
pub fn propagate(
    input: &SymbolSequence,
    channel: &MultipathChannel,
    burst_index: u64,
) -> SymbolSequence {
    let n = input.samples.len();
    let out_len = n + channel.max_delay();
    let mut out = vec![Complex64::new(0.0, 0.0); out_len];
    for (delay, gain) in channel.realize(burst_index) {
        for (i, &x) in input.samples.iter().enumerate() {
            out[i + delay] += gain * x;
        }
    }
    if channel.snr_db.is_finite() && out_len > 0 {
        let signal_power: f64 =
            out.iter().map(|s| s.norm_sqr()).sum::<f64>() / out_len as f64;
        let noise_var = signal_power / libm::pow(10.0, channel.snr_db / 10.0);
        if noise_var > 0.0 {
            let scale = libm::sqrt(noise_var);
            let mut rng = SeededRng::new(&[channel.seed, TAG_NOISE, burst_index]);
            for s in &mut out {
                *s += scale * rng.complex_gaussian();
            }
        }
    }
    SymbolSequence {
        samples: out,
        oversampling: input.oversampling,
        symbol_rate: input.symbol_rate,
    }
}

/// Realized SNR in dB between a clean and a noisy copy of the same signal.
///
/// Returns `f64::INFINITY` when the noise power is exactly zero.
pub fn snr_realized(clean: &SymbolSequence, noisy: &SymbolSequence) -> Result<f64> {
    if clean.samples.len() != noisy.samples.len() {
        return Err(Error::Argument(format!(
            "length mismatch: clean {} vs noisy {}",
            clean.samples.len(),
            noisy.samples.len()
        )));
    }
    let signal: f64 = clean.samples.iter().map(|s| s.norm_sqr()).sum();
    let noise: f64 = clean
        .samples
        .iter()
        .zip(&noisy.samples)
        .map(|(c, n)| (n - c).norm_sqr())
        .sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * libm::log10(signal / noise))
}

/// Human-readable tap summary, used in diagnostics.
pub fn describe_taps(channel: &MultipathChannel) -> String {
    let mut s = String::new();
    for tap in channel.taps() {
        let _ = core::fmt::write(
            &mut s,
            format_args!("({}, {:.3}{:+.3}i) ", tap.delay, tap.gain.re, tap.gain.im),
        );
    }
    s
}
