//! GSM normal-burst construction and baseband symbol mapping.
//!
//! A normal burst carries 148 active symbols laid out as
//! `3 tail | 57 data | 1 steal | 26 midamble | 1 steal | 57 data | 3 tail`,
//! followed by 8.25 guard symbol periods, for a total burst duration of
//! 156.25 symbol periods (about 577 us at 270.833 ksym/s). The 26-bit
//! midamble is one of eight standard training sequences; its central 16
//! chips correlate to an impulse against the full sequence, which is what
//! makes the burst usable for channel estimation.
//!
//! Modulation here is antipodal symbol mapping (bit `b` becomes the real
//! sample `1 - 2b`), not GMSK: downstream stages only consume the training
//! sequence, never the modulation waveform. The guard period is bookkept as
//! a constant but never synthesized as samples; propagation treats each
//! transmitted sequence as isolated in time.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Length of a training sequence in bits.
pub const TRAINING_SEQUENCE_LEN: usize = 26;
/// Active symbols in a normal burst.
pub const BURST_BITS: usize = 148;
/// Payload bits per burst (two 57-bit data fields).
pub const PAYLOAD_BITS: usize = 114;
/// Guard period in symbol durations (bookkept only).
pub const GUARD_SYMBOLS: f64 = 8.25;
/// GSM symbol rate: 1625/6 ksym/s.
pub const SYMBOL_RATE_HZ: f64 = 1_625_000.0 / 6.0;
/// Burst duration including guard, in seconds (~577 us).
pub const BURST_PERIOD_S: f64 = 156.25 / SYMBOL_RATE_HZ;
/// TDMA frame duration (8 timeslots), in seconds (~4.615 ms).
pub const TDMA_FRAME_S: f64 = 8.0 * BURST_PERIOD_S;
/// Bit offset of the midamble within the 148 active burst bits.
pub const MIDAMBLE_OFFSET: usize = 61;

/// The eight standard normal-burst training sequences (TSC 0..7).
const TSC_TABLE: [[u8; TRAINING_SEQUENCE_LEN]; 8] = [
    [0, 0, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 1],
    [0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1],
    [0, 1, 0, 0, 0, 0, 1, 1, 1, 0, 1, 1, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 1, 1, 0],
    [0, 1, 0, 0, 0, 1, 1, 1, 1, 0, 1, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1, 0],
    [0, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1, 0, 1, 0, 1, 1],
    [0, 1, 0, 0, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 1, 0, 1, 0],
    [1, 0, 1, 0, 0, 1, 1, 1, 1, 1, 0, 1, 1, 0, 0, 0, 1, 0, 1, 0, 0, 1, 1, 1, 1, 1],
    [1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0],
];

/// One of the eight standard 26-bit training sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingSequence {
    tsc_index: u8,
    bits: [u8; TRAINING_SEQUENCE_LEN],
}

impl TrainingSequence {
    pub fn tsc_index(&self) -> u8 {
        self.tsc_index
    }

    pub fn bits(&self) -> &[u8; TRAINING_SEQUENCE_LEN] {
        &self.bits
    }

    /// Antipodal chips of the sequence: bit `b` maps to `1 - 2b`.
    pub fn chips(&self) -> [f64; TRAINING_SEQUENCE_LEN] {
        let mut chips = [0.0; TRAINING_SEQUENCE_LEN];
        for (c, &b) in chips.iter_mut().zip(self.bits.iter()) {
            *c = 1.0 - 2.0 * b as f64;
        }
        chips
    }
}

/// Look up the canonical training sequence for `tsc_index` in `0..=7`.
pub fn training_sequence(tsc_index: u8) -> Result<TrainingSequence> {
    if tsc_index > 7 {
        return Err(Error::Argument(format!(
            "training sequence code {tsc_index} out of range 0..=7"
        )));
    }
    Ok(TrainingSequence {
        tsc_index,
        bits: TSC_TABLE[tsc_index as usize],
    })
}

/// A complete 148-bit normal burst.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalBurst {
    bits: [u8; BURST_BITS],
    tsc_index: u8,
}

impl NormalBurst {
    /// All 148 active bits in transmission order.
    pub fn bits(&self) -> &[u8; BURST_BITS] {
        &self.bits
    }

    pub fn tsc_index(&self) -> u8 {
        self.tsc_index
    }

    /// The 26 midamble bits.
    pub fn midamble_bits(&self) -> &[u8] {
        &self.bits[MIDAMBLE_OFFSET..MIDAMBLE_OFFSET + TRAINING_SEQUENCE_LEN]
    }
}

/// Assemble a normal burst: `3 tail | 57 data | steal | 26 TSC | steal | 57 data | 3 tail`.
///
/// `payload` supplies the two 57-bit data fields (114 bits total);
/// `stealing` the two flag bits, conventionally `(0, 0)`.
pub fn build_normal_burst(
    payload: &[u8],
    tsc_index: u8,
    stealing: (u8, u8),
) -> Result<NormalBurst> {
    if payload.len() != PAYLOAD_BITS {
        return Err(Error::Argument(format!(
            "payload must be {PAYLOAD_BITS} bits, got {}",
            payload.len()
        )));
    }
    if payload.iter().any(|&b| b > 1) || stealing.0 > 1 || stealing.1 > 1 {
        return Err(Error::Argument("burst bits must be 0 or 1".into()));
    }
    let ts = training_sequence(tsc_index)?;
    let mut bits = [0u8; BURST_BITS];
    let mut at = 3; // tail bits stay zero
    bits[at..at + 57].copy_from_slice(&payload[..57]);
    at += 57;
    bits[at] = stealing.0;
    at += 1;
    bits[at..at + TRAINING_SEQUENCE_LEN].copy_from_slice(ts.bits());
    at += TRAINING_SEQUENCE_LEN;
    bits[at] = stealing.1;
    at += 1;
    bits[at..at + 57].copy_from_slice(&payload[57..]);
    // trailing 3 tail bits stay zero
    Ok(NormalBurst { bits, tsc_index })
}

/// Complex baseband sample stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSequence {
    pub samples: Vec<Complex64>,
    pub oversampling: usize,
    pub symbol_rate: f64,
}

impl SymbolSequence {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Map bits to antipodal real symbols, repeating each `oversampling` times.
pub fn modulate_bits(bits: &[u8], oversampling: usize) -> Result<SymbolSequence> {
    if oversampling < 1 {
        return Err(Error::Argument("oversampling must be >= 1".into()));
    }
    let mut samples = Vec::with_capacity(bits.len() * oversampling);
    for &b in bits {
        let s = Complex64::new(1.0 - 2.0 * b as f64, 0.0);
        for _ in 0..oversampling {
            samples.push(s);
        }
    }
    Ok(SymbolSequence {
        samples,
        oversampling,
        symbol_rate: SYMBOL_RATE_HZ,
    })
}

/// Modulate a full normal burst (guard period not synthesized).
pub fn modulate(burst: &NormalBurst, oversampling: usize) -> Result<SymbolSequence> {
    modulate_bits(burst.bits(), oversampling)
}

/// Recover bits by decimating to one sample per symbol and taking the sign
/// of the real part. Inverse of [`modulate_bits`] in the noiseless case.
pub fn demodulate(seq: &SymbolSequence) -> Vec<u8> {
    seq.samples
        .iter()
        .step_by(seq.oversampling.max(1))
        .map(|s| if s.re < 0.0 { 1 } else { 0 })
        .collect()
}
