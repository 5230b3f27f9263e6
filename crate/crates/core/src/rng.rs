//! Deterministic random number generation.
//!
//! Every random quantity in the pipeline (payload bits, tap trajectories,
//! receiver noise) is drawn from a ChaCha stream seeded by mixing a list of
//! integer key parts. The same key always yields the same stream, on every
//! platform, which is what makes whole experiment runs bit-reproducible.

use alloc::vec::Vec;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// SplitMix64 step: mixes a single value into an accumulator state.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix an ordered list of key parts into a single 64-bit seed.
pub fn mix(parts: &[u64]) -> u64 {
    let mut acc = 0x243f_6a88_85a3_08d3; // arbitrary nonzero start
    for &p in parts {
        acc = splitmix64(acc ^ p);
    }
    acc
}

/// Deterministic generator keyed by a list of integers.
#[derive(Debug, Clone)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    /// Create a generator for the given key parts.
    pub fn new(parts: &[u64]) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(mix(parts)))
    }

    /// Uniform sample in `(0, 1]` (never zero, so it is safe under `ln`).
    pub fn uniform(&mut self) -> f64 {
        (((self.0.next_u64() >> 11) + 1) as f64) * (1.0 / (1u64 << 53) as f64)
    }

    /// Pair of independent standard normal samples (Box-Muller).
    pub fn gaussian_pair(&mut self) -> (f64, f64) {
        let r = libm::sqrt(-2.0 * libm::log(self.uniform()));
        let theta = 2.0 * core::f64::consts::PI * self.uniform();
        (r * libm::cos(theta), r * libm::sin(theta))
    }

    /// Circular-symmetric complex Gaussian with unit total variance,
    /// i.e. real and imaginary parts each N(0, 1/2).
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let (a, b) = self.gaussian_pair();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(a * s, b * s)
    }

    /// `n` pseudorandom bits as 0/1 bytes.
    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n);
        let mut word = 0u64;
        let mut left = 0;
        for _ in 0..n {
            if left == 0 {
                word = self.0.next_u64();
                left = 64;
            }
            out.push((word & 1) as u8);
            word >>= 1;
            left -= 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_is_order_sensitive() {
        assert_ne!(mix(&[1, 2]), mix(&[2, 1]));
        assert_eq!(mix(&[1, 2, 3]), mix(&[1, 2, 3]));
    }

    #[test]
    fn streams_are_reproducible() {
        let mut a = SeededRng::new(&[42, 7]);
        let mut b = SeededRng::new(&[42, 7]);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn uniform_stays_in_half_open_unit_interval() {
        let mut rng = SeededRng::new(&[1]);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!(u > 0.0 && u <= 1.0);
        }
    }

    #[test]
    fn gaussian_moments_are_sane() {
        let mut rng = SeededRng::new(&[99]);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let (a, b) = rng.gaussian_pair();
            sum += a + b;
            sum_sq += a * a + b * b;
        }
        let mean = sum / (2 * n) as f64;
        let var = sum_sq / (2 * n) as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn complex_gaussian_has_unit_total_variance() {
        let mut rng = SeededRng::new(&[7]);
        let n = 100_000;
        let power: f64 = (0..n).map(|_| rng.complex_gaussian().norm_sqr()).sum();
        assert!((power / n as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn bits_are_balanced() {
        let mut rng = SeededRng::new(&[3]);
        let bits = rng.bits(100_000);
        assert!(bits.iter().all(|&b| b <= 1));
        let ones: usize = bits.iter().map(|&b| b as usize).sum();
        let frac = ones as f64 / bits.len() as f64;
        assert!((frac - 0.5).abs() < 0.01, "ones fraction {frac}");
    }
}
