//! Seeded random streams.
//!
//! Every random draw in the crate goes through [`SeededRng`]: a ChaCha8
//! stream keyed by a 64-bit seed, with uniforms built from the top 53 bits
//! of each output word and normal variates from the Box–Muller transform
//! (both variates of a pair are used, cosine branch first). The stream for
//! a given seed is therefore fixed across machines, runs and thread counts.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

impl RngSeed {
    /// Derives a child seed from this seed and a path of integer tags.
    ///
    /// Each tag is folded in with the SplitMix64 finalizer:
    /// `state = mix(state ^ mix(tag + GOLDEN))`. Distinct tag paths give
    /// statistically unrelated child seeds.
    pub fn derive(self, tags: &[u64]) -> RngSeed {
        let mut state = splitmix64(self.0);
        for &tag in tags {
            state = splitmix64(state ^ splitmix64(tag.wrapping_add(GOLDEN)));
        }
        RngSeed(state)
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub struct SeededRng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: RngSeed) -> Self {
        SeededRng {
            inner: ChaCha8Rng::seed_from_u64(seed.0),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)`, rejection-sampled so it is unbiased.
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "below(0)");
        let bound = bound as u64;
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % bound) as usize;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 in (0, 1] keeps the log finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// `k` distinct indices drawn uniformly from `0..n`, in draw order.
    ///
    /// Partial Fisher–Yates over a virtual identity permutation, so the cost is
    /// `O(k)` regardless of `n`.
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} of {n}");
        let mut swapped = std::collections::HashMap::with_capacity(k);
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let j = i + self.below(n - i);
            let vj = *swapped.get(&j).unwrap_or(&j);
            let vi = *swapped.get(&i).unwrap_or(&i);
            swapped.insert(j, vi);
            out.push(vj);
        }
        out
    }
}
