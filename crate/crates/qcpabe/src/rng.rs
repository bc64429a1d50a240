//! Deterministic randomness for the simulation. Every probabilistic step in
//! the library draws from an explicitly injected [`RandomSource`]; there is
//! no ambient entropy, so a run is a pure function of its seeds.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bits::BitString;

/// Seeded generator handed to every operation that needs randomness.
/// Identical seeds yield identical draw sequences.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn from_seed(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn gen_bit(&mut self) -> u8 {
        (self.rng.next_u64() & 1) as u8
    }

    pub fn gen_bits(&mut self, len: usize) -> BitString {
        (0..len).map(|_| self.gen_bit()).collect()
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    pub fn gen_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n). Rejection sampling keeps the distribution
    /// exact rather than taking a biased modulus.
    pub fn gen_range(&mut self, n: u64) -> u64 {
        assert!(n > 0, "gen_range upper bound must be positive");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.rng.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    pub fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest);
    }

    /// Chooses `k` distinct indices out of `0..n` (partial Fisher-Yates);
    /// the result is sorted.
    pub fn choose_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.gen_range((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut picked = pool[..k].to_vec();
        picked.sort_unstable();
        picked
    }
}
