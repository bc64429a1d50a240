//! Deterministic expansion of the short shared key into the basis-selection
//! stream, via a Fibonacci LFSR by default.
//!
//! A plain LFSR is linearly predictable and **not** cryptographically
//! secure; it is the simulation default, and [`KeystreamGenerator`] lets a
//! stronger stream cipher be substituted without touching protocol code.
//!
//! Tap positions name the exponents of the feedback polynomial
//! x^m + x^{t₂} + … + 1 (the register length m is always a tap). Every
//! supported default gives a maximal-length sequence: the register walks
//! all 2^m − 1 nonzero states before repeating.

use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KeystreamError {
    #[error("all-zero seed never leaves the zero state")]
    DegenerateSeed,
    #[error("no default taps for register length {0}")]
    UnsupportedLength(u32),
    #[error("seed has {got} bits, register needs {expected}")]
    SeedMismatch { expected: u32, got: usize },
    #[error("invalid taps: {0}")]
    BadTaps(String),
    #[error("taps do not define a primitive polynomial")]
    NotPrimitive,
    #[error("output length must be at least 1")]
    EmptyOutput,
}

/// Expands an m-bit seed into an arbitrarily long bit stream.
/// Expansions are deterministic and prefix-consistent.
pub trait KeystreamGenerator {
    fn expand(&self, seed: &BitString, out_len: usize) -> Result<BitString, KeystreamError>;
}

/// A Fibonacci LFSR description: register length and feedback taps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfsrSpec {
    m: u32,
    taps: Vec<u32>,
}

impl LfsrSpec {
    /// Default maximal-length taps per register length.
    pub fn default_taps(m: u32) -> Option<&'static [u32]> {
        match m {
            8 => Some(&[8, 6, 5, 4]),
            16 => Some(&[16, 15, 13, 4]),
            24 => Some(&[24, 23, 22, 17]),
            32 => Some(&[32, 22, 2, 1]),
            _ => None,
        }
    }

    /// Spec with the default taps for a supported register length.
    pub fn for_length(m: u32) -> Result<LfsrSpec, KeystreamError> {
        let taps = Self::default_taps(m).ok_or(KeystreamError::UnsupportedLength(m))?;
        Ok(LfsrSpec {
            m,
            taps: taps.to_vec(),
        })
    }

    /// Custom taps; rejected unless they define a primitive polynomial, so
    /// every accepted spec has full period 2^m − 1.
    pub fn new(m: u32, taps: &[u32]) -> Result<LfsrSpec, KeystreamError> {
        if m == 0 || m > 32 {
            return Err(KeystreamError::BadTaps(format!(
                "register length {m} outside 1..=32"
            )));
        }
        let mut sorted = taps.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != taps.len() {
            return Err(KeystreamError::BadTaps("duplicate tap".into()));
        }
        if sorted.iter().any(|&t| t == 0 || t > m) {
            return Err(KeystreamError::BadTaps(format!("taps must lie in 1..={m}")));
        }
        if sorted.last() != Some(&m) {
            return Err(KeystreamError::BadTaps(format!(
                "the register length {m} must itself be a tap"
            )));
        }
        let spec = LfsrSpec {
            m,
            taps: taps.to_vec(),
        };
        if !is_primitive(spec.polynomial(), m) {
            return Err(KeystreamError::NotPrimitive);
        }
        Ok(spec)
    }

    pub fn register_len(&self) -> u32 {
        self.m
    }

    pub fn taps(&self) -> &[u32] {
        &self.taps
    }

    /// Feedback polynomial as a bit mask: bit i set means the x^i term is
    /// present. The constant term is always present.
    fn polynomial(&self) -> u64 {
        // tap m contributes the constant term under the shift-register view
        self.taps.iter().fold(1u64 << self.m | 1, |poly, &t| {
            if t == self.m {
                poly
            } else {
                poly | 1u64 << t
            }
        })
    }

    /// One register step on a state held in the low m bits; returns the
    /// output bit. The feedback XORs bit (m − t) for every tap t.
    fn step(&self, state: &mut u64) -> u8 {
        let out = (*state & 1) as u8;
        let feedback = self
            .taps
            .iter()
            .fold(0u64, |acc, &t| acc ^ (*state >> (self.m - t)))
            & 1;
        *state = (*state >> 1) | (feedback << (self.m - 1));
        out
    }

    /// Walks the register from state 1 until it revisits a state, returning
    /// the cycle length. Exhaustive, so only sensible for small m.
    pub fn cycle_length(&self) -> u64 {
        let start = 1u64;
        let mut state = start;
        let mut steps = 0u64;
        loop {
            self.step(&mut state);
            steps += 1;
            if state == start {
                return steps;
            }
        }
    }
}

impl KeystreamGenerator for LfsrSpec {
    fn expand(&self, seed: &BitString, out_len: usize) -> Result<BitString, KeystreamError> {
        if seed.len() != self.m as usize {
            return Err(KeystreamError::SeedMismatch {
                expected: self.m,
                got: seed.len(),
            });
        }
        if seed.is_all_zero() {
            return Err(KeystreamError::DegenerateSeed);
        }
        if out_len == 0 {
            return Err(KeystreamError::EmptyOutput);
        }
        let mut state = seed.to_int();
        Ok((0..out_len).map(|_| self.step(&mut state)).collect())
    }
}

/// Primitivity of a degree-m polynomial over GF(2): x must have order
/// exactly 2^m − 1 in GF(2)[x]/f, i.e. x^(2^m−1) = 1 while x^((2^m−1)/q)
/// differs from 1 for every prime factor q.
fn is_primitive(poly: u64, m: u32) -> bool {
    if poly & 1 == 0 {
        return false;
    }
    let order = (1u64 << m) - 1;
    let x = 2u64; // the polynomial "x"
    if polymod_pow(x, order, poly, m) != 1 {
        return false;
    }
    prime_factors(order)
        .into_iter()
        .all(|q| polymod_pow(x, order / q, poly, m) != 1)
}

/// Carry-less multiply of two residues modulo `poly` (degree m).
fn polymod_mul(mut a: u64, mut b: u64, poly: u64, m: u32) -> u64 {
    let mut acc = 0u64;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> m & 1 == 1 {
            a ^= poly;
        }
    }
    acc
}

fn polymod_pow(mut base: u64, mut exp: u64, poly: u64, m: u32) -> u64 {
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = polymod_mul(acc, base, poly, m);
        }
        base = polymod_mul(base, base, poly, m);
        exp >>= 1;
    }
    acc
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut factors = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            factors.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    factors
}
