//! Minimal state-vector simulator: qubit preparation in the two conjugate
//! bases, Born-rule measurement (full and partial), and Pauli masking.
//!
//! Qubit positions are 1-based and position 1 is the leftmost character of a
//! written basis label, so the state |0101101⟩ has a 1 at positions 2, 4, 5
//! and 7. All randomness comes from an injected [`RandomSource`].

use num_complex::Complex64;
use thiserror::Error;

use crate::rng::RandomSource;

/// Largest register the simulator accepts (amplitude vectors stay small).
pub const MAX_QUBITS: usize = 12;

/// Probabilities below this are treated as impossible during collapse.
const COLLAPSE_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("qubit position {position} out of range 1..={num_qubits}")]
    IndexOutOfRange { position: usize, num_qubits: usize },
    #[error("duplicate qubit position {0}")]
    DuplicateIndex(usize),
    #[error("mask length {got} does not match qubit count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("amplitude vector length {got} is not 2^{num_qubits}")]
    BadAmplitudeCount { num_qubits: usize, got: usize },
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("collapse left total probability {0} below threshold")]
    CollapseUnderflow(f64),
    #[error("{0} qubits exceed simulator capacity {MAX_QUBITS}")]
    CapacityExceeded(usize),
}

/// The two conjugate encoding bases. `Z` holds |0⟩/|1⟩ and `X` holds
/// |+⟩/|−⟩ with |±⟩ = (|0⟩ ± |1⟩)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    /// Public convention: bit 0 selects Z, bit 1 selects X.
    pub fn from_bit(bit: u8) -> Basis {
        if bit == 0 {
            Basis::Z
        } else {
            Basis::X
        }
    }
}

/// A pure state of `num_qubits` qubits as 2^n complex amplitudes.
///
/// Amplitude index bits follow the written label: for position k (1-based,
/// leftmost first) the index bit is `1 << (num_qubits - k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state |index⟩.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<StateVector, QuantumError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QuantumError::CapacityExceeded(num_qubits));
        }
        let dim = 1usize << num_qubits;
        assert!(index < dim, "basis state index out of range");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Uniform superposition over the given basis indices.
    pub fn uniform_over(num_qubits: usize, indices: &[usize]) -> Result<StateVector, QuantumError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QuantumError::CapacityExceeded(num_qubits));
        }
        assert!(!indices.is_empty());
        let dim = 1usize << num_qubits;
        let amp = Complex64::new(1.0 / (indices.len() as f64).sqrt(), 0.0);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        for &i in indices {
            assert!(i < dim, "basis state index out of range");
            amplitudes[i] = amp;
        }
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Builds a state from raw amplitudes, checking length and normalization.
    pub fn from_amplitudes(
        num_qubits: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<StateVector, QuantumError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QuantumError::CapacityExceeded(num_qubits));
        }
        if amplitudes.len() != 1 << num_qubits {
            return Err(QuantumError::BadAmplitudeCount {
                num_qubits,
                got: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Index-bit mask for a 1-based qubit position.
    fn position_mask(&self, position: usize) -> Result<usize, QuantumError> {
        if position == 0 || position > self.num_qubits {
            return Err(QuantumError::IndexOutOfRange {
                position,
                num_qubits: self.num_qubits,
            });
        }
        Ok(1usize << (self.num_qubits - position))
    }

    /// Exact probability table for a Z measurement of the given positions.
    ///
    /// Entry `pat` is the probability of the outcome pattern whose bit for
    /// `positions[0]` is the most significant, matching reading order.
    pub fn z_marginal_distribution(&self, positions: &[usize]) -> Result<Vec<f64>, QuantumError> {
        let masks = self.check_positions(positions)?;
        let mut table = vec![0.0; 1 << positions.len()];
        for (index, amp) in self.amplitudes.iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            table[pattern_of(index, &masks)] += p;
        }
        Ok(table)
    }

    fn check_positions(&self, positions: &[usize]) -> Result<Vec<usize>, QuantumError> {
        let mut masks = Vec::with_capacity(positions.len());
        for &pos in positions {
            let mask = self.position_mask(pos)?;
            if masks.contains(&mask) {
                return Err(QuantumError::DuplicateIndex(pos));
            }
            masks.push(mask);
        }
        Ok(masks)
    }

    /// Z-basis measurement of a subset of qubit positions. The state
    /// collapses in place; outcome bits follow the order of `positions`.
    ///
    /// Randomness is consumed only when the outcome is not already
    /// determined, so re-measuring collapsed positions is draw-free.
    pub fn measure_subset_z(
        &mut self,
        positions: &[usize],
        rng: &mut RandomSource,
    ) -> Result<Vec<u8>, QuantumError> {
        let masks = self.check_positions(positions)?;
        let table = self.z_marginal_distribution(positions)?;

        let pattern = sample_pattern(&table, rng);

        // collapse: zero amplitudes disagreeing with the sampled pattern
        let mut kept = 0.0;
        for (index, amp) in self.amplitudes.iter_mut().enumerate() {
            if pattern_of(index, &masks) == pattern {
                kept += amp.norm_sqr();
            } else {
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        if kept < COLLAPSE_EPS {
            return Err(QuantumError::CollapseUnderflow(kept));
        }
        let scale = 1.0 / kept.sqrt();
        for amp in &mut self.amplitudes {
            *amp *= scale;
        }

        let k = positions.len();
        Ok((0..k).map(|i| ((pattern >> (k - 1 - i)) & 1) as u8).collect())
    }
}

/// Prepares a single qubit encoding `bit` in `basis`:
/// (0,Z)→|0⟩, (1,Z)→|1⟩, (0,X)→|+⟩, (1,X)→|−⟩.
pub fn prepare(bit: u8, basis: Basis) -> StateVector {
    assert!(bit <= 1, "bit must be 0 or 1");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amplitudes = match (bit, basis) {
        (0, Basis::Z) => vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        (_, Basis::Z) => vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        (0, Basis::X) => vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        (_, Basis::X) => vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
    };
    StateVector {
        num_qubits: 1,
        amplitudes,
    }
}

/// Born-rule measurement of a single qubit in the given basis. The state
/// collapses to the observed basis state. Returns the outcome bit, where
/// in the X basis 0 means |+⟩ and 1 means |−⟩.
pub fn measure(state: &mut StateVector, basis: Basis, rng: &mut RandomSource) -> u8 {
    assert_eq!(state.num_qubits, 1, "measure expects a single qubit");
    let a0 = state.amplitudes[0];
    let a1 = state.amplitudes[1];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // amplitude of the outcome-1 state in the chosen basis
    let p1 = match basis {
        Basis::Z => a1.norm_sqr(),
        Basis::X => ((a0 - a1) * h).norm_sqr(),
    };
    let outcome = sample_bit(p1, rng);
    *state = match basis {
        Basis::Z => prepare(outcome, Basis::Z),
        Basis::X => prepare(outcome, Basis::X),
    };
    outcome
}

/// Applies X^{x_k} Z^{z_k} to every qubit position k. Masks are indexed by
/// position (entry 0 is position 1) and must cover all qubits. Applying the
/// same masks twice restores the state up to a global sign.
pub fn apply_pauli_mask(
    state: &StateVector,
    x_mask: &[u8],
    z_mask: &[u8],
) -> Result<StateVector, QuantumError> {
    let n = state.num_qubits;
    for mask in [x_mask, z_mask] {
        if mask.len() != n {
            return Err(QuantumError::LengthMismatch {
                expected: n,
                got: mask.len(),
            });
        }
    }
    let mut xbits = 0usize;
    let mut zbits = 0usize;
    for k in 1..=n {
        let bit = 1usize << (n - k);
        if x_mask[k - 1] & 1 == 1 {
            xbits |= bit;
        }
        if z_mask[k - 1] & 1 == 1 {
            zbits |= bit;
        }
    }
    // (X^x Z^z)|j⟩ = (−1)^{popcount(j & z)} |j ⊕ x⟩
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
    for (index, amp) in state.amplitudes.iter().enumerate() {
        let sign = if (index & zbits).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        amplitudes[index ^ xbits] = amp * sign;
    }
    Ok(StateVector {
        num_qubits: n,
        amplitudes,
    })
}

/// Extracts the outcome pattern of `index` under the position masks,
/// first mask as the most significant pattern bit.
fn pattern_of(index: usize, masks: &[usize]) -> usize {
    masks
        .iter()
        .fold(0usize, |pat, &m| (pat << 1) | usize::from(index & m != 0))
}

/// Draws a pattern from a probability table, skipping the rng draw when one
/// entry already carries (numerically) all the mass.
fn sample_pattern(table: &[f64], rng: &mut RandomSource) -> usize {
    if let Some(certain) = table.iter().position(|&p| p >= 1.0 - COLLAPSE_EPS) {
        return certain;
    }
    let total: f64 = table.iter().sum();
    let mut u = rng.gen_f64() * total;
    for (pat, &p) in table.iter().enumerate() {
        if u < p {
            return pat;
        }
        u -= p;
    }
    // numerically possible when u lands on the trailing rounding gap
    table.len() - 1
}

fn sample_bit(p1: f64, rng: &mut RandomSource) -> u8 {
    if p1 <= COLLAPSE_EPS {
        0
    } else if p1 >= 1.0 - COLLAPSE_EPS {
        1
    } else {
        u8::from(rng.gen_f64() < p1)
    }
}
