//! Conjugate-coding encryption: each message bit becomes one qubit prepared
//! in the basis named by the basis-selection stream (0 → Z, 1 → X), and
//! decryption measures each qubit in the basis the receiver derives. With
//! the matching stream the round trip is exact; on a mismatched position
//! the outcome is a fair coin.

use num_complex::Complex64;
use thiserror::Error;

use crate::bits::BitString;
use crate::quantum::{self, Basis, StateVector};
use crate::rng::RandomSource;

#[derive(Debug, Error, PartialEq)]
pub enum ConjugateError {
    #[error("basis stream has {got} bits but {needed} are needed")]
    LengthMismatch { needed: usize, got: usize },
    #[error("malformed ciphertext serialization: {0}")]
    BadFormat(String),
    #[error(transparent)]
    Quantum(#[from] quantum::QuantumError),
}

/// A product-state ciphertext: one independent qubit per message bit.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitCiphertext {
    qubits: Vec<StateVector>,
}

impl QubitCiphertext {
    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn qubits(&self) -> &[StateVector] {
        &self.qubits
    }

    /// Applies X^{x_i} Z^{z_i} to qubit i — the quantum one-time pad used
    /// for revocation re-randomization.
    pub fn apply_pauli_masks(
        &mut self,
        x_mask: &BitString,
        z_mask: &BitString,
    ) -> Result<(), ConjugateError> {
        for mask in [x_mask, z_mask] {
            if mask.len() < self.len() {
                return Err(ConjugateError::LengthMismatch {
                    needed: self.len(),
                    got: mask.len(),
                });
            }
        }
        for (i, qubit) in self.qubits.iter_mut().enumerate() {
            *qubit = quantum::apply_pauli_mask(qubit, &[x_mask.get(i)], &[z_mask.get(i)])?;
        }
        Ok(())
    }

    /// Serializes to the versioned text block stored at the cloud service:
    /// a count line, then one line per qubit. A qubit still in one of the
    /// four conjugate states gets a compact `q <basis> <bit>` tag; anything
    /// else (a re-randomized state) is written as raw amplitudes
    /// `q raw <re0> <im0> <re1> <im1>`.
    pub fn to_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("qubits {}", self.len())];
        for qubit in &self.qubits {
            lines.push(match pristine_tag(qubit) {
                Some((basis, bit)) => {
                    let b = if basis == Basis::Z { "Z" } else { "X" };
                    format!("q {b} {bit}")
                }
                None => {
                    let a = qubit.amplitudes();
                    format!("q raw {} {} {} {}", a[0].re, a[0].im, a[1].re, a[1].im)
                }
            });
        }
        lines
    }

    /// Parses the block written by [`to_lines`](Self::to_lines).
    pub fn from_lines(lines: &[&str]) -> Result<QubitCiphertext, ConjugateError> {
        let bad = |msg: &str| ConjugateError::BadFormat(msg.to_string());
        let header = lines.first().ok_or_else(|| bad("missing qubit count"))?;
        let count: usize = header
            .strip_prefix("qubits ")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| bad("malformed qubit count line"))?;
        if lines.len() != count + 1 {
            return Err(bad("qubit count disagrees with line count"));
        }
        let mut qubits = Vec::with_capacity(count);
        for line in &lines[1..] {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let qubit = match fields.as_slice() {
                ["q", "Z", bit] | ["q", "X", bit] => {
                    let basis = if fields[1] == "Z" { Basis::Z } else { Basis::X };
                    let bit: u8 = bit.parse().map_err(|_| bad("bad bit"))?;
                    if bit > 1 {
                        return Err(bad("bit must be 0 or 1"));
                    }
                    quantum::prepare(bit, basis)
                }
                ["q", "raw", re0, im0, re1, im1] => {
                    let parse = |s: &str| s.parse::<f64>().map_err(|_| bad("bad amplitude"));
                    StateVector::from_amplitudes(
                        1,
                        vec![
                            Complex64::new(parse(re0)?, parse(im0)?),
                            Complex64::new(parse(re1)?, parse(im1)?),
                        ],
                    )?
                }
                _ => return Err(bad("unrecognized qubit line")),
            };
            qubits.push(qubit);
        }
        Ok(QubitCiphertext { qubits })
    }
}

/// Identifies a qubit still exactly in one of the four conjugate states.
fn pristine_tag(qubit: &StateVector) -> Option<(Basis, u8)> {
    let close = |a: &StateVector, b: &StateVector| {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .all(|(x, y)| (x - y).norm() < 1e-12)
    };
    for basis in [Basis::Z, Basis::X] {
        for bit in [0u8, 1] {
            if close(qubit, &quantum::prepare(bit, basis)) {
                return Some((basis, bit));
            }
        }
    }
    None
}

/// Encrypts a bit string: position i becomes `prepare(Mᵢ, basis(B′ᵢ))`.
/// Deterministic; consumes no randomness.
pub fn encrypt(
    message: &BitString,
    basis_stream: &BitString,
) -> Result<QubitCiphertext, ConjugateError> {
    if basis_stream.len() < message.len() {
        return Err(ConjugateError::LengthMismatch {
            needed: message.len(),
            got: basis_stream.len(),
        });
    }
    let qubits = message
        .iter()
        .enumerate()
        .map(|(i, bit)| quantum::prepare(bit, Basis::from_bit(basis_stream.get(i))))
        .collect();
    Ok(QubitCiphertext { qubits })
}

/// Measures qubit i in the basis named by B′ᵢ and returns the outcome bits.
/// The ciphertext is consumed; randomness is drawn only where the stored
/// state is not an eigenstate of the chosen basis.
pub fn decrypt(
    mut ciphertext: QubitCiphertext,
    basis_stream: &BitString,
    rng: &mut RandomSource,
) -> Result<BitString, ConjugateError> {
    if basis_stream.len() < ciphertext.len() {
        return Err(ConjugateError::LengthMismatch {
            needed: ciphertext.len(),
            got: basis_stream.len(),
        });
    }
    Ok(ciphertext
        .qubits
        .iter_mut()
        .enumerate()
        .map(|(i, qubit)| quantum::measure(qubit, Basis::from_bit(basis_stream.get(i)), rng))
        .collect())
}
