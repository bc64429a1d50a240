//! Plain bit strings: the classical payloads moved around by the protocols
//! (messages, BB84 keys, basis-selection streams).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("invalid bit character {0:?} at offset {1}")]
    InvalidBitChar(char, usize),
    #[error("invalid hex string: {0}")]
    InvalidHex(String),
    #[error("value {value} does not fit in {len} bits")]
    Overflow { value: u64, len: usize },
}

/// An ordered sequence of bits. Index 0 is the leftmost bit, matching the
/// written order of bit strings like `0101101`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        BitString(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitString(vec![0; len])
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_bin_str(s: &str) -> Result<Self, BitsError> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(BitsError::InvalidBitChar(c, i)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }

    /// Parses hex, yielding 4 bits per digit, most significant bit first.
    pub fn from_hex(s: &str) -> Result<Self, BitsError> {
        let bytes = if s.len() % 2 == 0 {
            hex::decode(s).map_err(|e| BitsError::InvalidHex(e.to_string()))?
        } else {
            // odd digit count: prepend a nibble so hex::decode accepts it,
            // then drop the padding bits afterwards
            hex::decode(format!("0{s}")).map_err(|e| BitsError::InvalidHex(e.to_string()))?
        };
        let mut bits: Vec<u8> = bytes
            .iter()
            .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1))
            .collect();
        if s.len() % 2 == 1 {
            bits.drain(..4);
        }
        Ok(BitString(bits))
    }

    /// Big-endian integer embedding: bit 0 is the most significant.
    pub fn to_int(&self) -> u64 {
        assert!(self.0.len() <= 64, "bit string too long for u64");
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// Inverse of [`to_int`](Self::to_int) for a fixed width.
    pub fn from_int(value: u64, len: usize) -> Result<Self, BitsError> {
        if len < 64 && value >> len != 0 {
            return Err(BitsError::Overflow { value, len });
        }
        Ok(BitString(
            (0..len).rev().map(|i| ((value >> i) & 1) as u8).collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn push(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        self.0.push(bit);
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn prefix(&self, len: usize) -> BitString {
        BitString(self.0[..len].to_vec())
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Positions (0-based) where the two strings differ; both must be read
    /// only up to the shorter length.
    pub fn hamming_distance(&self, other: &BitString) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn to_bin_string(&self) -> String {
        self.0
            .iter()
            .map(|&b| if b == 0 { '0' } else { '1' })
            .collect()
    }

    /// Hex encoding; the length is padded up to a whole number of nibbles
    /// with trailing zeros, so it is only lossless when `len % 4 == 0`.
    pub fn to_hex(&self) -> String {
        let mut padded = self.0.clone();
        while padded.len() % 8 != 0 {
            padded.push(0);
        }
        let bytes: Vec<u8> = padded
            .chunks(8)
            .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b))
            .collect();
        hex::encode(bytes)
    }
}

impl std::fmt::Debug for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitString({})", self.to_bin_string())
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_bin_string())
    }
}

impl FromIterator<u8> for BitString {
    fn from_iter<T: IntoIterator<Item = u8>>(iter: T) -> Self {
        BitString::new(iter.into_iter().collect())
    }
}
