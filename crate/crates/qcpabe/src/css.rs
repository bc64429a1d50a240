//! CSS logical states and the quantum secret sharing built on them: a code
//! is a pair of codeword lists (L0, L1) defining |0⟩_L and |1⟩_L as uniform
//! superpositions. A set of qubit positions is *qualified* when the XOR of a
//! Z measurement on those positions reveals the logical bit with certainty.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::quantum::{QuantumError, StateVector, MAX_QUBITS};
use crate::rng::RandomSource;

/// Longest codeword length accepted by the classical-side operations
/// (qualified-set discovery enumerates all 2^n position subsets).
pub const MAX_CODE_LEN: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum CssError {
    #[error("generator rows are linearly dependent over GF(2)")]
    DependentGenerators,
    #[error("coset representative lies in the span of the generators")]
    RepInSpan,
    #[error("codeword length {0} exceeds supported maximum {1}")]
    CapacityExceeded(usize, usize),
    #[error("codewords have mixed lengths")]
    MixedLengths,
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("positions do not form a qualified set for this code")]
    NotQualified,
    #[error("no registered state with id {0:?}")]
    UnknownState(StateId),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Fixed-length GF(2) vector, written leftmost bit first (`0101101`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryCodeword {
    bits: Vec<u8>,
}

impl BinaryCodeword {
    pub fn new(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        BinaryCodeword { bits }
    }

    pub fn parse(s: &str) -> Result<Self, CssError> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(CssError::InvalidCode(format!(
                    "invalid codeword character {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BinaryCodeword { bits })
    }

    pub fn zero(n: usize) -> Self {
        BinaryCodeword { bits: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit at 1-based position (position 1 = leftmost).
    pub fn bit(&self, position: usize) -> u8 {
        self.bits[position - 1]
    }

    pub fn xor(&self, other: &BinaryCodeword) -> BinaryCodeword {
        debug_assert_eq!(self.len(), other.len());
        BinaryCodeword {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    /// Amplitude index of the basis state labelled by this word
    /// (leftmost bit most significant).
    pub fn to_index(&self) -> usize {
        self.bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    /// Parity of the bits at the given 1-based positions.
    pub fn parity_on(&self, positions: &[usize]) -> u8 {
        positions.iter().fold(0u8, |acc, &p| acc ^ self.bit(p))
    }
}

impl fmt::Display for BinaryCodeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryCodeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryCodeword({self})")
    }
}

/// A set of qubit positions whose Z-measurement XOR is the logical bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualifiedSet {
    /// Sorted 1-based positions.
    pub positions: Vec<usize>,
    /// True when no proper subset is itself qualified.
    pub minimal: bool,
}

/// A CSS code given by its two logical codeword lists.
#[derive(Debug, Clone, PartialEq)]
pub struct CssCode {
    n: usize,
    l0: Vec<BinaryCodeword>,
    l1: Vec<BinaryCodeword>,
}

impl CssCode {
    /// The seven-qubit Steane code with the standard codeword lists.
    /// `{2,4,6}` is a qualified set for it.
    pub fn steane_default() -> CssCode {
        let parse_all = |w: &[&str]| -> Vec<BinaryCodeword> {
            w.iter().map(|s| BinaryCodeword::parse(s).unwrap()).collect()
        };
        let l0 = parse_all(&[
            "0000000", "0101101", "0011011", "0110110", "1111000", "1010101", "1100011", "1001110",
        ]);
        let l1 = parse_all(&[
            "1111111", "1010010", "1100100", "1001001", "0000111", "0101010", "0011100", "0110001",
        ]);
        let code = CssCode { n: 7, l0, l1 };
        debug_assert!(code.validate().is_ok());
        code
    }

    /// Builds a code from generator rows: L0 is their GF(2) span and L1 the
    /// coset shifted by `coset_rep`.
    pub fn from_generators(
        generators: &[BinaryCodeword],
        coset_rep: &BinaryCodeword,
    ) -> Result<CssCode, CssError> {
        let n = coset_rep.len();
        if n == 0 || n > MAX_CODE_LEN {
            return Err(CssError::CapacityExceeded(n, MAX_CODE_LEN));
        }
        if generators.iter().any(|g| g.len() != n) {
            return Err(CssError::MixedLengths);
        }
        // span enumeration; a size below 2^k exposes a dependent row
        let mut span: Vec<BinaryCodeword> = vec![BinaryCodeword::zero(n)];
        for gen in generators {
            let shifted: Vec<BinaryCodeword> = span.iter().map(|w| w.xor(gen)).collect();
            if shifted.iter().any(|w| span.contains(w)) {
                return Err(CssError::DependentGenerators);
            }
            span.extend(shifted);
        }
        if span.contains(coset_rep) {
            return Err(CssError::RepInSpan);
        }
        let mut l0 = span;
        let mut l1: Vec<BinaryCodeword> = l0.iter().map(|w| w.xor(coset_rep)).collect();
        l0.sort();
        l1.sort();
        let code = CssCode { n, l0, l1 };
        code.validate()?;
        Ok(code)
    }

    /// Assembles a code from raw lists without checking the code invariants.
    /// Useful for probing degenerate inputs; see [`CssCode::validate`].
    pub fn from_parts(n: usize, l0: Vec<BinaryCodeword>, l1: Vec<BinaryCodeword>) -> CssCode {
        CssCode { n, l0, l1 }
    }

    /// Checks the structural invariants: L0 is a linear code containing the
    /// zero word, L1 is a disjoint coset of it, and both have equal
    /// power-of-two size.
    pub fn validate(&self) -> Result<(), CssError> {
        if self.n == 0 || self.n > MAX_CODE_LEN {
            return Err(CssError::CapacityExceeded(self.n, MAX_CODE_LEN));
        }
        if self.l0.iter().chain(&self.l1).any(|w| w.len() != self.n) {
            return Err(CssError::MixedLengths);
        }
        if self.l0.is_empty() || !self.l0.len().is_power_of_two() || self.l0.len() != self.l1.len()
        {
            return Err(CssError::InvalidCode(
                "codeword lists must have equal power-of-two sizes".into(),
            ));
        }
        if !self.l0.contains(&BinaryCodeword::zero(self.n)) {
            return Err(CssError::InvalidCode("L0 must contain the zero word".into()));
        }
        for a in &self.l0 {
            for b in &self.l0 {
                if !self.l0.contains(&a.xor(b)) {
                    return Err(CssError::InvalidCode(format!(
                        "L0 not closed under XOR: {a} + {b}"
                    )));
                }
            }
        }
        let rep = &self.l1[0];
        let mut coset: Vec<BinaryCodeword> = self.l0.iter().map(|w| w.xor(rep)).collect();
        let mut l1 = self.l1.clone();
        coset.sort();
        l1.sort();
        if coset != l1 {
            return Err(CssError::InvalidCode("L1 is not a single coset of L0".into()));
        }
        if self.l0.iter().any(|w| self.l1.contains(w)) {
            return Err(CssError::InvalidCode("L0 and L1 overlap".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l0(&self) -> &[BinaryCodeword] {
        &self.l0
    }

    pub fn l1(&self) -> &[BinaryCodeword] {
        &self.l1
    }

    fn words_for(&self, bit: u8) -> &[BinaryCodeword] {
        if bit == 0 {
            &self.l0
        } else {
            &self.l1
        }
    }

    /// |bit⟩_L: the uniform superposition over the corresponding codewords.
    pub fn encode_logical(&self, bit: u8) -> Result<StateVector, CssError> {
        assert!(bit <= 1, "logical bit must be 0 or 1");
        if self.n > MAX_QUBITS {
            return Err(CssError::CapacityExceeded(self.n, MAX_QUBITS));
        }
        let indices: Vec<usize> = self.words_for(bit).iter().map(|w| w.to_index()).collect();
        Ok(StateVector::uniform_over(self.n, &indices)?)
    }

    /// Whether the XOR on `positions` is constant on L0 and takes the
    /// complementary constant on L1.
    pub fn is_qualified_set(&self, positions: &[usize]) -> bool {
        if positions.is_empty()
            || positions.iter().any(|&p| p == 0 || p > self.n)
            || self.l0.is_empty()
            || self.l1.is_empty()
        {
            return false;
        }
        let c0 = self.l0[0].parity_on(positions);
        if self.l0.iter().any(|w| w.parity_on(positions) != c0) {
            return false;
        }
        self.l1.iter().all(|w| w.parity_on(positions) == c0 ^ 1)
    }

    /// All qualified position sets, found by brute force over the 2^n − 1
    /// nonempty subsets, each flagged when minimal. Sets are returned in
    /// lexicographic order of their sorted position lists.
    pub fn qualified_sets(&self) -> Result<Vec<QualifiedSet>, CssError> {
        if self.n > MAX_CODE_LEN {
            return Err(CssError::CapacityExceeded(self.n, MAX_CODE_LEN));
        }
        let mut qualified: Vec<Vec<usize>> = Vec::new();
        for subset in 1usize..(1 << self.n) {
            let positions: Vec<usize> = (1..=self.n).filter(|&p| subset >> (p - 1) & 1 == 1).collect();
            if self.is_qualified_set(&positions) {
                qualified.push(positions);
            }
        }
        let minimal = |t: &Vec<usize>| {
            !qualified
                .iter()
                .any(|s| s != t && s.iter().all(|p| t.contains(p)))
        };
        let mut sets: Vec<QualifiedSet> = qualified
            .iter()
            .map(|positions| QualifiedSet {
                positions: positions.clone(),
                minimal: minimal(positions),
            })
            .collect();
        sets.sort_by(|a, b| a.positions.cmp(&b.positions));
        Ok(sets)
    }

    /// Probability of each XOR outcome (index 0 and 1) for a Z measurement
    /// of `positions` on `state`, computed analytically from the amplitudes.
    pub fn xor_outcome_distribution(
        state: &StateVector,
        positions: &[usize],
    ) -> Result<[f64; 2], CssError> {
        let table = state.z_marginal_distribution(positions)?;
        let mut dist = [0.0f64; 2];
        for (pattern, p) in table.iter().enumerate() {
            dist[(pattern.count_ones() % 2) as usize] += p;
        }
        Ok(dist)
    }
}

/// Handle to a joint quantum state held in a [`ShareRegistry`]. A party that
/// owns a handle plus a qubit position effectively holds that share; the
/// entangled state itself never splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u64);

/// Single-owner store of the logical states whose qubits act as shares.
/// Reconstruction collapses the stored state in place.
#[derive(Debug)]
pub struct ShareRegistry {
    code: CssCode,
    next_id: u64,
    states: HashMap<StateId, StateVector>,
}

impl ShareRegistry {
    pub fn new(code: CssCode) -> ShareRegistry {
        ShareRegistry {
            code,
            next_id: 0,
            states: HashMap::new(),
        }
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    /// Encodes the logical bit and stores the joint state, returning its handle.
    pub fn register_logical(&mut self, bit: u8) -> Result<StateId, CssError> {
        let state = self.code.encode_logical(bit)?;
        let id = StateId(self.next_id);
        self.next_id += 1;
        self.states.insert(id, state);
        Ok(id)
    }

    pub fn contains(&self, id: StateId) -> bool {
        self.states.contains_key(&id)
    }

    pub fn state(&self, id: StateId) -> Option<&StateVector> {
        self.states.get(&id)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Removes a state, modelling shares that have been consumed.
    pub fn remove(&mut self, id: StateId) -> Option<StateVector> {
        self.states.remove(&id)
    }

    /// Measures the given positions in Z and XORs the outcome bits. For a
    /// qualified set this recovers the encoded logical bit with certainty.
    pub fn reconstruct_bit(
        &mut self,
        id: StateId,
        positions: &[usize],
        rng: &mut RandomSource,
    ) -> Result<u8, CssError> {
        if !self.code.is_qualified_set(positions) {
            return Err(CssError::NotQualified);
        }
        let state = self
            .states
            .get_mut(&id)
            .ok_or(CssError::UnknownState(id))?;
        let bits = state.measure_subset_z(positions, rng)?;
        Ok(bits.iter().fold(0u8, |acc, &b| acc ^ b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steane() -> CssCode {
        CssCode::steane_default()
    }

    fn word(s: &str) -> BinaryCodeword {
        BinaryCodeword::parse(s).unwrap()
    }

    #[test]
    fn steane_lists_match_the_standard_expansion() {
        let code = steane();
        assert_eq!(code.n(), 7);
        assert!(code.l0().contains(&word("0000000")));
        assert!(code.l0().contains(&word("0101101")));
        assert!(code.l1().contains(&word("1111111")));
        assert!(code.l1().contains(&word("1010010")));
        assert_eq!(code.l0().len(), 8);
        assert_eq!(code.l1().len(), 8);
        code.validate().unwrap();
    }

    #[test]
    fn steane_l1_is_l0_complemented_pairwise() {
        let code = steane();
        let ones = word("1111111");
        for (w0, w1) in code.l0().iter().zip(code.l1()) {
            assert_eq!(&w0.xor(&ones), w1);
        }
    }

    #[test]
    fn generators_reproduce_the_steane_lists() {
        let gens = [word("0101101"), word("0011011"), word("1111000")];
        let built = CssCode::from_generators(&gens, &word("1111111")).unwrap();
        let as_set = |words: &[BinaryCodeword]| {
            let mut v = words.to_vec();
            v.sort();
            v
        };
        let canonical = steane();
        assert_eq!(as_set(built.l0()), as_set(canonical.l0()));
        assert_eq!(as_set(built.l1()), as_set(canonical.l1()));
    }

    #[test]
    fn two_bit_repetition_code() {
        let built = CssCode::from_generators(&[word("11")], &word("01")).unwrap();
        assert_eq!(built.l0(), &[word("00"), word("11")]);
        assert_eq!(built.l1(), &[word("01"), word("10")]);
        // the only qualified set is {1,2}
        let sets = built.qualified_sets().unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].positions, vec![1, 2]);
        assert!(sets[0].minimal);
    }

    #[test]
    fn generator_error_cases() {
        assert_eq!(
            CssCode::from_generators(&[word("10"), word("01")], &word("11")).unwrap_err(),
            CssError::RepInSpan
        );
        assert_eq!(
            CssCode::from_generators(&[word("11"), word("11")], &word("01")).unwrap_err(),
            CssError::DependentGenerators
        );
        assert_eq!(
            CssCode::from_generators(&[word("110"), word("01")], &word("011")).unwrap_err(),
            CssError::MixedLengths
        );
    }

    #[test]
    fn degenerate_equal_lists_have_no_qualified_set() {
        // L1 == L0 is rejected by the constructors, but qualified-set search
        // still answers: nothing distinguishes the two logical states
        let l = vec![word("00"), word("11")];
        let code = CssCode::from_parts(2, l.clone(), l);
        assert!(code.validate().is_err());
        assert!(code.qualified_sets().unwrap().is_empty());
    }

    #[test]
    fn encode_logical_amplitudes() {
        let code = steane();
        for bit in [0u8, 1] {
            let state = code.encode_logical(bit).unwrap();
            let expect = 1.0 / 8.0f64.sqrt();
            let words = if bit == 0 { code.l0() } else { code.l1() };
            let nonzero: Vec<usize> = state
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() > 1e-12)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(nonzero.len(), 8);
            for w in words {
                let amp = state.amplitudes()[w.to_index()];
                assert!((amp.re - expect).abs() < 1e-12 && amp.im == 0.0);
            }
            assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn encode_logical_repetition_code() {
        let code = CssCode::from_generators(&[word("11")], &word("01")).unwrap();
        let state = code.encode_logical(0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((state.amplitudes()[0b00].re - h).abs() < 1e-12);
        assert!((state.amplitudes()[0b11].re - h).abs() < 1e-12);
        assert!(state.amplitudes()[0b01].norm() < 1e-12);
        assert!(state.amplitudes()[0b10].norm() < 1e-12);
    }

    #[test]
    fn encode_capacity() {
        let n = 13;
        let code = CssCode::from_parts(
            n,
            vec![BinaryCodeword::zero(n)],
            vec![BinaryCodeword::new(vec![1; n])],
        );
        assert_eq!(
            code.encode_logical(0).unwrap_err(),
            CssError::CapacityExceeded(13, MAX_QUBITS)
        );
    }

    #[test]
    fn steane_qualified_sets_contain_the_known_ones() {
        let sets = steane().qualified_sets().unwrap();
        let find = |positions: &[usize]| sets.iter().find(|s| s.positions == positions);
        let s246 = find(&[2, 4, 6]).expect("{2,4,6} must be qualified");
        assert!(s246.minimal);
        let all = find(&[1, 2, 3, 4, 5, 6, 7]).expect("full set must be qualified");
        assert!(!all.minimal);
    }

    #[test]
    fn steane_qualified_characterization_over_all_subsets() {
        // T qualified ⇔ XOR constant on L0 and |T| odd
        let code = steane();
        let sets = code.qualified_sets().unwrap();
        for subset in 1usize..(1 << 7) {
            let positions: Vec<usize> = (1..=7).filter(|&p| subset >> (p - 1) & 1 == 1).collect();
            let c0 = code.l0()[0].parity_on(&positions);
            let const_on_l0 = code.l0().iter().all(|w| w.parity_on(&positions) == c0);
            let expected = const_on_l0 && positions.len() % 2 == 1;
            let reported = sets.iter().any(|s| s.positions == positions);
            assert_eq!(reported, expected, "mismatch at {positions:?}");
        }
    }

    #[test]
    fn reconstruct_bit_from_qualified_sets() {
        let mut rng = RandomSource::from_seed(21);
        for bit in [0u8, 1] {
            for positions in [vec![2, 4, 6], vec![1, 2, 3, 4, 5, 6, 7]] {
                for _ in 0..20 {
                    let mut registry = ShareRegistry::new(steane());
                    let id = registry.register_logical(bit).unwrap();
                    assert_eq!(registry.reconstruct_bit(id, &positions, &mut rng).unwrap(), bit);
                }
            }
        }
    }

    #[test]
    fn reconstruct_rejects_forbidden_sets() {
        let mut rng = RandomSource::from_seed(22);
        let mut registry = ShareRegistry::new(steane());
        let id = registry.register_logical(1).unwrap();
        assert_eq!(
            registry.reconstruct_bit(id, &[2, 4], &mut rng).unwrap_err(),
            CssError::NotQualified
        );
        assert_eq!(
            registry
                .reconstruct_bit(StateId(999), &[2, 4, 6], &mut rng)
                .unwrap_err(),
            CssError::UnknownState(StateId(999))
        );
    }

    #[test]
    fn forbidden_sets_leak_nothing() {
        // XOR-outcome distribution identical for both logical bits on every
        // non-qualified subset (spot checks; the full sweep is in the
        // acceptance suite)
        let code = steane();
        let zero = code.encode_logical(0).unwrap();
        let one = code.encode_logical(1).unwrap();
        for positions in [vec![2, 4], vec![1], vec![1, 2, 3], vec![3, 5, 6, 7]] {
            assert!(!code.is_qualified_set(&positions));
            let d0 = CssCode::xor_outcome_distribution(&zero, &positions).unwrap();
            let d1 = CssCode::xor_outcome_distribution(&one, &positions).unwrap();
            assert!((d0[0] - d1[0]).abs() < 1e-10 && (d0[1] - d1[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn consumed_state_is_gone() {
        let mut registry = ShareRegistry::new(steane());
        let id = registry.register_logical(0).unwrap();
        assert!(registry.contains(id));
        registry.remove(id).unwrap();
        assert!(!registry.contains(id));
    }
}
