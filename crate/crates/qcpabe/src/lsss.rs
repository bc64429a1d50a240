//! Linear secret sharing over Z_p: compiling threshold trees into a
//! share-generating matrix by iterative row insertion, share generation,
//! and linear reconstruction.
//!
//! The insertion step expands the first row still labelled by a threshold
//! node `t of k`: it appends t−1 fresh zero columns to every row and
//! replaces the expanded row, whose vector is v, with k rows where child i
//! receives (v, i, i², …, i^{t−1}). Expansion is top-down and leftmost
//! first, so row order follows the leaf order of the formula.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::policy::{AttributeId, PolicyNode};
use crate::rng::RandomSource;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LsssError {
    #[error("attribute set is not qualified for this matrix")]
    NotQualified,
    #[error("share for matrix row {0} is missing")]
    MissingShare(usize),
    #[error("threshold {t} must be smaller than the field modulus {p}")]
    ThresholdTooLarge { t: usize, p: u64 },
    #[error("secret {secret} is not a residue modulo {p}")]
    SecretOutOfRange { secret: u64, p: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {p} does not exceed 2^{m}")]
    ModulusTooSmall { p: u64, m: u32 },
}

/// Prime modulus sized to embed an m-bit secret injectively (p > 2^m).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldPrime {
    p: u64,
    m: u32,
}

impl FieldPrime {
    /// Smallest prime exceeding 2^m.
    pub fn for_bits(m: u32) -> FieldPrime {
        assert!(m >= 1 && m <= 32, "supported security parameters are 1..=32");
        let mut candidate = (1u64 << m) + 1;
        while !is_prime(candidate) {
            candidate += 1;
        }
        FieldPrime { p: candidate, m }
    }

    /// Uses an explicit modulus, verifying primality and the 2^m bound.
    pub fn new(p: u64, m: u32) -> Result<FieldPrime, LsssError> {
        if !is_prime(p) {
            return Err(LsssError::NotPrime(p));
        }
        if m >= 64 || p <= (1u64 << m) {
            return Err(LsssError::ModulusTooSmall { p, m });
        }
        Ok(FieldPrime { p, m })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b % self.p) % self.p
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat's little theorem; `a` must be nonzero.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.p != 0, "zero has no inverse");
        self.pow(a, self.p - 2)
    }

    /// The canonical residue of a possibly negative integer.
    pub fn embed_signed(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    pub fn sample(&self, rng: &mut RandomSource) -> u64 {
        rng.gen_range(self.p)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// One row's share: the value `(W·v)_i` labelled with its attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Share {
    pub attr: AttributeId,
    /// 0-based row of the share matrix that produced this value.
    pub row: usize,
    pub value: u64,
}

/// Coefficients solving c·W′ = (1, 0, …, 0) for a selected row set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructionVector {
    /// (matrix row, coefficient) pairs in row order.
    pub entries: Vec<(usize, u64)>,
}

/// The compiled share-generating matrix W with its row labelling ρ.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareMatrix {
    rows: Vec<Vec<u64>>,
    labels: Vec<AttributeId>,
    prime: FieldPrime,
}

/// Compiles a policy tree into its LSSS matrix over the given field.
pub fn build_lsss(policy: &PolicyNode, prime: FieldPrime) -> Result<ShareMatrix, LsssError> {
    let max_t = policy.max_threshold();
    if max_t as u64 >= prime.p() {
        return Err(LsssError::ThresholdTooLarge {
            t: max_t,
            p: prime.p(),
        });
    }

    // rows still carrying a threshold label await expansion
    let mut rows: Vec<(Vec<u64>, &PolicyNode)> = vec![(vec![1], policy)];
    loop {
        let Some(target) = rows.iter().position(|(_, node)| !matches!(node, PolicyNode::Leaf(_)))
        else {
            break;
        };
        let (vector, node) = rows[target].clone();
        let PolicyNode::Threshold { t, children } = node else {
            unreachable!("target row is not a leaf");
        };
        let old_cols = vector.len();
        for (row, _) in rows.iter_mut() {
            row.resize(old_cols + t - 1, 0);
        }
        let replacements: Vec<(Vec<u64>, &PolicyNode)> = children
            .iter()
            .enumerate()
            .map(|(child_index, child)| {
                let i = child_index as u64 + 1;
                let mut row = vector.clone();
                row.resize(old_cols + t - 1, 0);
                for (j, slot) in row[old_cols..].iter_mut().enumerate() {
                    *slot = prime.pow(i, j as u64 + 1);
                }
                (row, child)
            })
            .collect();
        rows.splice(target..=target, replacements);
    }

    let labels = rows
        .iter()
        .map(|(_, node)| match node {
            PolicyNode::Leaf(attr) => attr.clone(),
            _ => unreachable!(),
        })
        .collect();
    Ok(ShareMatrix {
        rows: rows.into_iter().map(|(row, _)| row).collect(),
        labels,
        prime,
    })
}

impl ShareMatrix {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn label(&self, row: usize) -> &AttributeId {
        &self.labels[row]
    }

    pub fn labels(&self) -> &[AttributeId] {
        &self.labels
    }

    pub fn prime(&self) -> FieldPrime {
        self.prime
    }

    /// Shares from an explicit vector v = (secret, r_2, …, r_d).
    pub fn shares_from_vector(&self, v: &[u64]) -> Vec<Share> {
        assert_eq!(v.len(), self.num_cols(), "vector length must match columns");
        self.rows
            .iter()
            .enumerate()
            .map(|(row, coeffs)| {
                let value = coeffs
                    .iter()
                    .zip(v)
                    .fold(0u64, |acc, (&w, &x)| self.prime.add(acc, self.prime.mul(w, x)));
                Share {
                    attr: self.labels[row].clone(),
                    row,
                    value,
                }
            })
            .collect()
    }

    /// Shares of `secret` with fresh uniform randomness for r_2..r_d.
    pub fn generate_shares(
        &self,
        secret: u64,
        rng: &mut RandomSource,
    ) -> Result<Vec<Share>, LsssError> {
        if secret >= self.prime.p() {
            return Err(LsssError::SecretOutOfRange {
                secret,
                p: self.prime.p(),
            });
        }
        let mut v = vec![secret];
        v.extend((1..self.num_cols()).map(|_| self.prime.sample(rng)));
        Ok(self.shares_from_vector(&v))
    }

    /// Solves c·W′ = (1, 0, …, 0) where W′ keeps the rows labelled by
    /// `attrs`. Returns `NotQualified` when no solution exists, which is
    /// exactly the forbidden-set case.
    pub fn reconstruction_vector(
        &self,
        attrs: &BTreeSet<AttributeId>,
    ) -> Result<ReconstructionVector, LsssError> {
        let selected: Vec<usize> = (0..self.num_rows())
            .filter(|&r| attrs.contains(&self.labels[r]))
            .collect();
        if selected.is_empty() {
            return Err(LsssError::NotQualified);
        }
        // unknowns are the coefficients; equations run over matrix columns
        let cols = self.num_cols();
        let mut system: Vec<Vec<u64>> = (0..cols)
            .map(|c| selected.iter().map(|&r| self.rows[r][c]).collect())
            .collect();
        let mut rhs: Vec<u64> = (0..cols).map(|c| u64::from(c == 0)).collect();
        let solution =
            solve_linear_system(&mut system, &mut rhs, self.prime).ok_or(LsssError::NotQualified)?;
        Ok(ReconstructionVector {
            entries: selected.into_iter().zip(solution).collect(),
        })
    }

    /// Σ cᵢ·λᵢ over the rows named by the coefficient vector.
    pub fn reconstruct_secret(
        &self,
        shares: &[Share],
        coeffs: &ReconstructionVector,
    ) -> Result<u64, LsssError> {
        let mut acc = 0u64;
        for &(row, c) in &coeffs.entries {
            let share = shares
                .iter()
                .find(|s| s.row == row)
                .ok_or(LsssError::MissingShare(row))?;
            acc = self.prime.add(acc, self.prime.mul(c, share.value));
        }
        Ok(acc)
    }

    /// Canonical structured-text form: dimensions, modulus, then one labelled
    /// row per line.
    pub fn to_canonical_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "lsss v1");
        let _ = writeln!(out, "rows {}", self.num_rows());
        let _ = writeln!(out, "cols {}", self.num_cols());
        let _ = writeln!(out, "modulus {}", self.prime.p());
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "row {} {}", label, cells.join(" "));
        }
        out
    }
}

/// Gauss-Jordan elimination over Z_p. `system` is a rows×unknowns matrix;
/// returns a particular solution (free unknowns set to zero) or `None` when
/// the system is inconsistent.
fn solve_linear_system(
    system: &mut [Vec<u64>],
    rhs: &mut [u64],
    prime: FieldPrime,
) -> Option<Vec<u64>> {
    let num_rows = system.len();
    let num_unknowns = system.first().map(|r| r.len()).unwrap_or(0);
    let mut pivot_of_unknown = vec![None; num_unknowns];
    let mut next_pivot_row = 0;
    for unknown in 0..num_unknowns {
        let Some(found) = (next_pivot_row..num_rows).find(|&r| system[r][unknown] != 0) else {
            continue;
        };
        system.swap(next_pivot_row, found);
        rhs.swap(next_pivot_row, found);
        let inv = prime.inv(system[next_pivot_row][unknown]);
        for v in system[next_pivot_row].iter_mut() {
            *v = prime.mul(*v, inv);
        }
        rhs[next_pivot_row] = prime.mul(rhs[next_pivot_row], inv);
        for r in 0..num_rows {
            if r != next_pivot_row && system[r][unknown] != 0 {
                let factor = system[r][unknown];
                let pivot_row = system[next_pivot_row].clone();
                for (v, pv) in system[r].iter_mut().zip(&pivot_row) {
                    *v = prime.sub(*v, prime.mul(factor, *pv));
                }
                rhs[r] = prime.sub(rhs[r], prime.mul(factor, rhs[next_pivot_row]));
            }
        }
        pivot_of_unknown[unknown] = Some(next_pivot_row);
        next_pivot_row += 1;
        if next_pivot_row == num_rows {
            break;
        }
    }
    // a zero row with a nonzero right-hand side has no solution
    for r in 0..num_rows {
        if rhs[r] != 0 && system[r].iter().all(|&v| v == 0) {
            return None;
        }
    }
    Some(
        pivot_of_unknown
            .iter()
            .map(|pivot| pivot.map(|r| rhs[r]).unwrap_or(0))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::parse_policy;

    fn attrs(names: &[&str]) -> BTreeSet<AttributeId> {
        names.iter().map(|n| AttributeId::new(n).unwrap()).collect()
    }

    fn p257() -> FieldPrime {
        FieldPrime::for_bits(8)
    }

    #[test]
    fn smallest_primes_above_powers_of_two() {
        assert_eq!(FieldPrime::for_bits(8).p(), 257);
        assert_eq!(FieldPrime::for_bits(16).p(), 65537);
        assert_eq!(FieldPrime::for_bits(24).p(), 16777259);
        assert_eq!(FieldPrime::for_bits(32).p(), 4294967311);
    }

    #[test]
    fn explicit_modulus_is_checked() {
        assert!(FieldPrime::new(257, 8).is_ok());
        assert_eq!(FieldPrime::new(256, 8).unwrap_err(), LsssError::NotPrime(256));
        assert_eq!(
            FieldPrime::new(251, 8).unwrap_err(),
            LsssError::ModulusTooSmall { p: 251, m: 8 }
        );
    }

    #[test]
    fn field_arithmetic() {
        let f = p257();
        assert_eq!(f.sub(3, 5), 255);
        assert_eq!(f.mul(16, 16), 256);
        for a in [1u64, 2, 100, 256] {
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
        assert_eq!(f.embed_signed(-2), 255);
        assert_eq!(f.embed_signed(-1), 256);
    }

    #[test]
    fn running_example_matrix() {
        // ((A & B) | (C & D)) & E compiles to the 5×4 matrix with labels
        // A, B, C, D, E
        let policy = parse_policy("((A & B) | (C & D)) & E").unwrap();
        let mat = build_lsss(&policy, p257()).unwrap();
        let expected: Vec<Vec<u64>> = vec![
            vec![1, 1, 1, 0],
            vec![1, 1, 2, 0],
            vec![1, 1, 0, 1],
            vec![1, 1, 0, 2],
            vec![1, 2, 0, 0],
        ];
        assert_eq!(mat.rows(), expected.as_slice());
        let labels: Vec<&str> = mat.labels().iter().map(|a| a.as_str()).collect();
        assert_eq!(labels, vec!["A", "B", "C", "D", "E"]);
    }

    #[test]
    fn single_leaf_matrix() {
        let mat = build_lsss(&parse_policy("A").unwrap(), p257()).unwrap();
        assert_eq!(mat.rows(), &[vec![1]]);
        assert_eq!(mat.label(0).as_str(), "A");
    }

    #[test]
    fn two_of_three_is_shamir() {
        let mat = build_lsss(&parse_policy("2 of (A,B,C)").unwrap(), p257()).unwrap();
        assert_eq!(mat.rows(), &[vec![1, 1], vec![1, 2], vec![1, 3]]);
        // any two rows reconstruct, any single row does not
        for pair in [["A", "B"], ["A", "C"], ["B", "C"]] {
            assert!(mat.reconstruction_vector(&attrs(&pair)).is_ok());
        }
        for single in ["A", "B", "C"] {
            assert_eq!(
                mat.reconstruction_vector(&attrs(&[single])).unwrap_err(),
                LsssError::NotQualified
            );
        }
        // λ_i = s + i·r mod p
        let f = p257();
        let shares = mat.shares_from_vector(&[7, 11]);
        for (i, share) in shares.iter().enumerate() {
            assert_eq!(share.value, f.add(7, f.mul(i as u64 + 1, 11)));
        }
    }

    #[test]
    fn matrix_shape_matches_formula_size() {
        // rows = leaf occurrences, cols = 1 + Σ(t−1)
        for (text, rows, cols) in [
            ("((A & B) | (C & D)) & E", 5, 4),
            ("A", 1, 1),
            ("2 of (A,B,C)", 3, 2),
            ("A & B & C", 3, 3),
            ("A | B | C", 3, 1),
            ("3 of (A, B & C, D | E, F)", 6, 4),
        ] {
            let mat = build_lsss(&parse_policy(text).unwrap(), p257()).unwrap();
            assert_eq!((mat.num_rows(), mat.num_cols()), (rows, cols), "{text}");
        }
    }

    #[test]
    fn symbolic_share_values_match_the_example() {
        // v = (s, r1, r2, r3)
        let f = p257();
        let policy = parse_policy("((A & B) | (C & D)) & E").unwrap();
        let mat = build_lsss(&policy, f).unwrap();
        let (s, r1, r2, r3) = (99u64, 3u64, 17u64, 200u64);
        let shares = mat.shares_from_vector(&[s, r1, r2, r3]);
        let lambda: Vec<u64> = shares.iter().map(|sh| sh.value).collect();
        assert_eq!(lambda[0], f.add(f.add(s, r1), r2)); // λ_A = s + r1 + r2
        assert_eq!(lambda[1], f.add(f.add(s, r1), f.mul(2, r2))); // λ_B = s + r1 + 2r2
        assert_eq!(lambda[2], f.add(f.add(s, r1), r3)); // λ_C = s + r1 + r3
        assert_eq!(lambda[3], f.add(f.add(s, r1), f.mul(2, r3))); // λ_D = s + r1 + 2r3
        assert_eq!(lambda[4], f.add(s, f.mul(2, r1))); // λ_E = s + 2r1
    }

    #[test]
    fn reconstruction_coefficients_for_abe() {
        let f = p257();
        let policy = parse_policy("((A & B) | (C & D)) & E").unwrap();
        let mat = build_lsss(&policy, f).unwrap();
        let rec = mat.reconstruction_vector(&attrs(&["A", "B", "E"])).unwrap();
        let coeffs: Vec<u64> = rec.entries.iter().map(|&(_, c)| c).collect();
        assert_eq!(
            coeffs,
            vec![4, f.embed_signed(-2), f.embed_signed(-1)],
            "coefficients must be (4, −2, −1) mod p"
        );
    }

    #[test]
    fn forbidden_pair_has_no_solution_by_exhaustion() {
        // independent oracle: try every coefficient pair in Z_257²
        let f = p257();
        let policy = parse_policy("((A & B) | (C & D)) & E").unwrap();
        let mat = build_lsss(&policy, f).unwrap();
        let w_a = &mat.rows()[0];
        let w_c = &mat.rows()[2];
        let mut found = false;
        'outer: for c1 in 0..f.p() {
            for c2 in 0..f.p() {
                let combo: Vec<u64> = w_a
                    .iter()
                    .zip(w_c)
                    .map(|(&a, &c)| f.add(f.mul(c1, a), f.mul(c2, c)))
                    .collect();
                if combo == [1, 0, 0, 0] {
                    found = true;
                    break 'outer;
                }
            }
        }
        assert!(!found, "exhaustion must find no solution for {{A,C}}");
        assert_eq!(
            mat.reconstruction_vector(&attrs(&["A", "C"])).unwrap_err(),
            LsssError::NotQualified
        );
    }

    #[test]
    fn full_attribute_set_reconstructs() {
        let policy = parse_policy("((A & B) | (C & D)) & E").unwrap();
        let mat = build_lsss(&policy, p257()).unwrap();
        assert!(mat
            .reconstruction_vector(&attrs(&["A", "B", "C", "D", "E"]))
            .is_ok());
    }

    #[test]
    fn end_to_end_round_trip() {
        let mut rng = RandomSource::from_seed(31);
        let f = p257();
        let policy = parse_policy("((A & B) | (C & D)) & E").unwrap();
        let mat = build_lsss(&policy, f).unwrap();
        for secret in [0u64, 1, 130, 256] {
            let shares = mat.generate_shares(secret, &mut rng).unwrap();
            for qualified in [["A", "B", "E"], ["C", "D", "E"]] {
                let rec = mat.reconstruction_vector(&attrs(&qualified)).unwrap();
                assert_eq!(mat.reconstruct_secret(&shares, &rec).unwrap(), secret);
            }
        }
    }

    #[test]
    fn single_attribute_share_is_the_secret() {
        let mut rng = RandomSource::from_seed(5);
        let mat = build_lsss(&parse_policy("A").unwrap(), p257()).unwrap();
        let shares = mat.generate_shares(42, &mut rng).unwrap();
        assert_eq!(shares[0].value, 42);
        let rec = mat.reconstruction_vector(&attrs(&["A"])).unwrap();
        assert_eq!(mat.reconstruct_secret(&shares, &rec).unwrap(), 42);
    }

    #[test]
    fn shares_are_linear_in_the_secret() {
        let f = p257();
        let mat = build_lsss(&parse_policy("((A & B) | (C & D)) & E").unwrap(), f).unwrap();
        let v1 = [10u64, 20, 30, 40];
        let v2 = [5u64, 250, 100, 7];
        let sum: Vec<u64> = v1.iter().zip(&v2).map(|(&a, &b)| f.add(a, b)).collect();
        let s1 = mat.shares_from_vector(&v1);
        let s2 = mat.shares_from_vector(&v2);
        let s12 = mat.shares_from_vector(&sum);
        for ((a, b), c) in s1.iter().zip(&s2).zip(&s12) {
            assert_eq!(f.add(a.value, b.value), c.value);
        }
    }

    #[test]
    fn reconstruct_reports_missing_shares() {
        let mut rng = RandomSource::from_seed(6);
        let mat = build_lsss(&parse_policy("A & B").unwrap(), p257()).unwrap();
        let shares = mat.generate_shares(9, &mut rng).unwrap();
        let rec = mat.reconstruction_vector(&attrs(&["A", "B"])).unwrap();
        assert_eq!(
            mat.reconstruct_secret(&shares[..1], &rec).unwrap_err(),
            LsssError::MissingShare(1)
        );
    }

    #[test]
    fn secret_must_be_a_residue() {
        let mut rng = RandomSource::from_seed(7);
        let mat = build_lsss(&parse_policy("A").unwrap(), p257()).unwrap();
        assert_eq!(
            mat.generate_shares(257, &mut rng).unwrap_err(),
            LsssError::SecretOutOfRange { secret: 257, p: 257 }
        );
    }

    #[test]
    fn canonical_text_layout() {
        let mat = build_lsss(&parse_policy("A & B").unwrap(), p257()).unwrap();
        assert_eq!(
            mat.to_canonical_text(),
            "lsss v1\nrows 2\ncols 2\nmodulus 257\nrow A 1 1\nrow B 1 2\n"
        );
    }
}
