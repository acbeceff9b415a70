//! Exact tournaments: a complete orientation of each vertex pair, stored
//! as packed bit rows (one machine word per 64 vertices per row).

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::TournamentMatrix;

/// A violation of the tournament invariants, reported against the raw
/// 0/1 adjacency data. Indices are 0-based internally; `Display` prints
/// them 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `adj[v][v] = 1`.
    SelfLoop { v: usize },
    /// Both `adj[i][j]` and `adj[j][i]` set.
    BothArcs { i: usize, j: usize },
    /// Neither direction of the pair is set.
    NoArc { i: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::SelfLoop { v } => write!(f, "loop at vertex {}", v + 1),
            Violation::BothArcs { i, j } => {
                write!(f, "pair ({}, {}) oriented both ways", i + 1, j + 1)
            }
            Violation::NoArc { i, j } => write!(f, "pair ({}, {}) unoriented", i + 1, j + 1),
        }
    }
}

/// An `n`-vertex tournament. `arc(i, j)` is true iff the pair is oriented
/// from `i` to `j`; exactly one of `arc(i, j)`, `arc(j, i)` holds for
/// every `i != j`.
#[derive(Clone, PartialEq, Eq)]
pub struct Tournament {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl fmt::Debug for Tournament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tournament(n={})", self.n)
    }
}

impl Tournament {
    /// Builds a tournament by orienting every pair: `forward(i, j)` with
    /// `i < j` decides whether the arc runs `i -> j` (true) or `j -> i`.
    pub fn from_orientation(n: usize, mut forward: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("tournament order must be at least 1"));
        }
        let words = n.div_ceil(64);
        let mut rows = vec![0u64; n * words];
        for i in 0..n {
            for j in (i + 1)..n {
                if forward(i, j) {
                    rows[i * words + j / 64] |= 1u64 << (j % 64);
                } else {
                    rows[j * words + i / 64] |= 1u64 << (i % 64);
                }
            }
        }
        Ok(Tournament { n, words, rows })
    }

    /// Wraps raw packed rows. Caller guarantees the invariants.
    pub(crate) fn from_rows_unchecked(n: usize, words: usize, rows: Vec<u64>) -> Self {
        debug_assert_eq!(rows.len(), n * words);
        Tournament { n, words, rows }
    }

    /// Validates raw 0/1 adjacency data given by `bit(i, j)` and returns
    /// every violation of the two invariants (empty iff valid).
    pub fn validate_raw(n: usize, bit: impl Fn(usize, usize) -> bool) -> Vec<Violation> {
        let mut violations = Vec::new();
        for i in 0..n {
            if bit(i, i) {
                violations.push(Violation::SelfLoop { v: i });
            }
            for j in (i + 1)..n {
                match (bit(i, j), bit(j, i)) {
                    (true, true) => violations.push(Violation::BothArcs { i, j }),
                    (false, false) => violations.push(Violation::NoArc { i, j }),
                    _ => {}
                }
            }
        }
        violations
    }

    /// Builds from raw adjacency data, rejecting invariant violations.
    pub fn from_raw(n: usize, bit: impl Fn(usize, usize) -> bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("tournament order must be at least 1"));
        }
        let violations = Self::validate_raw(n, &bit);
        if !violations.is_empty() {
            return Err(Error::InvalidTournament(violations));
        }
        Self::from_orientation(n, bit)
    }

    /// Re-checks the stored bits against the invariants.
    pub fn validate(&self) -> Vec<Violation> {
        Self::validate_raw(self.n, |i, j| self.arc(i, j))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    pub fn arc(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Packed out-neighbourhood of vertex `i`.
    pub(crate) fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Packed in-neighbourhoods (the transpose rows).
    pub(crate) fn in_rows(&self) -> Vec<u64> {
        let mut cols = vec![0u64; self.n * self.words];
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.arc(i, j) {
                    cols[j * self.words + i / 64] |= 1u64 << (i % 64);
                }
            }
        }
        cols
    }

    /// The tournament with every arc reversed.
    pub fn reverse(&self) -> Tournament {
        Tournament::from_orientation(self.n, |i, j| self.arc(j, i)).expect("n >= 1")
    }

    /// The analytic adjacency matrix: 0/1 off the diagonal, 1/2 on it.
    pub fn to_matrix(&self) -> TournamentMatrix {
        let n = self.n;
        let mut entries = vec![0.0f64; n * n];
        for i in 0..n {
            entries[i * n + i] = 0.5;
            for j in 0..n {
                if i != j && self.arc(i, j) {
                    entries[i * n + j] = 1.0;
                }
            }
        }
        TournamentMatrix::new(n, entries).expect("tournament matrix invariants hold by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cyclic_triangle() -> Tournament {
        // 0 -> 1 -> 2 -> 0
        Tournament::from_orientation(3, |i, j| (j + 3 - i) % 3 == 1).unwrap()
    }

    #[test]
    fn cyclic_triangle_is_valid() {
        assert!(cyclic_triangle().validate().is_empty());
    }

    #[test]
    fn validate_reports_double_orientation() {
        let v = Tournament::validate_raw(2, |_, _| true);
        assert!(v.contains(&Violation::SelfLoop { v: 0 }));
        assert!(v.contains(&Violation::BothArcs { i: 0, j: 1 }));
    }

    #[test]
    fn validate_reports_loop_and_missing_pair() {
        // adj[0][0] = 1 and nothing else set on a 2-vertex ground set.
        let v = Tournament::validate_raw(2, |i, j| i == 0 && j == 0);
        assert_eq!(
            v,
            vec![
                Violation::SelfLoop { v: 0 },
                Violation::NoArc { i: 0, j: 1 }
            ]
        );
        assert_eq!(v[0].to_string(), "loop at vertex 1");
        assert_eq!(v[1].to_string(), "pair (1, 2) unoriented");
    }

    #[test]
    fn zero_order_rejected() {
        assert!(Tournament::from_orientation(0, |_, _| true).is_err());
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn to_matrix_cyclic_triangle() {
        let m = cyclic_triangle().to_matrix();
        let want = [[0.5, 1.0, 0.0], [0.0, 0.5, 1.0], [1.0, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), want[i][j]);
            }
        }
    }

    #[test]
    fn to_matrix_transitive_pair_and_singleton() {
        let t = Tournament::from_orientation(2, |_, _| true).unwrap();
        let m = t.to_matrix();
        assert_eq!(
            [m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)],
            [0.5, 1.0, 0.0, 0.5]
        );
        let one = Tournament::from_orientation(1, |_, _| true).unwrap();
        assert_eq!(one.to_matrix().get(0, 0), 0.5);
    }

    #[test]
    fn reverse_is_involution() {
        let t = cyclic_triangle();
        assert_eq!(t.reverse().reverse(), t);
        assert!(t.reverse().arc(1, 0));
    }

    #[test]
    fn large_order_bit_rows() {
        let t = Tournament::from_orientation(130, |i, j| (i + j) % 2 == 0).unwrap();
        assert!(t.validate().is_empty());
        assert!(t.arc(0, 128));
        assert!(!t.arc(128, 0));
    }
}
