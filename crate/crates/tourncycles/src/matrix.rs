//! Tournament matrices: real square matrices `A` with entries in `[0, 1]`
//! and `A + A^T = J`, so every diagonal entry is 1/2. These generalize
//! 0/1 adjacency matrices to fractional orientations (step kernels,
//! potential matrices, expectation matrices of random constructions).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PAIR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TournamentMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TournamentMatrix {
    /// Validates and wraps row-major entries.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("matrix order must be at least 1"));
        }
        if entries.len() != n * n {
            return Err(Error::param(format!(
                "expected {} entries for order {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        for (idx, &x) in entries.iter().enumerate() {
            if !x.is_finite() || !(-PAIR_TOL..=1.0 + PAIR_TOL).contains(&x) {
                return Err(Error::param(format!(
                    "entry ({}, {}) = {x} outside [0, 1]",
                    idx / n + 1,
                    idx % n + 1
                )));
            }
        }
        for i in 0..n {
            for j in i..n {
                let s = entries[i * n + j] + entries[j * n + i];
                if (s - 1.0).abs() > PAIR_TOL {
                    return Err(Error::param(format!(
                        "A[{0},{1}] + A[{1},{0}] = {s} != 1",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(TournamentMatrix { n, entries })
    }

    /// The order-`n` matrix with every entry 1/2.
    pub fn constant_half(n: usize) -> Result<Self> {
        TournamentMatrix::new(n, vec![0.5; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row_mean(&self, i: usize) -> f64 {
        self.entries[i * self.n..(i + 1) * self.n].iter().sum::<f64>() / self.n as f64
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_pair_sum() {
        let entries = vec![0.5, 1.0, 1.0, 0.5];
        assert!(TournamentMatrix::new(2, entries).is_err());
    }

    #[test]
    fn rejects_out_of_range_entry() {
        let entries = vec![0.5, 1.5, -0.5, 0.5];
        assert!(TournamentMatrix::new(2, entries).is_err());
    }

    #[test]
    fn accepts_fractional_matrix() {
        let entries = vec![0.5, 0.25, 0.75, 0.5];
        let m = TournamentMatrix::new(2, entries).unwrap();
        assert_eq!(m.get(0, 1), 0.25);
        assert_eq!(m.row_mean(0), 0.375);
    }
}
