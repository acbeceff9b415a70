//! Tournament constructions, each deterministic given a seed.
//!
//! Random orientations are driven by index-addressed draws: the pair
//! `(i, j)`, `i < j`, consumes the draw at index `i * n + j` (see
//! [`crate::rng`]). Identical parameters and seed therefore give
//! bit-identical tournaments regardless of build order or thread count.

use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bounds::fuzzy_floor;
use crate::error::{Error, Result};
use crate::matrix::TournamentMatrix;
use crate::rng::{IndexedRng, Seed};
use crate::tournament::Tournament;

const RANGE_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Pair-probability driver
// ---------------------------------------------------------------------------

/// Orients every pair `(i, j)`, `i < j`, towards `j` with probability
/// `prob(i, j)`; probabilities 0 and 1 are exact.
fn orient_by_probability(
    n: usize,
    seed: Seed,
    prob: impl Fn(usize, usize) -> f64 + Sync,
) -> Result<Tournament> {
    if n == 0 {
        return Err(Error::param("order must be at least 1"));
    }
    let rng = IndexedRng::new(seed);
    let forward = |i: usize, j: usize| rng.unit(IndexedRng::pair_index(i, j, n)) < prob(i, j);
    #[cfg(feature = "parallel")]
    if n >= 256 {
        // Row-parallel build: each row recomputes the draws it shares
        // with earlier rows, which is cheap because draws are
        // index-addressed. Bitwise identical to the sequential path.
        let words = n.div_ceil(64);
        let mut rows = vec![0u64; n * words];
        rows.par_chunks_mut(words).enumerate().for_each(|(i, row)| {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let out = if i < j { forward(i, j) } else { !forward(j, i) };
                if out {
                    row[j / 64] |= 1u64 << (j % 64);
                }
            }
        });
        return Ok(Tournament::from_rows_unchecked(n, words, rows));
    }
    Tournament::from_orientation(n, forward)
}

fn check_unit_range(values: &[f64], name: &str, hi: f64) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < -RANGE_TOL || v > hi + RANGE_TOL {
            return Err(Error::param(format!(
                "{name}[{i}] = {v} outside [0, {hi}]"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Deterministic families
// ---------------------------------------------------------------------------

/// The transitive tournament: arc `i -> j` iff `i < j`.
pub fn transitive(n: usize) -> Result<Tournament> {
    if n == 0 {
        return Err(Error::param("order must be at least 1"));
    }
    Tournament::from_orientation(n, |_, _| true)
}

/// The circular family: for `i < j`, arc `i -> j` iff
/// `j - i <= floor((1 - xi) n)`, otherwise `j -> i`. `xi = 0` gives the
/// transitive tournament; `xi = 1/2` the circular one.
pub fn circular(xi: f64, n: usize) -> Result<Tournament> {
    if !(-RANGE_TOL..=0.5 + RANGE_TOL).contains(&xi) || !xi.is_finite() {
        return Err(Error::param(format!("xi = {xi} outside [0, 1/2]")));
    }
    if n == 0 {
        return Err(Error::param("order must be at least 1"));
    }
    let threshold = fuzzy_floor((1.0 - xi.clamp(0.0, 0.5)) * n as f64) as usize;
    Tournament::from_orientation(n, |i, j| j - i <= threshold)
}

// ---------------------------------------------------------------------------
// Random families
// ---------------------------------------------------------------------------

/// Every pair oriented by a fair coin.
pub fn uniform(n: usize, seed: Seed) -> Result<Tournament> {
    orient_by_probability(n, seed, |_, _| 0.5)
}

/// Single-threaded variant of [`uniform`].
pub fn uniform_seq(n: usize, seed: Seed) -> Result<Tournament> {
    if n == 0 {
        return Err(Error::param("order must be at least 1"));
    }
    let rng = IndexedRng::new(seed);
    Tournament::from_orientation(n, |i, j| rng.unit(IndexedRng::pair_index(i, j, n)) < 0.5)
}

/// Parameters of the random blow-up of a transitive tournament:
/// `floor(1/z)` parts of `floor(z n)` vertices plus one remainder part,
/// forward arcs between parts, fair coins inside parts.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupParams {
    pub z: f64,
    pub n: usize,
    pub seed: Seed,
}

impl BlowupParams {
    pub fn new(z: f64, n: usize, seed: Seed) -> Result<Self> {
        if !z.is_finite() || z <= 0.0 || z > 1.0 + RANGE_TOL {
            return Err(Error::param(format!("z = {z} outside (0, 1]")));
        }
        if n == 0 {
            return Err(Error::param("order must be at least 1"));
        }
        let p = BlowupParams { z: z.min(1.0), n, seed };
        let (q, s) = p.part_shape();
        if q * s > n {
            return Err(Error::param(format!(
                "n = {n} too small for {q} parts of {s} vertices"
            )));
        }
        Ok(p)
    }

    fn part_shape(&self) -> (usize, usize) {
        let q = fuzzy_floor(1.0 / self.z) as usize;
        let s = fuzzy_floor(self.z * self.n as f64) as usize;
        (q, s)
    }

    /// Sizes of all `floor(1/z) + 1` parts (the remainder part last,
    /// possibly empty).
    pub fn part_sizes(&self) -> Vec<usize> {
        let (q, s) = self.part_shape();
        let mut sizes = vec![s; q];
        sizes.push(self.n - q * s);
        sizes
    }

    /// Part index of a vertex: blocks of `floor(z n)` in vertex order,
    /// remainder last.
    fn part_of(&self, v: usize) -> usize {
        let (q, s) = self.part_shape();
        if s == 0 || v >= q * s {
            q
        } else {
            v / s
        }
    }
}

/// Random blow-up of a transitive tournament.
pub fn blowup(params: &BlowupParams) -> Tournament {
    let prob = |i: usize, j: usize| {
        let (pi, pj) = (params.part_of(i), params.part_of(j));
        if pi == pj {
            0.5
        } else if pi < pj {
            1.0
        } else {
            0.0
        }
    };
    orient_by_probability(params.n, params.seed, prob).expect("n validated")
}

/// The potential-family matrix `A[i][j] = 1/2 + z[i] - z[j]` for
/// `z` in `[0, 1/2]^n`.
pub fn potential_matrix(z: &[f64]) -> Result<TournamentMatrix> {
    check_unit_range(z, "z", 0.5)?;
    let n = z.len();
    if n == 0 {
        return Err(Error::param("z must be non-empty"));
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = (0.5 + z[i] - z[j]).clamp(0.0, 1.0);
        }
    }
    TournamentMatrix::new(n, entries)
}

/// Random tournament with pair `(i, j)`, `i < j`, oriented `i -> j`
/// with probability `1/2 + p[i] - p[j]`.
pub fn potential(p: &[f64], seed: Seed) -> Result<Tournament> {
    check_unit_range(p, "p", 0.5)?;
    orient_by_probability(p.len(), seed, |i, j| 0.5 + p[i] - p[j])
}

/// Sample of order `n` from a tournament matrix: vertex `v` belongs to
/// class `v mod A.n()` (round-robin keeps class sizes balanced) and each
/// pair is oriented with the corresponding entry probability; pairs
/// inside a class use the 1/2 diagonal.
pub fn wrandom(a: &TournamentMatrix, n: usize, seed: Seed) -> Result<Tournament> {
    let k = a.n();
    orient_by_probability(n, seed, |i, j| a.get(i % k, j % k))
}

/// Parameters of the mixed `(k+1)`-part construction: part `i` holds the
/// remainder `n - k floor(z n)` vertices and every other part
/// `floor(z n)`; arcs between parts other than the adjacent pair
/// `{i, i_prime}` run forward; parts outside that pair are oriented by
/// fair coins internally; every pair inside `V_i (union) V_i'` is
/// oriented by the potentials `p` (`v -> v'` with probability
/// `1/2 + p_v - p_v'`).
#[derive(Debug, Clone, Serialize)]
pub struct MixedParams {
    pub k: usize,
    pub z: f64,
    /// 1-based index of the variable-size part, in `[1, k+1]`.
    pub i: usize,
    /// 1-based index of the adjacent potential part, `|i - i_prime| = 1`.
    pub i_prime: usize,
    /// Potentials for the vertices of `V_i (union) V_i'` in ascending
    /// vertex order.
    pub p: Vec<f64>,
    pub n: usize,
    pub seed: Seed,
}

impl MixedParams {
    pub fn new(
        k: usize,
        z: f64,
        i: usize,
        i_prime: usize,
        p: Vec<f64>,
        n: usize,
        seed: Seed,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        let lo = 1.0 / (k as f64 + 1.0);
        let hi = 1.0 / k as f64;
        if !z.is_finite() || z < lo - RANGE_TOL || z > hi + RANGE_TOL {
            return Err(Error::param(format!(
                "z = {z} outside [1/(k+1), 1/k] = [{lo}, {hi}]"
            )));
        }
        if !(1..=k + 1).contains(&i) || !(1..=k + 1).contains(&i_prime) || i.abs_diff(i_prime) != 1 {
            return Err(Error::param(format!(
                "part indices ({i}, {i_prime}) must lie in [1, {}] and be adjacent",
                k + 1
            )));
        }
        check_unit_range(&p, "p", 0.5)?;
        if n == 0 {
            return Err(Error::param("order must be at least 1"));
        }
        let params = MixedParams { k, z: z.clamp(lo, hi), i, i_prime, p, n, seed };
        let sizes = params.part_sizes()?;
        let union = sizes[i - 1] + sizes[i_prime - 1];
        if params.p.len() != union {
            return Err(Error::param(format!(
                "p has {} entries but V_i and V_i' hold {union} vertices",
                params.p.len()
            )));
        }
        Ok(params)
    }

    /// Sizes of the `k + 1` parts in part order.
    pub fn part_sizes(&self) -> Result<Vec<usize>> {
        let s = fuzzy_floor(self.z * self.n as f64) as usize;
        let total_small = self.k * s;
        if total_small > self.n {
            return Err(Error::param(format!(
                "n = {} too small for {} parts of {s} vertices",
                self.n, self.k
            )));
        }
        let mut sizes = vec![s; self.k + 1];
        sizes[self.i - 1] = self.n - total_small;
        Ok(sizes)
    }
}

/// Mixed extremal construction over `k + 1` parts.
pub fn mixed(params: &MixedParams) -> Result<Tournament> {
    let sizes = params.part_sizes()?;
    let n = params.n;
    // vertex -> (part, potential index if in the union)
    let mut part = vec![0usize; n];
    let mut pot = vec![usize::MAX; n];
    let mut v = 0usize;
    for (pi, &sz) in sizes.iter().enumerate() {
        for _ in 0..sz {
            part[v] = pi + 1;
            v += 1;
        }
    }
    let mut next = 0usize;
    for u in 0..n {
        if part[u] == params.i || part[u] == params.i_prime {
            pot[u] = next;
            next += 1;
        }
    }
    let p = &params.p;
    let prob = |a: usize, b: usize| {
        let in_union = pot[a] != usize::MAX && pot[b] != usize::MAX;
        if in_union {
            0.5 + p[pot[a]] - p[pot[b]]
        } else if part[a] == part[b] {
            0.5
        } else if part[a] < part[b] {
            1.0
        } else {
            0.0
        }
    };
    orient_by_probability(n, params.seed, prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count;

    #[test]
    fn transitive_has_no_cycles() {
        let t = transitive(4).unwrap();
        assert!(t.arc(0, 1) && t.arc(0, 3) && t.arc(1, 2));
        assert_eq!(count::cycle_homs(&t, 3).unwrap(), 0);
        assert_eq!(count::cycle_homs(&t, 4).unwrap(), 0);
        assert!(transitive(0).is_err());
        assert_eq!(transitive(1).unwrap().n(), 1);
    }

    #[test]
    fn uniform_is_deterministic() {
        let a = uniform(5, Seed(1)).unwrap();
        let b = uniform(5, Seed(1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, uniform(5, Seed(2)).unwrap());
        assert!(a.validate().is_empty());
    }

    #[test]
    #[cfg(feature = "parallel")]
    fn parallel_row_build_matches_sequential() {
        // 256 is the row-parallel threshold; check both sides of it.
        for n in [255, 256, 400] {
            let a = uniform(n, Seed(9)).unwrap();
            let b = uniform_seq(n, Seed(9)).unwrap();
            assert_eq!(a, b, "n = {n}");
        }
    }

    #[test]
    fn blowup_part_structure() {
        let p = BlowupParams::new(0.5, 9, Seed(3)).unwrap();
        assert_eq!(p.part_sizes(), vec![4, 4, 1]);
        let t = blowup(&p);
        assert!(t.validate().is_empty());
        // Between-part arcs are exactly forward.
        for i in 0..4 {
            for j in 4..9 {
                assert!(t.arc(i, j));
            }
        }
        // Integer z^-1 and zn leave the remainder empty.
        let p = BlowupParams::new(1.0 / 3.0, 9, Seed(3)).unwrap();
        assert_eq!(p.part_sizes(), vec![3, 3, 3, 0]);
    }

    #[test]
    fn blowup_z_one_equals_uniform() {
        let p = BlowupParams::new(1.0, 40, Seed(11)).unwrap();
        assert_eq!(blowup(&p), uniform(40, Seed(11)).unwrap());
    }

    #[test]
    fn blowup_tiny_parts() {
        // floor(z n) = 0 collapses everything into the remainder part.
        let p = BlowupParams::new(0.01, 5, Seed(2)).unwrap();
        assert_eq!(p.part_sizes().last(), Some(&5));
        assert_eq!(blowup(&p), uniform(5, Seed(2)).unwrap());
    }

    #[test]
    fn circular_family() {
        assert_eq!(circular(0.0, 50).unwrap(), transitive(50).unwrap());
        let t = circular(0.5, 5).unwrap();
        // Every vertex beats the next floor(n/2) vertices cyclically.
        for i in 0..5 {
            assert_eq!(t.out_degree(i), 2);
            assert!(t.arc(i, (i + 1) % 5) && t.arc(i, (i + 2) % 5));
        }
        assert!(circular(0.6, 5).is_err());
        assert!(circular(-0.1, 5).is_err());
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn potential_matrix_frozen() {
        let m = potential_matrix(&[0.0, 0.25, 0.5]).unwrap();
        let want = [[0.5, 0.25, 0.0], [0.75, 0.5, 0.25], [1.0, 0.75, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((m.get(i, j) - want[i][j]).abs() < 1e-15);
            }
        }
        let flat = potential_matrix(&[0.3, 0.3]).unwrap();
        assert_eq!(flat.get(0, 1), 0.5);
        let edge = potential_matrix(&[0.0, 0.5]).unwrap();
        assert_eq!((edge.get(0, 1), edge.get(1, 0)), (0.0, 1.0));
        assert!(potential_matrix(&[0.6]).is_err());
    }

    #[test]
    fn potential_extremes_are_deterministic_arcs() {
        // p = (0, 1/2): the pair points 1 -> 0 with probability 1.
        let t = potential(&[0.0, 0.5], Seed(5)).unwrap();
        assert!(t.arc(1, 0));
        let t = potential(&[0.5, 0.0], Seed(5)).unwrap();
        assert!(t.arc(0, 1));
    }

    #[test]
    fn wrandom_equivalences() {
        // Potential matrix sampled at N = n reproduces the potential
        // generator bit for bit.
        let z = [0.1, 0.4, 0.25, 0.0];
        let a = potential_matrix(&z).unwrap();
        assert_eq!(
            wrandom(&a, 4, Seed(21)).unwrap(),
            potential(&z, Seed(21)).unwrap()
        );
        // An order-1 matrix is the fair coin.
        let half = TournamentMatrix::constant_half(1).unwrap();
        assert_eq!(
            wrandom(&half, 30, Seed(8)).unwrap(),
            uniform(30, Seed(8)).unwrap()
        );
    }

    #[test]
    fn mixed_reduces_to_potential_when_k_is_one() {
        let p: Vec<f64> = (0..10).map(|i| i as f64 * 0.05).collect();
        let params = MixedParams::new(1, 0.6, 1, 2, p.clone(), 10, Seed(4)).unwrap();
        assert_eq!(mixed(&params).unwrap(), potential(&p, Seed(4)).unwrap());
    }

    #[test]
    fn mixed_with_split_potentials_is_the_blowup() {
        // p = 1/2 on V_i, 0 on V_i' orients the cross pairs of the union
        // forward, so the construction coincides with the plain blow-up,
        // bit for bit (all pair probabilities and draw indices agree).
        let n = 12;
        let mut p = vec![0.5; 4];
        p.extend(vec![0.0; 4]);
        let m = MixedParams::new(2, 1.0 / 3.0, 1, 2, p, n, Seed(17)).unwrap();
        assert_eq!(m.part_sizes().unwrap(), vec![4, 4, 4]);
        let t = mixed(&m).unwrap();
        assert!(t.validate().is_empty());
        let b = blowup(&BlowupParams::new(1.0 / 3.0, n, Seed(17)).unwrap());
        assert_eq!(t, b);
    }

    #[test]
    fn mixed_validates_parameters() {
        assert!(MixedParams::new(0, 0.5, 1, 2, vec![], 5, Seed(0)).is_err());
        assert!(MixedParams::new(2, 0.6, 1, 2, vec![], 9, Seed(0)).is_err());
        assert!(MixedParams::new(2, 0.4, 1, 3, vec![], 9, Seed(0)).is_err());
        // Wrong potential vector length.
        assert!(MixedParams::new(2, 1.0 / 3.0, 1, 2, vec![0.0; 2], 9, Seed(0)).is_err());
    }

    #[test]
    fn mixed_merged_parts_behave_like_wider_blowup() {
        // p = 0 merges V_i and V_i' into one random part: cross pairs of
        // the union are coin flips, not forced forward.
        let n = 12;
        let m = MixedParams::new(2, 1.0 / 3.0, 2, 1, vec![0.0; 8], n, Seed(30)).unwrap();
        assert_eq!(m.part_sizes().unwrap(), vec![4, 4, 4]);
        let t = mixed(&m).unwrap();
        let mut forward = 0;
        for i in 0..4 {
            for j in 4..8 {
                if t.arc(i, j) {
                    forward += 1;
                }
            }
        }
        assert!(forward > 0 && forward < 16, "forward = {forward}");
    }
}
