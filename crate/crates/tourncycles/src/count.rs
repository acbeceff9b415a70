//! Exact homomorphism counting, trace densities and the exhaustive
//! small-order enumeration.
//!
//! For cycles of length 3, 4 and 5 every homomorphism into a tournament
//! is injective, so the count equals `Tr M^l` for the 0/1 adjacency
//! matrix `M` with zero diagonal. Counts are computed in integers with
//! bit-parallel neighbourhood intersections; densities are formed from
//! the integers at the last step.
//!
//! With `A = M + I/2` the binomial expansion of `Tr A^l` (using
//! `Tr M = Tr M^2 = 0`) gives the exact bridges
//!
//! ```text
//! sigma3(A) = t3 + 1/(8 n^2)
//! sigma4(A) = t4 + 2 t3 / n + 1/(16 n^3)
//! ```
//!
//! which this module uses to derive trace densities from exact counts.

use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bounds;
use crate::error::{Error, Result};
use crate::matrix::TournamentMatrix;
use crate::tournament::Tournament;
use crate::trn;

/// Hard guard for the exhaustive enumeration (2^21 tournaments at n = 7).
const ENUM_GUARD: u32 = 7;

// ---------------------------------------------------------------------------
// Cycle homomorphism counts
// ---------------------------------------------------------------------------

/// Number of homomorphisms of the directed `ell`-cycle into `t`, for
/// `ell` in {3, 4, 5}. Equals `ell` times the number of directed
/// `ell`-cycles.
pub fn cycle_homs(t: &Tournament, ell: usize) -> Result<u64> {
    cycle_homs_impl(t, ell, cfg!(feature = "parallel"))
}

/// Single-threaded variant of [`cycle_homs`].
pub fn cycle_homs_seq(t: &Tournament, ell: usize) -> Result<u64> {
    cycle_homs_impl(t, ell, false)
}

fn cycle_homs_impl(t: &Tournament, ell: usize, par: bool) -> Result<u64> {
    match ell {
        3 => Ok(homs3(t, par)),
        4 => Ok(homs4(t, par)),
        5 => homs5(t, par),
        _ => Err(Error::param(format!("cycle length {ell} not in {{3, 4, 5}}"))),
    }
}

fn and_popcount(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

fn for_each_set_bit(words: &[u64], n: usize, mut f: impl FnMut(usize)) {
    for (w, &word) in words.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let j = w * 64 + bits.trailing_zeros() as usize;
            if j < n {
                f(j);
            }
            bits &= bits - 1;
        }
    }
}

fn homs3(t: &Tournament, par: bool) -> u64 {
    let n = t.n();
    let cols = t.in_rows();
    let words = t.words();
    let row_term = |i: usize| -> u64 {
        let mut acc = 0u64;
        let in_i = &cols[i * words..(i + 1) * words];
        for_each_set_bit(t.row(i), n, |j| {
            acc += and_popcount(t.row(j), in_i) as u64;
        });
        acc
    };
    #[cfg(feature = "parallel")]
    if par {
        return (0..n).into_par_iter().map(row_term).sum();
    }
    let _ = par;
    (0..n).map(row_term).sum()
}

/// Dense `M^2` as u32 counts, row-major.
fn square_counts(t: &Tournament, par: bool) -> Vec<u32> {
    let n = t.n();
    let words = t.words();
    let cols = t.in_rows();
    let fill_row = |i: usize, out: &mut [u32]| {
        let row_i = t.row(i);
        for j in 0..n {
            out[j] = and_popcount(row_i, &cols[j * words..(j + 1) * words]);
        }
    };
    let mut p = vec![0u32; n * n];
    #[cfg(feature = "parallel")]
    if par {
        p.par_chunks_mut(n).enumerate().for_each(|(i, chunk)| fill_row(i, chunk));
        return p;
    }
    let _ = par;
    for (i, chunk) in p.chunks_mut(n).enumerate() {
        fill_row(i, chunk);
    }
    p
}

fn homs4(t: &Tournament, par: bool) -> u64 {
    let n = t.n();
    let p = square_counts(t, par);
    let row_term = |i: usize| -> u64 {
        let mut acc = 0u64;
        for j in 0..n {
            acc += p[i * n + j] as u64 * p[j * n + i] as u64;
        }
        acc
    };
    #[cfg(feature = "parallel")]
    if par {
        return (0..n).into_par_iter().map(row_term).sum();
    }
    (0..n).map(row_term).sum()
}

fn homs5(t: &Tournament, par: bool) -> Result<u64> {
    let n = t.n();
    let p = square_counts(t, par);
    // Transposed copy so the inner dot products run over contiguous rows.
    let mut pt = vec![0u32; n * n];
    for i in 0..n {
        for j in 0..n {
            pt[j * n + i] = p[i * n + j];
        }
    }
    let source_term = |k: usize| -> u128 {
        let mut acc = 0u128;
        let col_k = &pt[k * n..(k + 1) * n];
        for_each_set_bit(t.row(k), n, |i| {
            let row_i = &p[i * n..(i + 1) * n];
            let dot: u64 = row_i.iter().zip(col_k).map(|(&a, &b)| a as u64 * b as u64).sum();
            acc += dot as u128;
        });
        acc
    };
    let total: u128;
    #[cfg(feature = "parallel")]
    {
        total = if par {
            (0..n).into_par_iter().map(source_term).sum()
        } else {
            (0..n).map(source_term).sum()
        };
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = par;
        total = (0..n).map(source_term).sum();
    }
    u64::try_from(total).map_err(|_| Error::numerical("5-cycle count overflows u64"))
}

// ---------------------------------------------------------------------------
// Trace densities of tournament matrices
// ---------------------------------------------------------------------------

/// `sigma_l(A) = Tr(A^l) / n^l` for `l` in {1, 3, 4}, computed by dense
/// floating-point matrix powers.
pub fn sigma(a: &TournamentMatrix, ell: usize) -> Result<f64> {
    let n = a.n();
    let nf = n as f64;
    match ell {
        1 => {
            let tr: f64 = (0..n).map(|i| a.get(i, i)).sum();
            Ok(tr / nf)
        }
        3 | 4 => {
            let m = a.to_dmatrix();
            let m2 = &m * &m;
            let tr = if ell == 3 {
                (0..n).map(|i| (0..n).map(|j| m2[(i, j)] * m[(j, i)]).sum::<f64>()).sum::<f64>()
            } else {
                (0..n).map(|i| (0..n).map(|j| m2[(i, j)] * m2[(j, i)]).sum::<f64>()).sum::<f64>()
            };
            Ok(tr / nf.powi(ell as i32))
        }
        _ => Err(Error::param(format!("sigma exponent {ell} not in {{1, 3, 4}}"))),
    }
}

// ---------------------------------------------------------------------------
// Transitive subtournament densities
// ---------------------------------------------------------------------------

/// Number of `k`-subsets inducing a transitive subtournament, `k` in
/// {3, 4}. Each such subset admits exactly one homomorphism from the
/// transitive `k`-tournament.
///
/// A triple is transitive iff some vertex beats the other two; a
/// 4-subset is transitive iff it contains no cyclic triple, i.e. iff it
/// is a source vertex plus a transitive triple in its out-neighbourhood.
pub fn trans_count(t: &Tournament, k: usize) -> Result<u64> {
    let n = t.n();
    match k {
        3 => Ok((0..n)
            .map(|v| {
                let d = t.out_degree(v) as u64;
                d * d.saturating_sub(1) / 2
            })
            .sum()),
        4 => {
            let term = |v: usize| -> u64 {
                let mut acc = 0u64;
                for_each_set_bit(t.row(v), n, |u| {
                    let c = and_popcount(t.row(u), t.row(v)) as u64;
                    acc += c * c.saturating_sub(1) / 2;
                });
                acc
            };
            #[cfg(feature = "parallel")]
            {
                Ok((0..n).into_par_iter().map(term).sum())
            }
            #[cfg(not(feature = "parallel"))]
            {
                Ok((0..n).map(term).sum())
            }
        }
        _ => Err(Error::param(format!("transitive order {k} not in {{3, 4}}"))),
    }
}

/// Homomorphism density of the transitive `k`-tournament in `t`.
pub fn trans_density(t: &Tournament, k: usize) -> Result<f64> {
    let count = trans_count(t, k)? as f64;
    Ok(count / (t.n() as f64).powi(k as i32))
}

// ---------------------------------------------------------------------------
// Density report
// ---------------------------------------------------------------------------

/// All densities of a tournament in one record. `identity_residual` is
/// `8 t3 + 24 tT4 - 6 t4 - 1`, which vanishes at rate O(1/n).
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub n: usize,
    pub homs3: u64,
    pub homs4: u64,
    pub homs5: u64,
    pub t3: f64,
    pub t4: f64,
    pub t5: f64,
    #[serde(rename = "tT3")]
    pub t_t3: f64,
    #[serde(rename = "tT4")]
    pub t_t4: f64,
    pub sigma3: f64,
    pub sigma4: f64,
    pub identity_residual: f64,
}

pub fn density_report(t: &Tournament) -> Result<DensityReport> {
    let n = t.n();
    let nf = n as f64;
    let homs3 = cycle_homs(t, 3)?;
    let homs4 = cycle_homs(t, 4)?;
    let homs5 = cycle_homs(t, 5)?;
    let t3 = homs3 as f64 / nf.powi(3);
    let t4 = homs4 as f64 / nf.powi(4);
    let t5 = homs5 as f64 / nf.powi(5);
    let t_t3 = trans_density(t, 3)?;
    let t_t4 = trans_density(t, 4)?;
    Ok(DensityReport {
        n,
        homs3,
        homs4,
        homs5,
        t3,
        t4,
        t5,
        t_t3,
        t_t4,
        sigma3: sigma3_from_counts(n, homs3),
        sigma4: sigma4_from_counts(n, homs3, homs4),
        identity_residual: 8.0 * t3 + 24.0 * t_t4 - 6.0 * t4 - 1.0,
    })
}

/// Exact bridge `sigma3 = t3 + 1/(8 n^2)` evaluated from integer counts.
pub fn sigma3_from_counts(n: usize, homs3: u64) -> f64 {
    let nf = n as f64;
    homs3 as f64 / nf.powi(3) + 1.0 / (8.0 * nf * nf)
}

/// Exact bridge `sigma4 = t4 + 2 t3/n + 1/(16 n^3)` from integer counts.
pub fn sigma4_from_counts(n: usize, homs3: u64, homs4: u64) -> f64 {
    let nf = n as f64;
    homs4 as f64 / nf.powi(4) + 2.0 * homs3 as f64 / nf.powi(4) + 1.0 / (16.0 * nf.powi(3))
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default)]
pub struct EnumerationOptions {
    /// Lifts the n <= 7 cost guard.
    pub allow_large: bool,
}

/// Minimizer witness of the enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct EnumerationArgMin {
    pub index: u64,
    pub trn: String,
    pub sigma3: f64,
    pub sigma4: f64,
    pub gap: f64,
}

/// Aggregate of one exhaustive sweep: every orientation of the
/// upper-triangle pairs visited once, in lexicographic order of the bit
/// string. `min_gap` is the minimum of `sigma4 - g(sigma3)` over
/// tournaments with `sigma3 >= 1/72`.
#[derive(Debug, Clone, Serialize)]
pub struct EnumerationSummary {
    pub n: u32,
    pub visited: u64,
    pub with_c3: u64,
    pub eligible: u64,
    pub min_gap: Option<f64>,
    pub argmin: Option<EnumerationArgMin>,
}

pub fn enumeration_count(n: u32) -> u64 {
    1u64 << (n * (n - 1) / 2)
}

fn check_enum_order(n: u32, opts: &EnumerationOptions) -> Result<()> {
    if n == 0 {
        return Err(Error::param("enumeration order must be at least 1"));
    }
    if n > ENUM_GUARD && !opts.allow_large {
        return Err(Error::param(format!(
            "enumeration at n = {n} exceeds the n <= {ENUM_GUARD} cost guard (override to force)"
        )));
    }
    if n > 11 {
        return Err(Error::param(format!("enumeration at n = {n} is not tractable")));
    }
    Ok(())
}

/// Pairs `(i, j)`, `i < j`, in lexicographic order.
fn lex_pairs(n: u32) -> Vec<(usize, usize)> {
    let n = n as usize;
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

fn tournament_from_index(n: u32, pairs: &[(usize, usize)], index: u64) -> Tournament {
    let n = n as usize;
    let words = n.div_ceil(64);
    let total = pairs.len();
    let mut rows = vec![0u64; n * words];
    for (p, &(i, j)) in pairs.iter().enumerate() {
        if index >> (total - 1 - p) & 1 == 1 {
            rows[i * words + j / 64] |= 1u64 << (j % 64);
        } else {
            rows[j * words + i / 64] |= 1u64 << (i % 64);
        }
    }
    Tournament::from_rows_unchecked(n, words, rows)
}

/// Tiny-order 3- and 4-cycle counts on single-word rows.
#[allow(clippy::needless_range_loop)]
fn homs34_small(n: usize, t: &Tournament) -> (u64, u64) {
    debug_assert!(n <= 64 && t.words() == 1);
    let mut rows = [0u64; 16];
    let mut cols = [0u64; 16];
    for i in 0..n {
        rows[i] = t.row(i)[0];
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && t.arc(j, i) {
                cols[i] |= 1 << j;
            }
        }
    }
    let mut p = [[0u32; 16]; 16];
    for i in 0..n {
        for j in 0..n {
            p[i][j] = (rows[i] & cols[j]).count_ones();
        }
    }
    let mut h3 = 0u64;
    let mut h4 = 0u64;
    for i in 0..n {
        let mut bits = rows[i];
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            h3 += (rows[j] & cols[i]).count_ones() as u64;
        }
        for j in 0..n {
            h4 += p[i][j] as u64 * p[j][i] as u64;
        }
    }
    (h3, h4)
}

struct GapAccumulator {
    visited: u64,
    with_c3: u64,
    eligible: u64,
    best: Option<(f64, u64)>,
}

impl GapAccumulator {
    fn new() -> Self {
        GapAccumulator { visited: 0, with_c3: 0, eligible: 0, best: None }
    }

    fn absorb(&mut self, n: u32, index: u64, h3: u64, h4: u64, g_by_c3: &[f64]) {
        self.visited += 1;
        if h3 > 0 {
            self.with_c3 += 1;
        }
        let n_u = n as u64;
        // sigma3 >= 1/72 is exactly 72 h3 + 9 n >= n^3 in integers.
        if 72 * h3 + 9 * n_u >= n_u * n_u * n_u {
            self.eligible += 1;
            let s4 = sigma4_from_counts(n as usize, h3, h4);
            let gap = s4 - g_by_c3[(h3 / 3) as usize];
            let better = match self.best {
                None => true,
                Some((bg, bi)) => gap < bg || (gap == bg && index < bi),
            };
            if better {
                self.best = Some((gap, index));
            }
        }
    }

    #[cfg(feature = "parallel")]
    fn merge(mut self, other: GapAccumulator) -> GapAccumulator {
        self.visited += other.visited;
        self.with_c3 += other.with_c3;
        self.eligible += other.eligible;
        self.best = match (self.best, other.best) {
            (None, b) | (b, None) => b,
            (Some(a), Some(b)) => {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        };
        self
    }

    fn into_summary(self, n: u32, pairs: &[(usize, usize)]) -> Result<EnumerationSummary> {
        let argmin = match self.best {
            None => None,
            Some((gap, index)) => {
                let t = tournament_from_index(n, pairs, index);
                let (h3, h4) = homs34_small(n as usize, &t);
                Some(EnumerationArgMin {
                    index,
                    trn: trn::write_trn(&t),
                    sigma3: sigma3_from_counts(n as usize, h3),
                    sigma4: sigma4_from_counts(n as usize, h3, h4),
                    gap,
                })
            }
        };
        Ok(EnumerationSummary {
            n,
            visited: self.visited,
            with_c3: self.with_c3,
            eligible: self.eligible,
            min_gap: self.best.map(|(gap, _)| gap),
            argmin,
        })
    }
}

/// `g(sigma3)` indexed by the number of cyclic triples (`homs3 / 3`).
fn g_table(n: u32) -> Result<Vec<f64>> {
    let n_us = n as usize;
    let max_c3 = n_us * (n_us.saturating_sub(1)) * (n_us.saturating_sub(2)) / 6;
    (0..=max_c3)
        .map(|c3| {
            let s3 = sigma3_from_counts(n_us, 3 * c3 as u64);
            bounds::g(s3.min(bounds::D_MAX))
        })
        .collect()
}

/// Visits all `2^(n(n-1)/2)` tournaments of order `n` in lexicographic
/// order of the upper-triangle orientation bit string, feeding each to
/// `visitor` exactly once, and returns the sweep summary.
pub fn enumerate_all(
    n: u32,
    opts: EnumerationOptions,
    mut visitor: impl FnMut(&Tournament),
) -> Result<EnumerationSummary> {
    check_enum_order(n, &opts)?;
    let pairs = lex_pairs(n);
    let table = g_table(n)?;
    let mut acc = GapAccumulator::new();
    for index in 0..enumeration_count(n) {
        let t = tournament_from_index(n, &pairs, index);
        visitor(&t);
        let (h3, h4) = homs34_small(n as usize, &t);
        acc.absorb(n, index, h3, h4, &table);
    }
    acc.into_summary(n, &pairs)
}

/// Sweep summary without a visitor; parallelizes over index ranges when
/// the `parallel` feature is enabled. Results are identical to the
/// sequential sweep (the merge is exact).
pub fn enumeration_summary(n: u32, opts: EnumerationOptions) -> Result<EnumerationSummary> {
    #[cfg(feature = "parallel")]
    {
        enumeration_summary_par(n, opts)
    }
    #[cfg(not(feature = "parallel"))]
    enumeration_summary_seq(n, opts)
}

/// Single-threaded sweep summary.
pub fn enumeration_summary_seq(n: u32, opts: EnumerationOptions) -> Result<EnumerationSummary> {
    enumerate_all(n, opts, |_| {})
}

#[cfg(feature = "parallel")]
/// Multi-threaded sweep summary.
pub fn enumeration_summary_par(n: u32, opts: EnumerationOptions) -> Result<EnumerationSummary> {
    check_enum_order(n, &opts)?;
    let pairs = lex_pairs(n);
    let table = g_table(n)?;
    let total = enumeration_count(n);
    let chunk: u64 = 1 << 12;
    let n_chunks = total.div_ceil(chunk);
    let acc = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = GapAccumulator::new();
            let end = ((c + 1) * chunk).min(total);
            for index in c * chunk..end {
                let t = tournament_from_index(n, &pairs, index);
                let (h3, h4) = homs34_small(n as usize, &t);
                acc.absorb(n, index, h3, h4, &table);
            }
            acc
        })
        .reduce(GapAccumulator::new, GapAccumulator::merge);
    acc.into_summary(n, &pairs)
}
