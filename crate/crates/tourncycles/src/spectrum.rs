//! Structured solver for the spectrum optimization problem.
//!
//! Parameters are reals `s3` in `[0, 1/8]` and `rho` in `[0, 1/2]` plus
//! capacity caps `k` (real slots) and `l` (conjugate-pair slots). The
//! variables are reals `r_i` in `[0, rho]` and pairs `(a_i, b_i)` with
//! `a_i >= 0`, subject to
//!
//! ```text
//! rho   + sum r_i   + 2 sum a_i                 = 1/2
//! rho^3 + sum r_i^3 + 2 sum (a_i^3 - 3 a_i b_i^2) = s3
//! ```
//!
//! minimizing `rho^4 + sum r_i^4 + 2 sum (a_i^4 - 6 a_i^2 b_i^2 + b_i^4)`.
//! These are exactly the constraints satisfied by the normalized
//! eigenvalues of a tournament matrix with Perron root `rho * n`, and
//! the objective is `sigma4`.
//!
//! Stationarity analysis reduces the optimum to two families:
//!
//! 1. all `b_i = 0`, with values drawn from `{0, r', r'', rho}`;
//! 2. reals in `{0, rho}` and all pairs at a single point `(a, +/-b)`.
//!
//! The structured solver enumerates multiplicities in both families,
//! solving the 2x2 moment system for `(r', r'')` by damped Newton from a
//! grid of starts, and returns the least feasible candidate. A
//! projected-gradient method with an augmented Lagrangian serves as an
//! independent numerical cross-check.

use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bounds;
use crate::error::{Error, Result};
use crate::rng::{IndexedRng, Seed};

const EQ_TOL: f64 = 1e-10;

/// Problem parameters plus slot caps. The caps bound how many distinct
/// entries a witness may occupy, not exact counts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumInstance {
    pub s3: f64,
    pub rho: f64,
    pub k_max: usize,
    pub l_max: usize,
}

impl SpectrumInstance {
    pub fn new(s3: f64, rho: f64, k_max: usize, l_max: usize) -> Result<Self> {
        if !s3.is_finite() || !(-1e-12..=0.125 + 1e-12).contains(&s3) {
            return Err(Error::param(format!("s3 = {s3} outside [0, 1/8]")));
        }
        if !rho.is_finite() || !(-1e-12..=0.5 + 1e-12).contains(&rho) {
            return Err(Error::param(format!("rho = {rho} outside [0, 1/2]")));
        }
        if k_max + l_max == 0 {
            return Err(Error::param("k_max + l_max must be at least 1"));
        }
        Ok(SpectrumInstance {
            s3: s3.clamp(0.0, 0.125),
            rho: rho.clamp(0.0, 0.5),
            k_max,
            l_max,
        })
    }

    /// Caps generous enough for every multiplicity the linear constraint
    /// admits at this `rho`.
    pub fn with_default_caps(s3: f64, rho: f64) -> Result<Self> {
        let m = multiplicity_cap(rho);
        SpectrumInstance::new(s3, rho, 3 * m, m)
    }
}

/// Largest useful multiplicity: `ceil(1 / (2 max(rho, 1e-3))) + 2`.
fn multiplicity_cap(rho: f64) -> usize {
    (1.0 / (2.0 * rho.max(1e-3))).ceil() as usize + 2
}

/// A witness spectrum: all real eigenvalues (the Perron copy included)
/// and one `(a, b)` entry per conjugate pair.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumWitness {
    pub reals: Vec<f64>,
    pub pairs: Vec<(f64, f64)>,
}

impl SpectrumWitness {
    pub fn first_moment(&self) -> f64 {
        self.reals.iter().sum::<f64>() + 2.0 * self.pairs.iter().map(|&(a, _)| a).sum::<f64>()
    }

    pub fn third_moment(&self) -> f64 {
        self.reals.iter().map(|r| r.powi(3)).sum::<f64>()
            + 2.0
                * self
                    .pairs
                    .iter()
                    .map(|&(a, b)| a.powi(3) - 3.0 * a * b * b)
                    .sum::<f64>()
    }

    pub fn fourth_moment(&self) -> f64 {
        self.reals.iter().map(|r| r.powi(4)).sum::<f64>()
            + 2.0
                * self
                    .pairs
                    .iter()
                    .map(|&(a, b)| a.powi(4) - 6.0 * a * a * b * b + b.powi(4))
                    .sum::<f64>()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSolution {
    pub value: f64,
    pub witness: SpectrumWitness,
    pub case_tag: String,
}

// ---------------------------------------------------------------------------
// Spectral-radius lower bound
// ---------------------------------------------------------------------------

/// The least feasible `rho` for third moment `s3`: the unique
/// `z` in `(0, 1/2]` with
/// `s3 = floor(1/(2z)) z^3 + (1/2 - floor(1/(2z)) z)^3`.
///
/// This is the regime parametrization of [`bounds::invert_z`] at half
/// scale: nonnegative reals summing to 1/2 and capped at `z` have cube
/// sum at most the right-hand side, so any feasible spectrum needs
/// `rho >= rho_min(s3)`.
pub fn rho_min(s3: f64) -> Result<f64> {
    if !s3.is_finite() || s3 <= 0.0 || s3 > 0.125 + 1e-12 {
        return Err(Error::param(format!("s3 = {s3} outside (0, 1/8]")));
    }
    let rp = bounds::invert_z(s3.min(0.125))?;
    Ok(rp.z * 0.5)
}

/// Largest cube sum of `count` values in `[0, cap]` with fixed total:
/// as many entries as possible at `cap`, one remainder. `None` when the
/// total cannot fit at all.
fn max_cube_sum(total: f64, cap: f64, count: usize) -> Option<f64> {
    if total < -1e-12 {
        return None;
    }
    if cap <= 0.0 {
        return if total <= 1e-12 { Some(0.0) } else { None };
    }
    let full = ((total / cap) + 1e-12).floor() as usize;
    if full >= count {
        if total > count as f64 * cap + 1e-9 {
            return None;
        }
        return Some(count as f64 * cap.powi(3));
    }
    let rem = (total - full as f64 * cap).max(0.0);
    Some(full as f64 * cap.powi(3) + rem.powi(3))
}

/// Whether extra values (beyond the mandatory Perron copy) fit into
/// `k_max` real slots and `l_max` pair slots, a pair holding two equal
/// copies.
fn fits_caps(counts: &[usize], k_max: usize, l_max: usize) -> bool {
    let total: usize = counts.iter().sum();
    let pair_capacity: usize = counts.iter().map(|c| c / 2).sum();
    let used_pairs = pair_capacity.min(l_max);
    total - 2 * used_pairs <= k_max
}

// ---------------------------------------------------------------------------
// Structured solver
// ---------------------------------------------------------------------------

struct Candidate {
    value: f64,
    witness: SpectrumWitness,
    tag: String,
}

/// Minimum over both stationary families and all admissible
/// multiplicities. Errors with [`Error::Infeasible`] when `rho` is below
/// `rho_min(s3)` or no candidate satisfies the constraints.
pub fn solve_structured(inst: &SpectrumInstance) -> Result<SpectrumSolution> {
    let s3 = inst.s3;
    let rho = inst.rho;
    if s3 > 0.0 {
        let rmin = rho_min(s3)?;
        if rho < rmin - 1e-12 {
            return Err(Error::Infeasible { s3, rho, rho_min: rmin });
        }
    }
    let cap = multiplicity_cap(rho);
    let mut candidates: Vec<Candidate> = Vec::new();

    case_one(inst, cap, &mut candidates);
    case_two(inst, cap, &mut candidates);

    let best = candidates
        .into_iter()
        .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
    match best {
        Some(c) => Ok(SpectrumSolution {
            value: c.value,
            witness: c.witness,
            case_tag: c.tag,
        }),
        None => Err(Error::Infeasible {
            s3,
            rho,
            rho_min: if s3 > 0.0 { rho_min(s3)? } else { 0.0 },
        }),
    }
}

fn push_candidate(
    inst: &SpectrumInstance,
    reals: Vec<f64>,
    pairs: Vec<(f64, f64)>,
    tag: String,
    out: &mut Vec<Candidate>,
) {
    let witness = SpectrumWitness { reals, pairs };
    if (witness.first_moment() - 0.5).abs() > EQ_TOL
        || (witness.third_moment() - inst.s3).abs() > EQ_TOL
    {
        return;
    }
    out.push(Candidate {
        value: witness.fourth_moment(),
        witness,
        tag,
    });
}

fn case_one(inst: &SpectrumInstance, cap: usize, out: &mut Vec<Candidate>) {
    let rho = inst.rho;
    for m_rho in 1..=cap {
        let s1 = 0.5 - m_rho as f64 * rho;
        if s1 < -1e-10 {
            break;
        }
        let s3r = inst.s3 - m_rho as f64 * rho.powi(3);
        if s1.abs() <= 1e-11 && s3r.abs() <= 1e-11 && fits_caps(&[m_rho - 1], inst.k_max, inst.l_max)
        {
            push_candidate(
                inst,
                vec![rho; m_rho],
                vec![],
                format!("case1(m_rho={m_rho},m1=0,m2=0)"),
                out,
            );
        }
        for m1 in 1..=cap {
            // Single distinct extra value.
            let r = s1 / m1 as f64;
            if (-1e-12..=rho + 1e-12).contains(&r)
                && (m1 as f64 * r.powi(3) - s3r).abs() <= 1e-11
                && fits_caps(&[m_rho - 1, m1], inst.k_max, inst.l_max)
            {
                let mut reals = vec![rho; m_rho];
                reals.extend(std::iter::repeat_n(r.clamp(0.0, rho), m1));
                push_candidate(
                    inst,
                    reals,
                    vec![],
                    format!("case1(m_rho={m_rho},m1={m1},m2=0)"),
                    out,
                );
            }
            for m2 in 1..=m1 {
                let count = m1 + m2;
                if s1 > count as f64 * rho + 1e-9 {
                    continue;
                }
                let lo = s1.max(0.0).powi(3) / (count as f64 * count as f64);
                let hi = match max_cube_sum(s1.max(0.0), rho, count) {
                    Some(hi) => hi,
                    None => continue,
                };
                if s3r < lo - 1e-9 || s3r > hi + 1e-9 {
                    continue;
                }
                if !fits_caps(&[m_rho - 1, m1, m2], inst.k_max, inst.l_max) {
                    continue;
                }
                for (r1, r2) in newton_two_values(m1, m2, s1, s3r, rho) {
                    let mut reals = vec![rho; m_rho];
                    reals.extend(std::iter::repeat_n(r1, m1));
                    reals.extend(std::iter::repeat_n(r2, m2));
                    push_candidate(
                        inst,
                        reals,
                        vec![],
                        format!("case1(m_rho={m_rho},m1={m1},m2={m2})"),
                        out,
                    );
                }
            }
        }
    }
}

/// Damped Newton for `m1 r1 + m2 r2 = s1`, `m1 r1^3 + m2 r2^3 = s3r`
/// with `0 <= r1, r2 <= rho`, from a 16x16 grid of starts; solutions
/// deduplicated at 1e-9.
fn newton_two_values(m1: usize, m2: usize, s1: f64, s3r: f64, rho: f64) -> Vec<(f64, f64)> {
    let (m1f, m2f) = (m1 as f64, m2 as f64);
    let scale = 1.0f64.max(s1.abs()).max(s3r.abs());
    let residual = |r1: f64, r2: f64| -> (f64, f64) {
        (
            m1f * r1 + m2f * r2 - s1,
            m1f * r1.powi(3) + m2f * r2.powi(3) - s3r,
        )
    };
    let norm = |f: (f64, f64)| f.0.abs().max(f.1.abs());
    let mut found: Vec<(f64, f64)> = Vec::new();
    for gi in 0..16 {
        for gj in 0..16 {
            let mut x = (rho * gi as f64 / 15.0, rho * gj as f64 / 15.0);
            let mut fx = residual(x.0, x.1);
            let mut converged = false;
            for _ in 0..40 {
                if norm(fx) <= 1e-13 * scale {
                    converged = true;
                    break;
                }
                // Jacobian [[m1, m2], [3 m1 r1^2, 3 m2 r2^2]]
                let (j11, j12) = (m1f, m2f);
                let (j21, j22) = (3.0 * m1f * x.0 * x.0, 3.0 * m2f * x.1 * x.1);
                let det = j11 * j22 - j12 * j21;
                if det.abs() < 1e-14 {
                    break;
                }
                let dx = ((j22 * fx.0 - j12 * fx.1) / det, (j11 * fx.1 - j21 * fx.0) / det);
                // Halve the step while the residual grows.
                let mut t = 1.0;
                let mut next = (x.0 - t * dx.0, x.1 - t * dx.1);
                let mut fn_next = residual(next.0, next.1);
                let mut halvings = 0;
                while norm(fn_next) > norm(fx) && halvings < 30 {
                    t *= 0.5;
                    next = (x.0 - t * dx.0, x.1 - t * dx.1);
                    fn_next = residual(next.0, next.1);
                    halvings += 1;
                }
                if halvings == 30 {
                    break;
                }
                x = next;
                fx = fn_next;
            }
            if !(converged || norm(fx) <= 1e-13 * scale) {
                continue;
            }
            let (r1, r2) = x;
            if !(-1e-9..=rho + 1e-9).contains(&r1) || !(-1e-9..=rho + 1e-9).contains(&r2) {
                continue;
            }
            let sol = (r1.clamp(0.0, rho), r2.clamp(0.0, rho));
            if !found
                .iter()
                .any(|f| (f.0 - sol.0).abs() < 1e-9 && (f.1 - sol.1).abs() < 1e-9)
            {
                found.push(sol);
            }
        }
    }
    found
}

fn case_two(inst: &SpectrumInstance, cap: usize, out: &mut Vec<Candidate>) {
    let rho = inst.rho;
    let pair_cap = cap.min(inst.l_max);
    for m in 1..=cap {
        let mass = 0.5 - m as f64 * rho;
        if mass < -1e-10 {
            break;
        }
        for mp in 1..=pair_cap {
            let a = mass.max(0.0) / (2.0 * mp as f64);
            if a <= 1e-12 {
                // a = 0 forces b = 0; the pure-rho candidate covers it.
                continue;
            }
            let b2 = (m as f64 * rho.powi(3) + 2.0 * mp as f64 * a.powi(3) - inst.s3)
                / (6.0 * mp as f64 * a);
            if b2 < -1e-10 {
                continue;
            }
            if !fits_caps(&[m - 1], inst.k_max, inst.l_max - mp) {
                continue;
            }
            let b = if b2 > 1e-15 { b2.sqrt() } else { 0.0 };
            push_candidate(
                inst,
                vec![rho; m],
                vec![(a, b); mp],
                format!("case2(m={m},pairs={mp})"),
                out,
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Numerical cross-check
// ---------------------------------------------------------------------------

/// Projected-gradient local search with an augmented Lagrangian for the
/// two equality constraints and box projection for the bounds, from
/// `restarts` random starts. Independent of the structured solver.
pub fn solve_numeric(
    inst: &SpectrumInstance,
    k: usize,
    l: usize,
    seed: Seed,
    restarts: usize,
) -> Result<SpectrumSolution> {
    if k + l == 0 {
        return Err(Error::param("numeric solver needs at least one variable"));
    }
    if restarts == 0 {
        return Err(Error::param("restarts must be at least 1"));
    }
    let run = |r: usize| -> Option<(f64, Vec<f64>)> {
        let rng = IndexedRng::new(Seed(seed.0 ^ r as u64));
        local_search(inst, k, l, &rng, r as u64)
    };
    let results: Vec<Option<(f64, Vec<f64>)>>;
    #[cfg(feature = "parallel")]
    {
        results = (0..restarts).into_par_iter().map(run).collect();
    }
    #[cfg(not(feature = "parallel"))]
    {
        results = (0..restarts).map(run).collect();
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut feasible = 0usize;
    for r in results.into_iter().flatten() {
        feasible += 1;
        if best.as_ref().is_none_or(|b| r.0 < b.0) {
            best = Some(r);
        }
    }
    match best {
        Some((value, x)) => {
            let mut reals = vec![inst.rho];
            for &r in &x[..k] {
                if r > 1e-10 {
                    reals.push(r);
                }
            }
            let mut pairs = Vec::new();
            for i in 0..l {
                let (a, b) = (x[k + i], x[k + l + i]);
                if a > 1e-10 || b.abs() > 1e-10 {
                    pairs.push((a, b.abs()));
                }
            }
            Ok(SpectrumSolution {
                value,
                witness: SpectrumWitness { reals, pairs },
                case_tag: format!("numeric(k={k},l={l})"),
            })
        }
        None => Err(Error::numerical(format!(
            "no feasible local minimum in {restarts} restarts ({feasible} feasible)"
        ))),
    }
}

fn local_search(
    inst: &SpectrumInstance,
    k: usize,
    l: usize,
    rng: &IndexedRng,
    variant: u64,
) -> Option<(f64, Vec<f64>)> {
    let rho = inst.rho;
    let dim = k + 2 * l;
    // Feasible-ish start: split the remaining linear mass randomly
    // between the reals and the pairs, then pick b to balance the cubic
    // constraint (plus noise). Pure-random starts stall in the flat
    // valleys the quartic objective has along b. Two fixed variants pin
    // the ends of the split so every run probes the pure-pair and
    // pure-real basins.
    let mut x = vec![0.0f64; dim];
    let mass = (0.5 - rho).max(0.0);
    let r_share = if l == 0 {
        1.0
    } else {
        match variant % 8 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.unit(1000),
        }
    };
    let mut raw: Vec<f64> = (0..k).map(|i| rng.unit(i as u64) * rho).collect();
    let raw_sum: f64 = raw.iter().sum();
    let target_r = (mass * r_share).min(k as f64 * rho);
    if raw_sum > 1e-12 {
        let scale = target_r / raw_sum;
        for r in &mut raw {
            *r = (*r * scale).min(rho);
        }
    }
    let r_sum: f64 = raw.iter().sum();
    x[..k].copy_from_slice(&raw);
    if l > 0 {
        let a = ((mass - r_sum) / (2.0 * l as f64)).max(0.0);
        let cubes_r: f64 = raw.iter().map(|r| r.powi(3)).sum();
        let need = rho.powi(3) + cubes_r + 2.0 * l as f64 * a.powi(3) - inst.s3;
        let b = if a > 1e-9 && need > 0.0 {
            (need / (6.0 * l as f64 * a)).sqrt()
        } else {
            0.1
        };
        for i in 0..l {
            x[k + i] = a;
            let sign = if rng.unit(2000 + i as u64) < 0.5 { -1.0 } else { 1.0 };
            x[k + l + i] = sign * b * (0.9 + 0.2 * rng.unit(3000 + i as u64));
        }
    }
    let project = |x: &mut [f64]| {
        for (i, v) in x.iter_mut().enumerate() {
            *v = if i < k {
                v.clamp(0.0, rho)
            } else if i < k + l {
                v.clamp(0.0, 0.5)
            } else {
                v.clamp(-3.0, 3.0)
            };
        }
    };
    project(&mut x);

    let objective = |x: &[f64]| -> f64 {
        let mut f = rho.powi(4);
        for &r in &x[..k] {
            f += r.powi(4);
        }
        for i in 0..l {
            let (a, b) = (x[k + i], x[k + l + i]);
            f += 2.0 * (a.powi(4) - 6.0 * a * a * b * b + b.powi(4));
        }
        f
    };
    let constraints = |x: &[f64]| -> (f64, f64) {
        let mut c1 = rho - 0.5;
        let mut c3 = rho.powi(3) - inst.s3;
        for &r in &x[..k] {
            c1 += r;
            c3 += r.powi(3);
        }
        for i in 0..l {
            let (a, b) = (x[k + i], x[k + l + i]);
            c1 += 2.0 * a;
            c3 += 2.0 * (a.powi(3) - 3.0 * a * b * b);
        }
        (c1, c3)
    };

    // A stiff initial penalty keeps near-feasible starts glued to the
    // constraint manifold; a soft one lets the objective gradient fling
    // them into other basins before the multipliers catch up. The
    // weight grows only while the violation stalls, so the conditioning
    // stays workable once the multipliers carry the constraints.
    let (mut l1, mut l3) = (0.0f64, 0.0f64);
    let mut weight = 1e3f64;
    let mut prev_viol = f64::INFINITY;
    for _outer in 0..30 {
        inner_descent(&mut x, k, l, rho, inst.s3, l1, l3, weight, 500, &project);
        let (c1, c3) = constraints(&x);
        let viol = c1.abs().max(c3.abs());
        l1 += weight * c1;
        l3 += weight * c3;
        if viol < 1e-12 {
            break;
        }
        if viol > 0.25 * prev_viol {
            weight = (weight * 4.0).min(1e9);
        }
        prev_viol = viol;
    }
    // Long tangential descent at settled multipliers.
    inner_descent(&mut x, k, l, rho, inst.s3, l1, l3, weight.min(1e6), 3000, &project);

    // Flush flat directions: zero a coordinate when doing so neither
    // worsens the constraint residual nor the objective. The `b` of a
    // degenerate pair with `a = 0` is invisible to the constraints but
    // converges only quartically, so it is snapped here.
    let violation = |x: &[f64]| -> f64 {
        let (c1, c3) = constraints(x);
        c1.abs().max(c3.abs())
    };
    for i in 0..dim {
        if x[i] != 0.0 {
            let (old, viol_old, obj_old) = (x[i], violation(&x), objective(&x));
            x[i] = 0.0;
            if violation(&x) > viol_old + 1e-14 || objective(&x) > obj_old + 1e-15 {
                x[i] = old;
            }
        }
    }

    restore_exact(&mut x, k, l, rho, inst.s3);
    tangential_polish(&mut x, k, l, rho, inst.s3);

    let (c1, c3) = constraints(&x);
    if c1.abs().max(c3.abs()) > 1e-8 {
        return None;
    }
    Some((objective(&x), x))
}

fn eval_constraints(x: &[f64], k: usize, l: usize, rho: f64, s3: f64) -> (f64, f64) {
    let mut c1 = rho - 0.5;
    let mut c3 = rho.powi(3) - s3;
    for &r in &x[..k] {
        c1 += r;
        c3 += r.powi(3);
    }
    for i in 0..l {
        let (a, b) = (x[k + i], x[k + l + i]);
        c1 += 2.0 * a;
        c3 += 2.0 * (a.powi(3) - 3.0 * a * b * b);
    }
    (c1, c3)
}

fn eval_objective(x: &[f64], k: usize, l: usize, rho: f64) -> f64 {
    let mut f = rho.powi(4);
    for &r in &x[..k] {
        f += r.powi(4);
    }
    for i in 0..l {
        let (a, b) = (x[k + i], x[k + l + i]);
        f += 2.0 * (a.powi(4) - 6.0 * a * a * b * b + b.powi(4));
    }
    f
}

/// Coordinate descent along the constraint manifold: every coordinate
/// outside the dominant pair is line-searched while that pair is
/// Newton-restored, so each probed point is feasible to machine
/// precision. Cuts through the tangential zigzag that limits projected
/// gradient steps.
fn tangential_polish(x: &mut [f64], k: usize, l: usize, rho: f64, s3: f64) {
    let mut pair = None;
    let mut best = 1e-7;
    for i in 0..l {
        let prod = (x[k + i] * x[k + l + i]).abs();
        if prod > best {
            best = prod;
            pair = Some(i);
        }
    }
    let Some(j) = pair else { return };
    let constraints = |y: &[f64]| eval_constraints(y, k, l, rho, s3);
    let pair_jac = |var: usize, v: (f64, f64)| match var {
        0 => (2.0, 6.0 * (v.0 * v.0 - v.1 * v.1)),
        _ => (0.0, -12.0 * v.0 * v.1),
    };
    let value_at = |base: &[f64], coord: usize, t: f64| -> (f64, Vec<f64>) {
        let mut y = base.to_vec();
        y[coord] = t;
        if newton_restore(&mut y, &constraints, k + j, k + l + j, pair_jac) {
            (eval_objective(&y, k, l, rho), y)
        } else {
            (f64::INFINITY, y)
        }
    };
    let free: Vec<(usize, f64, f64)> = (0..k)
        .map(|i| (i, 0.0, rho))
        .chain((0..l).filter(|&i| i != j).flat_map(|i| {
            [(k + i, 0.0, 0.5), (k + l + i, -3.0, 3.0)]
        }))
        .collect();
    if free.is_empty() {
        return;
    }
    let mut current = eval_objective(x, k, l, rho);
    for _sweep in 0..6 {
        let mut improved = false;
        for &(coord, lo, hi) in &free {
            // Coarse scan, then golden refinement around the best cell.
            let cells = 16usize;
            let mut best_t = x[coord];
            let mut best_v = current;
            for c in 0..=cells {
                let t = lo + (hi - lo) * c as f64 / cells as f64;
                let (v, _) = value_at(x, coord, t);
                if v < best_v {
                    best_v = v;
                    best_t = t;
                }
            }
            let width = (hi - lo) / cells as f64;
            let (mut a, mut b) = ((best_t - width).max(lo), (best_t + width).min(hi));
            let phi = (5.0f64.sqrt() - 1.0) / 2.0;
            let mut t1 = b - phi * (b - a);
            let mut t2 = a + phi * (b - a);
            let mut f1 = value_at(x, coord, t1).0;
            let mut f2 = value_at(x, coord, t2).0;
            for _ in 0..60 {
                if f1 <= f2 {
                    b = t2;
                    t2 = t1;
                    f2 = f1;
                    t1 = b - phi * (b - a);
                    f1 = value_at(x, coord, t1).0;
                } else {
                    a = t1;
                    t1 = t2;
                    f1 = f2;
                    t2 = a + phi * (b - a);
                    f2 = value_at(x, coord, t2).0;
                }
            }
            let tm = 0.5 * (a + b);
            for cand in [tm, best_t] {
                let (v, y) = value_at(x, coord, cand);
                if v < current - 1e-16 {
                    x.copy_from_slice(&y);
                    current = v;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Projected gradient descent on the augmented Lagrangian with adaptive
/// step size.
#[allow(clippy::too_many_arguments)]
fn inner_descent(
    x: &mut Vec<f64>,
    k: usize,
    l: usize,
    rho: f64,
    s3: f64,
    l1: f64,
    l3: f64,
    weight: f64,
    iters: usize,
    project: &impl Fn(&mut [f64]),
) {
    let dim = k + 2 * l;
    let constraints = |x: &[f64]| -> (f64, f64) {
        let mut c1 = rho - 0.5;
        let mut c3 = rho.powi(3) - s3;
        for &r in &x[..k] {
            c1 += r;
            c3 += r.powi(3);
        }
        for i in 0..l {
            let (a, b) = (x[k + i], x[k + l + i]);
            c1 += 2.0 * a;
            c3 += 2.0 * (a.powi(3) - 3.0 * a * b * b);
        }
        (c1, c3)
    };
    let lagrangian = |x: &[f64]| -> f64 {
        let (c1, c3) = constraints(x);
        let mut f = rho.powi(4);
        for &r in &x[..k] {
            f += r.powi(4);
        }
        for i in 0..l {
            let (a, b) = (x[k + i], x[k + l + i]);
            f += 2.0 * (a.powi(4) - 6.0 * a * a * b * b + b.powi(4));
        }
        f + l1 * c1 + l3 * c3 + 0.5 * weight * (c1 * c1 + c3 * c3)
    };
    let mut step = 0.05f64;
    let mut fx = lagrangian(x);
    let mut grad = vec![0.0f64; dim];
    for _ in 0..iters {
        let (c1, c3) = constraints(x);
        let (g1, g3) = (l1 + weight * c1, l3 + weight * c3);
        for i in 0..k {
            let r = x[i];
            grad[i] = 4.0 * r.powi(3) + g1 + g3 * 3.0 * r * r;
        }
        for i in 0..l {
            let (a, b) = (x[k + i], x[k + l + i]);
            grad[k + i] = 8.0 * a.powi(3) - 24.0 * a * b * b + 2.0 * g1 + g3 * 6.0 * (a * a - b * b);
            grad[k + l + i] = 8.0 * b.powi(3) - 24.0 * a * a * b - g3 * 12.0 * a * b;
        }
        let mut moved = false;
        while step > 1e-15 {
            let mut xn = x.clone();
            for i in 0..dim {
                xn[i] -= step * grad[i];
            }
            project(&mut xn);
            let fxn = lagrangian(&xn);
            if fxn <= fx {
                let delta: f64 = x.iter().zip(&xn).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                *x = xn;
                fx = fxn;
                step = (step * 1.3).min(0.5);
                moved = delta > 1e-15;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
}

/// Newton-restores the two equality constraints exactly through the
/// pair with the largest |b| (or two distinct interior reals when no
/// such pair exists), leaving all other coordinates frozen. Reverts on
/// failure.
fn restore_exact(x: &mut [f64], k: usize, l: usize, rho: f64, s3: f64) {
    let constraints = |x: &[f64]| -> (f64, f64) {
        let mut c1 = rho - 0.5;
        let mut c3 = rho.powi(3) - s3;
        for &r in &x[..k] {
            c1 += r;
            c3 += r.powi(3);
        }
        for i in 0..l {
            let (a, b) = (x[k + i], x[k + l + i]);
            c1 += 2.0 * a;
            c3 += 2.0 * (a.powi(3) - 3.0 * a * b * b);
        }
        (c1, c3)
    };
    let before = {
        let (c1, c3) = constraints(x);
        c1.abs().max(c3.abs())
    };
    if before < 1e-13 {
        return;
    }
    let saved = x.to_vec();

    // Candidate 1: the pair with the largest |a b| (nondegenerate 2x2
    // Jacobian in (a, b)).
    let mut pair_idx = None;
    let mut best = 1e-7;
    for i in 0..l {
        let prod = (x[k + i] * x[k + l + i]).abs();
        if prod > best {
            best = prod;
            pair_idx = Some(i);
        }
    }
    let ok = if let Some(i) = pair_idx {
        newton_restore(x, &constraints, k + i, k + l + i, |var, v| match var {
            0 => (2.0, 6.0 * (v.0 * v.0 - v.1 * v.1)),
            _ => (0.0, -12.0 * v.0 * v.1),
        })
    } else {
        // Candidate 2: two interior reals with distinct values.
        let interior: Vec<usize> = (0..k)
            .filter(|&i| x[i] > 1e-7 && x[i] < rho - 1e-7)
            .collect();
        let mut chosen = None;
        'outer: for (ai, &i) in interior.iter().enumerate() {
            for &j in &interior[ai + 1..] {
                if (x[i] - x[j]).abs() > 1e-6 {
                    chosen = Some((i, j));
                    break 'outer;
                }
            }
        }
        match chosen {
            Some((i, j)) => newton_restore(x, &constraints, i, j, |var, v| match var {
                0 => (1.0, 3.0 * v.0 * v.0),
                _ => (1.0, 3.0 * v.1 * v.1),
            }),
            None => false,
        }
    };
    if !ok {
        x.copy_from_slice(&saved);
        return;
    }
    let after = {
        let (c1, c3) = constraints(x);
        c1.abs().max(c3.abs())
    };
    if after > before {
        x.copy_from_slice(&saved);
    }
}

/// 2x2 Newton on coordinates `(i, j)` of `x` driving both constraints
/// to ~1e-15; `jac(var, (x_i, x_j))` returns the column of the
/// constraint Jacobian for `var` 0 (coordinate `i`) or 1 (`j`).
fn newton_restore(
    x: &mut [f64],
    constraints: &impl Fn(&[f64]) -> (f64, f64),
    i: usize,
    j: usize,
    jac: impl Fn(usize, (f64, f64)) -> (f64, f64),
) -> bool {
    for _ in 0..25 {
        let (c1, c3) = constraints(x);
        if c1.abs().max(c3.abs()) < 1e-15 {
            return true;
        }
        let v = (x[i], x[j]);
        let (j11, j21) = jac(0, v);
        let (j12, j22) = jac(1, v);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-12 {
            return false;
        }
        x[i] -= (j22 * c1 - j12 * c3) / det;
        x[j] -= (j11 * c3 - j21 * c1) / det;
        if !x[i].is_finite() || !x[j].is_finite() {
            return false;
        }
    }
    let (c1, c3) = constraints(x);
    c1.abs().max(c3.abs()) < 1e-12
}

// ---------------------------------------------------------------------------
// Sweep over rho
// ---------------------------------------------------------------------------

/// Result of minimizing the structured solution over `rho`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub value: f64,
    pub rho: f64,
    pub solution: SpectrumSolution,
}

fn sweep_grid_points(s3: f64, points: usize) -> Result<Vec<f64>> {
    let lo = rho_min(s3)?;
    let hi = 0.5f64;
    if points < 2 || lo >= hi {
        return Ok(vec![lo]);
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

fn eval_rho(s3: f64, rho: f64) -> Result<Option<SpectrumSolution>> {
    let inst = SpectrumInstance::with_default_caps(s3, rho)?;
    match solve_structured(&inst) {
        Ok(sol) => Ok(Some(sol)),
        Err(Error::Infeasible { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn best_of(values: Vec<(f64, Option<SpectrumSolution>)>) -> Option<SweepResult> {
    let mut best: Option<SweepResult> = None;
    for (rho, sol) in values {
        if let Some(sol) = sol {
            if best.as_ref().is_none_or(|b| sol.value < b.value) {
                best = Some(SweepResult { value: sol.value, rho, solution: sol });
            }
        }
    }
    best
}

/// Single-threaded structured sweep over a uniform `points`-point grid
/// of `[rho_min(s3), 1/2]`.
pub fn rho_sweep_seq(s3: f64, points: usize) -> Result<Option<SweepResult>> {
    let grid = sweep_grid_points(s3, points)?;
    let mut values = Vec::with_capacity(grid.len());
    for rho in grid {
        values.push((rho, eval_rho(s3, rho)?));
    }
    Ok(best_of(values))
}

#[cfg(feature = "parallel")]
/// Multi-threaded variant of [`rho_sweep_seq`]; identical results.
pub fn rho_sweep_par(s3: f64, points: usize) -> Result<Option<SweepResult>> {
    let grid = sweep_grid_points(s3, points)?;
    let values = grid
        .into_par_iter()
        .map(|rho| eval_rho(s3, rho).map(|sol| (rho, sol)))
        .collect::<Result<Vec<_>>>()?;
    Ok(best_of(values))
}

fn rho_sweep(s3: f64, points: usize) -> Result<Option<SweepResult>> {
    #[cfg(feature = "parallel")]
    {
        rho_sweep_par(s3, points)
    }
    #[cfg(not(feature = "parallel"))]
    {
        rho_sweep_seq(s3, points)
    }
}

/// Minimum structured value over `rho` in `[rho_min(s3), 1/2]`: a
/// 2000-point grid sweep plus golden-section refinement around the grid
/// minimum.
pub fn min_over_rho(s3: f64) -> Result<SweepResult> {
    const GRID: usize = 2000;
    let grid_best =
        rho_sweep(s3, GRID)?.ok_or_else(|| Error::numerical("no feasible rho in the sweep"))?;
    let lo = rho_min(s3)?;
    let hi = 0.5f64;
    let step = if hi > lo { (hi - lo) / (GRID - 1) as f64 } else { 0.0 };
    let mut best = grid_best;
    if step > 0.0 {
        let a0 = (best.rho - step).max(lo);
        let b0 = (best.rho + step).min(hi);
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let value_at = |rho: f64| -> Result<f64> {
            Ok(eval_rho(s3, rho)?.map_or(f64::INFINITY, |s| s.value))
        };
        let (mut a, mut b) = (a0, b0);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = value_at(x1)?;
        let mut f2 = value_at(x2)?;
        for _ in 0..48 {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = value_at(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = value_at(x2)?;
            }
        }
        let xm = 0.5 * (a + b);
        if let Some(sol) = eval_rho(s3, xm)? {
            if sol.value < best.value {
                best = SweepResult { value: sol.value, rho: xm, solution: sol };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rho_min_frozen() {
        assert!(close(rho_min(1.0 / 72.0).unwrap(), 1.0 / 6.0, 1e-12));
        assert!(close(rho_min(0.125).unwrap(), 0.5, 1e-12));
        assert!(close(rho_min(1.0 / 32.0).unwrap(), 0.25, 1e-12));
        assert!(rho_min(0.0).is_err());
        assert!(rho_min(0.2).is_err());
    }

    #[test]
    fn structured_three_part_corner() {
        let inst = SpectrumInstance::with_default_caps(1.0 / 72.0, 1.0 / 6.0).unwrap();
        let sol = solve_structured(&inst).unwrap();
        assert!(close(sol.value, 1.0 / 432.0, 1e-12), "value = {}", sol.value);
        // One rho plus two reals at 1/6 (or the equivalent pair form).
        let total: usize = sol.witness.reals.len() + 2 * sol.witness.pairs.len();
        assert_eq!(total, 3);
        assert!(close(sol.witness.first_moment(), 0.5, 1e-12));
        assert!(close(sol.witness.third_moment(), 1.0 / 72.0, 1e-12));
    }

    #[test]
    fn structured_forced_single_rho() {
        let inst = SpectrumInstance::with_default_caps(0.125, 0.5).unwrap();
        let sol = solve_structured(&inst).unwrap();
        assert!(close(sol.value, 1.0 / 16.0, 1e-13));
        assert_eq!(sol.witness.reals, vec![0.5]);
        assert!(sol.witness.pairs.is_empty());
    }

    #[test]
    fn structured_two_part_corner() {
        let inst = SpectrumInstance::with_default_caps(1.0 / 32.0, 0.25).unwrap();
        let sol = solve_structured(&inst).unwrap();
        assert!(close(sol.value, 1.0 / 128.0, 1e-12));
        let total: usize = sol.witness.reals.len() + 2 * sol.witness.pairs.len();
        assert_eq!(total, 2);
    }

    #[test]
    fn infeasible_below_rho_min() {
        let inst = SpectrumInstance::with_default_caps(1.0 / 72.0, 0.1).unwrap();
        match solve_structured(&inst) {
            Err(Error::Infeasible { rho_min: rm, .. }) => assert!(close(rm, 1.0 / 6.0, 1e-12)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn witnesses_satisfy_constraints() {
        for (i, &s3) in [0.02, 0.05, 0.09, 0.12].iter().enumerate() {
            let rmin = rho_min(s3).unwrap();
            let rho = rmin + 0.3 * (0.5 - rmin) * (i as f64 + 1.0) / 4.0;
            let inst = SpectrumInstance::with_default_caps(s3, rho).unwrap();
            let sol = solve_structured(&inst).unwrap();
            assert!(close(sol.witness.first_moment(), 0.5, 1e-10));
            assert!(close(sol.witness.third_moment(), s3, 1e-10));
            assert!(close(sol.witness.fourth_moment(), sol.value, 1e-10));
            for &r in &sol.witness.reals {
                assert!((-1e-10..=rho + 1e-10).contains(&r));
            }
            for &(a, _) in &sol.witness.pairs {
                assert!(a >= -1e-10);
            }
        }
    }

    #[test]
    fn case_one_witnesses_respect_fourth_power_bound() {
        // Real-only witnesses obey sum r^4 >= g(sum r^3).
        for &s3 in &[1.0 / 72.0, 0.02, 0.04, 0.08] {
            let rho = rho_min(s3).unwrap();
            let inst = SpectrumInstance::with_default_caps(s3, rho).unwrap();
            let sol = solve_structured(&inst).unwrap();
            if sol.witness.pairs.is_empty() {
                let cubes: f64 = sol.witness.reals.iter().map(|r| r.powi(3)).sum();
                let fourths: f64 = sol.witness.reals.iter().map(|r| r.powi(4)).sum();
                assert!(fourths >= crate::bounds::g(cubes).unwrap() - 1e-10);
            }
        }
    }

    #[test]
    fn min_over_rho_hits_g() {
        let s3 = 1.0 / 20.0;
        let sweep = min_over_rho(s3).unwrap();
        let g = crate::bounds::g(s3).unwrap();
        assert!(close(sweep.value, g, 1e-8), "value {} vs g {}", sweep.value, g);
        let sweep = min_over_rho(1.0 / 72.0).unwrap();
        assert!(close(sweep.value, 1.0 / 432.0, 1e-9));
        let sweep = min_over_rho(0.125).unwrap();
        assert!(close(sweep.value, 1.0 / 16.0, 1e-9));
    }

    #[test]
    fn numeric_matches_structured_on_corner() {
        let inst = SpectrumInstance::with_default_caps(1.0 / 72.0, 1.0 / 6.0).unwrap();
        let sol = solve_numeric(&inst, 2, 0, Seed(1), 64).unwrap();
        assert!(close(sol.value, 1.0 / 432.0, 1e-7), "value = {}", sol.value);
        let sol = solve_numeric(&inst, 2, 1, Seed(2), 64).unwrap();
        assert!(sol.value >= 1.0 / 432.0 - 1e-7);
    }

    #[test]
    fn numeric_forced_instance() {
        let inst = SpectrumInstance::with_default_caps(0.125, 0.5).unwrap();
        let sol = solve_numeric(&inst, 3, 2, Seed(3), 32).unwrap();
        assert!(close(sol.value, 1.0 / 16.0, 1e-7));
    }

    #[test]
    fn structured_dominates_g_on_random_instances() {
        // 200 random instances in the proven range never undercut g.
        let rng = IndexedRng::new(Seed(0x200));
        let mut worst = f64::INFINITY;
        for i in 0..200u64 {
            let s3 = 1.0 / 72.0 + (0.125 - 1.0 / 72.0) * rng.unit(2 * i);
            let rmin = rho_min(s3).unwrap();
            let rho = rmin + (0.5 - rmin) * rng.unit(2 * i + 1);
            let inst = SpectrumInstance::with_default_caps(s3, rho).unwrap();
            match solve_structured(&inst) {
                Ok(sol) => worst = worst.min(sol.value - crate::bounds::g(s3).unwrap()),
                Err(Error::Infeasible { .. }) => {} // rho = 1/2 with s3 < 1/8
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
        assert!(worst >= -1e-9, "min value - g = {worst}");
    }

    #[test]
    fn default_caps_accept_small_rho() {
        // rho_min(0.001) ~ 0.04496 (11 full parts); caps must admit the
        // wide witnesses of this regime.
        assert!(close(rho_min(0.001).unwrap(), 0.0449620481, 1e-9));
        let inst = SpectrumInstance::with_default_caps(0.001, 0.05).unwrap();
        assert!(inst.k_max >= 30);
        let sol = solve_structured(&inst).unwrap();
        // In this regime the optimum may undercut g (and even zero):
        // such witnesses are not realizable spectra. Only feasibility is
        // asserted here.
        assert!(sol.value.is_finite());
        assert!(close(sol.witness.first_moment(), 0.5, 1e-10));
        assert!(close(sol.witness.third_moment(), 0.001, 1e-10));
    }
}
