//! The lower-bound curve `g` for 4-cycle density at given 3-cycle
//! density, its regime parametrization, and the two envelope formulas.
//!
//! For a part-size parameter `z` in `(0, 1]`, the balanced blow-up
//! construction with `floor(1/z)` full parts and one remainder part has
//! densities
//!
//! ```text
//! t3(z) = (floor(1/z) z^3 + (1 - floor(1/z) z)^3) / 8
//! t4(z) = (floor(1/z) z^4 + (1 - floor(1/z) z)^4) / 16
//! ```
//!
//! and `g` maps `t3(z)` to `t4(z)` (with `g(0) = 0`). On the regime of
//! `k` parts, `d` ranges over `[1/(8k^2), 1/(8(k-1)^2)]` while `z` runs
//! through `[1/k, 1/(k-1)]`, and `d(z)` is nondecreasing, which makes
//! bisection valid.

use serde::Serialize;

use crate::error::{Error, Result};

/// Domain slack for inputs that should lie in `[0, 1/8]`.
const DOMAIN_TOL: f64 = 1e-12;
/// Bisection target on the density residual.
const BISECT_TOL: f64 = 1e-13;
/// Slack used when flooring quantities that are integers in exact
/// arithmetic but may sit just below one in floats.
const FLOOR_TOL: f64 = 1e-9;

pub const D_MAX: f64 = 0.125;

/// A 3-cycle density together with its regime and part-size parameter.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegimePoint {
    pub d: f64,
    pub z: f64,
    pub k: u32,
}

/// A row of the feasible-region table emitted by the `region` command.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegionRow {
    pub d: f64,
    pub g: f64,
    pub lm_lower: f64,
    pub upper: f64,
    pub z: f64,
    pub k: u32,
}

pub(crate) fn fuzzy_floor(x: f64) -> f64 {
    (x + FLOOR_TOL).floor()
}

/// 3-cycle density of the construction in the regime of `k` parts:
/// `k - 1` full parts of weight `z` plus the remainder.
fn d_in_regime(z: f64, k: u32) -> f64 {
    let m = (k - 1) as f64;
    let w = 1.0 - m * z;
    (m * z.powi(3) + w.powi(3)) / 8.0
}

fn g_in_regime(z: f64, k: u32) -> f64 {
    let m = (k - 1) as f64;
    let w = 1.0 - m * z;
    (m * z.powi(4) + w.powi(4)) / 16.0
}

fn check_d_domain(d: f64, name: &str) -> Result<f64> {
    if !d.is_finite() || !(-DOMAIN_TOL..=D_MAX + DOMAIN_TOL).contains(&d) {
        return Err(Error::param(format!("{name} = {d} outside [0, 1/8]")));
    }
    Ok(d.clamp(0.0, D_MAX))
}

/// Finds the regime `k` and part-size `z` for a 3-cycle density
/// `d` in `(0, 1/8]`. Ties at regime boundaries resolve to the smaller
/// `k`; `z` is located by bisection to a density residual of 1e-13.
pub fn invert_z(d: f64) -> Result<RegimePoint> {
    let d = check_d_domain(d, "d")?;
    if d <= 0.0 {
        return Err(Error::param("d = 0 has no finite regime"));
    }
    if d >= D_MAX - DOMAIN_TOL {
        return Ok(RegimePoint { d: D_MAX, z: 1.0, k: 1 });
    }
    // d in [1/(8k^2), 1/(8(k-1)^2)); scan ascending so boundary ties
    // pick the smaller k.
    let k0 = (1.0 / (8.0 * d)).sqrt().floor() as u32;
    let mut k = None;
    for cand in k0.saturating_sub(1).max(2)..=k0 + 2 {
        let lo = 1.0 / (8.0 * cand as f64 * cand as f64);
        let hi = 1.0 / (8.0 * (cand - 1) as f64 * (cand - 1) as f64);
        if d >= lo && d <= hi {
            k = Some(cand);
            break;
        }
    }
    let k = k.ok_or_else(|| Error::numerical(format!("no regime bracket found for d = {d}")))?;
    let z_lo = 1.0 / k as f64;
    let z_hi = (1.0 / (k - 1) as f64).min(1.0);
    let z = bisect_increasing(|z| d_in_regime(z, k) - d, z_lo, z_hi)?;
    Ok(RegimePoint { d, z, k })
}

/// Bisects an increasing function to a residual of `BISECT_TOL`. Falls
/// back to a grid scan for a sign change if the bracket looks bad.
fn bisect_increasing(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (f(lo), f(hi));
    if flo.abs() <= BISECT_TOL {
        return Ok(lo);
    }
    if fhi.abs() <= BISECT_TOL {
        return Ok(hi);
    }
    if flo > 0.0 || fhi < 0.0 {
        // Bracket does not straddle the root; refine on a grid first.
        let mut found = None;
        let steps = 1024;
        let mut prev = (lo, flo);
        for s in 1..=steps {
            let x = lo + (hi - lo) * s as f64 / steps as f64;
            let fx = f(x);
            if fx.abs() <= BISECT_TOL {
                return Ok(x);
            }
            if prev.1 < 0.0 && fx > 0.0 {
                found = Some((prev.0, x));
                break;
            }
            prev = (x, fx);
        }
        match found {
            Some((a, b)) => {
                lo = a;
                hi = b;
            }
            None => {
                return Err(Error::numerical(format!(
                    "no sign change in bracket [{lo}, {hi}] (f = {flo}, {fhi})"
                )))
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() <= BISECT_TOL || hi - lo <= f64::EPSILON * mid.abs() {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The conjectured minimum 4-cycle density at 3-cycle density `d`.
/// Continuous and nondecreasing on `[0, 1/8]`, with `g(0) = 0`.
pub fn g(d: f64) -> Result<f64> {
    let d = check_d_domain(d, "d")?;
    if d <= 0.0 {
        return Ok(0.0);
    }
    let rp = invert_z(d)?;
    Ok(g_in_regime(rp.z, rp.k))
}

/// Quadratic lower envelope `12 d^2 / (1 + 16 d)`, valid for every
/// tournament in the limit; touches `g` exactly at `d` in `{0, 1/32, 1/8}`.
pub fn lower_envelope_lm(d: f64) -> Result<f64> {
    let d = check_d_domain(d, "d")?;
    Ok(12.0 * d * d / (1.0 + 16.0 * d))
}

/// Linear upper envelope `2 d / 3` for the maximum 4-cycle density.
pub fn upper_envelope(d: f64) -> Result<f64> {
    let d = check_d_domain(d, "d")?;
    Ok(2.0 * d / 3.0)
}

/// The exact `(t3, t4)` limit point of the blow-up construction with
/// part-size parameter `z`; satisfies `t4 = g(t3)` to 1e-12.
pub fn construction_point(z: f64) -> Result<(f64, f64)> {
    if !z.is_finite() || z <= 0.0 || z > 1.0 + DOMAIN_TOL {
        return Err(Error::param(format!("z = {z} outside (0, 1]")));
    }
    let z = z.min(1.0);
    let m = fuzzy_floor(1.0 / z);
    let w = (1.0 - m * z).max(0.0);
    Ok((
        (m * z.powi(3) + w.powi(3)) / 8.0,
        (m * z.powi(4) + w.powi(4)) / 16.0,
    ))
}

/// The region table on a uniform `grid`-point mesh of `[0, 1/8]`.
pub fn region_rows(grid: usize) -> Result<Vec<RegionRow>> {
    if grid < 2 {
        return Err(Error::param("grid must have at least 2 points"));
    }
    let mut rows = Vec::with_capacity(grid);
    for s in 0..grid {
        let d = D_MAX * s as f64 / (grid - 1) as f64;
        let (z, k) = if d <= 0.0 {
            (0.0, 0)
        } else {
            let rp = invert_z(d)?;
            (rp.z, rp.k)
        };
        rows.push(RegionRow {
            d,
            g: g(d)?,
            lm_lower: lower_envelope_lm(d)?,
            upper: upper_envelope(d)?,
            z,
            k,
        });
    }
    Ok(rows)
}
