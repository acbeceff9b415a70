//! Verification suites: machine-checkable statements tying the
//! generators, counters, spectral decomposition, bound curve and
//! optimizer together, each with pinned tolerances.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds;
use crate::count::{self, EnumerationOptions};
use crate::error::{Error, Result};
use crate::generators::{self, BlowupParams};
use crate::rng::{IndexedRng, Seed};
use crate::spectral;
use crate::spectrum::{self, SpectrumInstance};

pub const DEFAULT_SEED: u64 = 0xC3C4;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult { name: name.to_string(), passed, detail, witness: None }
    }

    fn with_witness(mut self, witness: String) -> Self {
        self.witness = Some(witness);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<CheckResult>) -> Self {
        SuiteReport {
            suite: suite.name().to_string(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    SmallExhaustive,
    EqualityFamily,
    SpectralIdentities,
    BridgeIdentities,
    IdentityT4,
    OptimizerCrosscheck,
    RegionConsistency,
}

impl Suite {
    pub fn all() -> [Suite; 7] {
        [
            Suite::SmallExhaustive,
            Suite::EqualityFamily,
            Suite::SpectralIdentities,
            Suite::BridgeIdentities,
            Suite::IdentityT4,
            Suite::OptimizerCrosscheck,
            Suite::RegionConsistency,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::SmallExhaustive => "small-exhaustive",
            Suite::EqualityFamily => "equality-family",
            Suite::SpectralIdentities => "spectral-identities",
            Suite::BridgeIdentities => "bridge-identities",
            Suite::IdentityT4 => "identity-t4",
            Suite::OptimizerCrosscheck => "optimizer-crosscheck",
            Suite::RegionConsistency => "region-consistency",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small-exhaustive" => Ok(Suite::SmallExhaustive),
            "equality-family" => Ok(Suite::EqualityFamily),
            "spectral-identities" => Ok(Suite::SpectralIdentities),
            "bridge-identities" => Ok(Suite::BridgeIdentities),
            "identity-t4" => Ok(Suite::IdentityT4),
            "optimizer-crosscheck" => Ok(Suite::OptimizerCrosscheck),
            "region-consistency" => Ok(Suite::RegionConsistency),
            _ => Err(Error::param(format!("unknown suite {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Order for the exhaustive sweep (small-exhaustive suite).
    pub max_n: u32,
    pub seed: Seed,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { max_n: 6, seed: Seed(DEFAULT_SEED) }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::SmallExhaustive => small_exhaustive(opts.max_n)?,
        Suite::EqualityFamily => equality_family(opts.seed)?,
        Suite::SpectralIdentities => spectral_identities(opts.seed)?,
        Suite::BridgeIdentities => bridge_identities(opts.seed)?,
        Suite::IdentityT4 => identity_t4(opts.seed)?,
        Suite::OptimizerCrosscheck => optimizer_crosscheck(opts.seed)?,
        Suite::RegionConsistency => region_consistency(opts.seed)?,
    };
    Ok(SuiteReport::new(suite, checks))
}

// ---------------------------------------------------------------------------
// small-exhaustive: sigma4 >= g(sigma3) - 1e-10 whenever sigma3 >= 1/72,
// over every tournament of the given order.
// ---------------------------------------------------------------------------

fn small_exhaustive(n: u32) -> Result<Vec<CheckResult>> {
    let opts = EnumerationOptions { allow_large: n > 7 };
    let summary = count::enumeration_summary(n, opts)?;
    let expected = count::enumeration_count(n);
    let mut checks = vec![CheckResult::new(
        "visited-all",
        summary.visited == expected,
        format!("visited {} of {expected} tournaments at n = {n}", summary.visited),
    )];
    let gap = summary.min_gap.unwrap_or(f64::INFINITY);
    let mut c = CheckResult::new(
        "sigma4-above-g",
        summary.eligible > 0 && gap >= -1e-10,
        format!(
            "min sigma4 - g(sigma3) = {gap:.3e} over {} tournaments with sigma3 >= 1/72",
            summary.eligible
        ),
    );
    if let Some(arg) = &summary.argmin {
        c = c.with_witness(arg.trn.clone());
    }
    checks.push(c);
    Ok(checks)
}

// ---------------------------------------------------------------------------
// equality-family: random potential matrices sit on the curve and are
// recognized by the membership test.
// ---------------------------------------------------------------------------

fn equality_family(seed: Seed) -> Result<Vec<CheckResult>> {
    let schedule: [(usize, usize); 3] = [(20, 40), (100, 40), (500, 20)];
    let mut worst_s3_margin = f64::INFINITY; // sigma3 - 1/32
    let mut worst_curve = 0.0f64; // |sigma4 - g(sigma3)|
    let mut worst_recover = 0.0f64;
    let mut all_recognized = true;
    let mut index = 0u64;
    for &(n, reps) in &schedule {
        for _ in 0..reps {
            let rng = IndexedRng::new(Seed(seed.0.wrapping_add(0x51_0000 + index)));
            index += 1;
            let z: Vec<f64> = (0..n).map(|i| 0.5 * rng.unit(i as u64)).collect();
            let a = generators::potential_matrix(&z)?;
            let s3 = count::sigma(&a, 3)?;
            let s4 = count::sigma(&a, 4)?;
            worst_s3_margin = worst_s3_margin.min(s3 - 1.0 / 32.0);
            worst_curve = worst_curve.max((s4 - bounds::g(s3)?).abs());
            match spectral::extremality_test(&a, 1e-8) {
                Some(rec) => {
                    let zmin = z.iter().cloned().fold(f64::INFINITY, f64::min);
                    for (r, zi) in rec.iter().zip(&z) {
                        worst_recover = worst_recover.max((r - (zi - zmin)).abs());
                    }
                }
                None => all_recognized = false,
            }
        }
    }
    Ok(vec![
        CheckResult::new(
            "sigma3-floor",
            worst_s3_margin >= -1e-10,
            format!("min sigma3 - 1/32 = {worst_s3_margin:.3e} over 100 potential matrices"),
        ),
        CheckResult::new(
            "on-the-curve",
            worst_curve <= 1e-9,
            format!("max |sigma4 - g(sigma3)| = {worst_curve:.3e}"),
        ),
        CheckResult::new(
            "potentials-recovered",
            all_recognized && worst_recover <= 1e-9,
            format!(
                "all recognized = {all_recognized}, max |z - z_fit| = {worst_recover:.3e}"
            ),
        ),
    ])
}

// ---------------------------------------------------------------------------
// spectral-identities: block-form reconstruction of sigma3/sigma4 and
// the profile invariants on random tournaments.
// ---------------------------------------------------------------------------

fn spectral_identities(seed: Seed) -> Result<Vec<CheckResult>> {
    let orders = [51usize, 100, 301];
    let mut worst_recon = 0.0f64;
    let mut worst_cos2 = 0.0f64;
    let mut worst_cs = f64::INFINITY; // sum lambda^4 - (sum lambda^2 cos^2)^2
    for i in 0..50u64 {
        let n = orders[(i % 3) as usize];
        let t = generators::uniform(n, Seed(seed.0.wrapping_add(0x5BEC + i)))?;
        let a = t.to_matrix();
        let profile = spectral::skew_decompose(&a)?;
        for ell in [3usize, 4] {
            let direct = count::sigma(&a, ell)?;
            let recon = spectral::reconstruct_sigma(&profile, ell)?;
            worst_recon = worst_recon.max((direct - recon).abs());
        }
        worst_cos2 = worst_cos2.max((profile.cos2_sum() - 1.0).abs());
        let s2 = profile.sum_lambda2_cos2();
        worst_cs = worst_cs.min(profile.sum_lambda4() - s2 * s2);
    }
    Ok(vec![
        CheckResult::new(
            "reconstruction",
            worst_recon <= 1e-8,
            format!("max |sigma_l - reconstruction| = {worst_recon:.3e} over 50 tournaments"),
        ),
        CheckResult::new(
            "cos2-partition",
            worst_cos2 <= 1e-8,
            format!("max |sum cos^2 alpha - 1| = {worst_cos2:.3e}"),
        ),
        CheckResult::new(
            "cauchy-schwarz",
            worst_cs >= -1e-8,
            format!("min sum lambda^4 - (sum lambda^2 cos^2 alpha)^2 = {worst_cs:.3e}"),
        ),
    ])
}

// ---------------------------------------------------------------------------
// bridge-identities: sigma3 = t3 + 1/(8n^2), sigma4 = t4 + 2t3/n +
// 1/(16n^3), exact to 1e-10 across the full n <= 6 enumeration and
// random larger tournaments.
// ---------------------------------------------------------------------------

fn bridge_residuals(t: &crate::Tournament) -> Result<(f64, f64)> {
    let n = t.n();
    let a = t.to_matrix();
    let h3 = count::cycle_homs(t, 3)?;
    let h4 = count::cycle_homs(t, 4)?;
    let r3 = (count::sigma(&a, 3)? - count::sigma3_from_counts(n, h3)).abs();
    let r4 = (count::sigma(&a, 4)? - count::sigma4_from_counts(n, h3, h4)).abs();
    Ok((r3, r4))
}

fn bridge_identities(seed: Seed) -> Result<Vec<CheckResult>> {
    let mut worst = 0.0f64;
    for n in 1..=6u32 {
        let mut err: Result<()> = Ok(());
        count::enumerate_all(n, EnumerationOptions::default(), |t| {
            if err.is_ok() {
                match bridge_residuals(t) {
                    Ok((r3, r4)) => worst = worst.max(r3).max(r4),
                    Err(e) => err = Err(e),
                }
            }
        })?;
        err?;
    }
    let exhaustive = CheckResult::new(
        "exhaustive-n6",
        worst <= 1e-10,
        format!("max bridge residual over all n <= 6 tournaments = {worst:.3e}"),
    );
    let orders = [50usize, 120, 200];
    let mut worst_rand = 0.0f64;
    for i in 0..50u64 {
        let n = orders[(i % 3) as usize];
        let t = generators::uniform(n, Seed(seed.0.wrapping_add(0xB71D6E + i)))?;
        let (r3, r4) = bridge_residuals(&t)?;
        worst_rand = worst_rand.max(r3).max(r4);
    }
    Ok(vec![
        exhaustive,
        CheckResult::new(
            "random-large",
            worst_rand <= 1e-10,
            format!("max bridge residual over 50 random tournaments = {worst_rand:.3e}"),
        ),
    ])
}

// ---------------------------------------------------------------------------
// identity-t4: 8 t3 + 24 tT4 - 6 t4 = 1 - O(1/n) with a fitted constant
// and the expected halving from n = 200 to n = 400.
// ---------------------------------------------------------------------------

fn identity_t4(seed: Seed) -> Result<Vec<CheckResult>> {
    let orders = [100usize, 200, 400];
    let mut means = Vec::new();
    for (oi, &n) in orders.iter().enumerate() {
        let mut total = 0.0f64;
        let reps = 8u64;
        for i in 0..reps {
            let t = generators::uniform(n, Seed(seed.0.wrapping_add(0x14_000 + 100 * oi as u64 + i)))?;
            let r = count::density_report(&t)?;
            total += r.identity_residual.abs();
        }
        means.push(total / reps as f64);
    }
    let fitted_c = orders
        .iter()
        .zip(&means)
        .map(|(&n, &m)| n as f64 * m)
        .fold(0.0f64, f64::max);
    let ratio = means[2] / means[1];
    Ok(vec![
        CheckResult::new(
            "fitted-constant",
            fitted_c <= 10.0,
            format!(
                "max n * mean|residual| = {fitted_c:.3} over n in {{100, 200, 400}} (means {:.4e}, {:.4e}, {:.4e})",
                means[0], means[1], means[2]
            ),
        ),
        CheckResult::new(
            "one-over-n-scaling",
            ratio <= 0.6,
            format!("residual(400) / residual(200) = {ratio:.3}"),
        ),
    ])
}

// ---------------------------------------------------------------------------
// optimizer-crosscheck: corner value, sweep bound against g, numeric
// agreement and the feasibility boundary.
// ---------------------------------------------------------------------------

fn optimizer_crosscheck(seed: Seed) -> Result<Vec<CheckResult>> {
    let mut checks = Vec::new();

    let corner = spectrum::solve_structured(&SpectrumInstance::with_default_caps(
        1.0 / 72.0,
        1.0 / 6.0,
    )?)?;
    checks.push(CheckResult::new(
        "corner-value",
        (corner.value - 1.0 / 432.0).abs() <= 1e-9,
        format!("solve(1/72, 1/6) = {} vs 1/432 ({})", corner.value, corner.case_tag),
    ));

    let mut worst_margin = f64::INFINITY;
    for i in 0..40 {
        let s3 = 1.0 / 72.0 + (0.125 - 1.0 / 72.0) * i as f64 / 39.0;
        let sweep = spectrum::min_over_rho(s3)?;
        worst_margin = worst_margin.min(sweep.value - bounds::g(s3)?);
    }
    checks.push(CheckResult::new(
        "sweep-dominates-g",
        worst_margin >= -1e-8,
        format!("min over 40 grid values of min_over_rho(s3) - g(s3) = {worst_margin:.3e}"),
    ));

    let rng = IndexedRng::new(Seed(seed.0 ^ 0x0B71));
    let mut worst_gap = 0.0f64;
    let mut numeric_below = 0usize;
    for i in 0..50u64 {
        let s3 = 1.0 / 72.0 + (0.125 - 1.0 / 72.0) * rng.unit(2 * i);
        let rmin = spectrum::rho_min(s3)?;
        let rho = rmin + (0.49 - rmin).max(0.0) * rng.unit(2 * i + 1);
        let inst = SpectrumInstance::with_default_caps(s3, rho)?;
        let structured = spectrum::solve_structured(&inst)?;
        let k = structured.witness.reals.len().saturating_sub(1).max(1);
        let l = structured.witness.pairs.len();
        let numeric = spectrum::solve_numeric(&inst, k, l, Seed(seed.0 ^ (0x9000 + i)), 64)?;
        worst_gap = worst_gap.max((structured.value - numeric.value).abs());
        if numeric.value < structured.value - 1e-6 {
            numeric_below += 1;
        }
    }
    checks.push(CheckResult::new(
        "numeric-agreement",
        worst_gap <= 1e-6 && numeric_below == 0,
        format!("max |structured - numeric| = {worst_gap:.3e} over 50 instances"),
    ));

    let mut boundary_ok = true;
    for i in 0..10u64 {
        let s3 = 1.0 / 72.0 + (0.125 - 1.0 / 72.0) * i as f64 / 9.0;
        let rmin = spectrum::rho_min(s3)?;
        let delta = if i % 2 == 0 { 1e-6 } else { 1e-3 };
        let inst = SpectrumInstance::with_default_caps(s3, (rmin - delta).max(0.0))?;
        match spectrum::solve_structured(&inst) {
            Err(Error::Infeasible { .. }) => {}
            _ => boundary_ok = false,
        }
    }
    checks.push(CheckResult::new(
        "feasibility-boundary",
        boundary_ok,
        "instances with rho < rho_min(s3) - 1e-9 report infeasible".to_string(),
    ));

    Ok(checks)
}

// ---------------------------------------------------------------------------
// region-consistency: envelope ordering on a fine grid, regime-boundary
// continuity, the right-inverse property, and sampled construction
// densities landing on the curve.
// ---------------------------------------------------------------------------

fn region_consistency(seed: Seed) -> Result<Vec<CheckResult>> {
    let mut checks = Vec::new();

    // Envelope ordering and touch points on a 1e5-point grid.
    let grid = 100_000usize;
    let mut worst_lower = f64::INFINITY; // g - lm
    let mut worst_upper = f64::INFINITY; // 2d/3 - g
    let mut monotone = f64::INFINITY; // adjacent g increments
    let mut stray_equality: Option<f64> = None;
    let mut prev_g = 0.0f64;
    for i in 0..=grid {
        let d = 0.125 * i as f64 / grid as f64;
        let gd = bounds::g(d)?;
        let lm = bounds::lower_envelope_lm(d)?;
        let up = bounds::upper_envelope(d)?;
        worst_lower = worst_lower.min(gd - lm);
        worst_upper = worst_upper.min(up - gd);
        if i > 0 {
            monotone = monotone.min(gd - prev_g);
        }
        prev_g = gd;
        if (gd - lm).abs() <= 1e-9 {
            let near = d.abs().min((d - 1.0 / 32.0).abs()).min((d - 0.125).abs());
            if near > 1e-3 && stray_equality.is_none() {
                stray_equality = Some(d);
            }
        }
    }
    checks.push(CheckResult::new(
        "envelope-order",
        worst_lower >= -1e-12 && worst_upper >= -1e-12,
        format!("min g - lm = {worst_lower:.3e}, min 2d/3 - g = {worst_upper:.3e} on 1e5 grid"),
    ));
    checks.push(CheckResult::new(
        "g-monotone",
        monotone >= -1e-12,
        format!("min adjacent g increment = {monotone:.3e}"),
    ));
    checks.push(CheckResult::new(
        "touch-points",
        stray_equality.is_none(),
        match stray_equality {
            None => "g = lm only near d in {0, 1/32, 1/8}".to_string(),
            Some(d) => format!("unexpected equality at d = {d}"),
        },
    ));

    // Regime boundaries match from both sides; invert_z is a right inverse.
    let mut worst_boundary = 0.0f64;
    for k in 2u32..=30 {
        let b = 1.0 / (8.0 * (k * k) as f64);
        let left = bounds::g(b * (1.0 - 1e-12))?;
        let right = bounds::g(b * (1.0 + 1e-12))?;
        worst_boundary = worst_boundary.max((left - right).abs());
    }
    checks.push(CheckResult::new(
        "regime-boundaries",
        worst_boundary <= 1e-10,
        format!("max two-sided g mismatch at regime boundaries = {worst_boundary:.3e}"),
    ));
    let mut worst_inverse = 0.0f64;
    for i in 1..=10_000usize {
        let d = 0.125 * i as f64 / 10_000.0;
        let rp = bounds::invert_z(d)?;
        let (dz, _) = bounds::construction_point(rp.z)?;
        worst_inverse = worst_inverse.max((dz - d).abs());
    }
    checks.push(CheckResult::new(
        "right-inverse",
        worst_inverse <= 1e-12,
        format!("max |d(invert_z(d).z) - d| = {worst_inverse:.3e} on 1e4 grid"),
    ));

    // Region rows honor the pointwise ordering.
    let rows = bounds::region_rows(129)?;
    let rows_ok = rows.iter().all(|r| r.lm_lower <= r.g + 1e-9 && r.g <= r.upper + 1e-9);
    checks.push(CheckResult::new(
        "region-rows",
        rows_ok,
        "lm <= g <= upper at 1e-9 across the 129-row table".to_string(),
    ));

    // Sampled construction densities (blow-ups and the circular family).
    let mut blowup_ok = true;
    let mut blowup_detail = String::new();
    for (z, want3, want4) in [
        (0.5, 1.0 / 32.0, 1.0 / 128.0),
        (1.0 / 3.0, 1.0 / 72.0, 1.0 / 432.0),
    ] {
        let t = generators::blowup(&BlowupParams::new(z, 3000, Seed(seed.0 ^ 0xB10))?);
        let n = t.n() as f64;
        let t3 = count::cycle_homs(&t, 3)? as f64 / n.powi(3);
        let t4 = count::cycle_homs(&t, 4)? as f64 / n.powi(4);
        if (t3 - want3).abs() > 0.005 || (t4 - want4).abs() > 0.005 {
            blowup_ok = false;
        }
        blowup_detail.push_str(&format!(
            "z = {z:.4}: (t3, t4) = ({t3:.6}, {t4:.6}) vs ({want3:.6}, {want4:.6}); "
        ));
    }
    checks.push(CheckResult::new(
        "blowup-densities",
        blowup_ok,
        blowup_detail.trim_end_matches("; ").to_string(),
    ));

    let mut circ_worst = 0.0f64;
    for i in 1..=5 {
        let xi = 0.1 * i as f64;
        let t = generators::circular(xi, 1001)?;
        let n = t.n() as f64;
        let t3 = count::cycle_homs(&t, 3)? as f64 / n.powi(3);
        let t4 = count::cycle_homs(&t, 4)? as f64 / n.powi(4);
        circ_worst = circ_worst.max((t4 - 2.0 * t3 / 3.0).abs());
    }
    checks.push(CheckResult::new(
        "circular-upper-boundary",
        circ_worst <= 0.01,
        format!("max |t4 - 2 t3 / 3| = {circ_worst:.4} over xi in {{0.1..0.5}}, n = 1001"),
    ));

    Ok(checks)
}
