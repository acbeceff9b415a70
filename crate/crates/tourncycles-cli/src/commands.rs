use std::fs;
use std::io::Read;
use std::process::ExitCode;

use serde_json::json;

use tourncycles::bounds;
use tourncycles::count;
use tourncycles::generators::{self, BlowupParams, MixedParams};
use tourncycles::rng::Seed;
use tourncycles::spectral;
use tourncycles::spectrum::{self, SpectrumInstance};
use tourncycles::tournament::Tournament;
use tourncycles::trn;
use tourncycles::verify::{self, Suite, VerifyOptions};
use tourncycles::{Error, Result};

use crate::{BoundArgs, CountArgs, GenArgs, OptimizeArgs, RegionArgs, SpectralArgs, VerifyArgs};

const OK: ExitCode = ExitCode::SUCCESS;

/// 17 significant digits: round-trip safe for f64, locale-free.
fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::param(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        fs::read_to_string(path).map_err(|e| Error::param(format!("reading {path}: {e}")))
    }
}

fn write_output(path: Option<&str>, data: &str) -> Result<bool> {
    match path {
        Some(p) => {
            fs::write(p, data).map_err(|e| Error::param(format!("writing {p}: {e}")))?;
            Ok(true)
        }
        None => {
            print!("{data}");
            Ok(false)
        }
    }
}

fn read_reals(path: &str) -> Result<Vec<f64>> {
    let text = read_input(path)?;
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::param(format!("{path}: invalid real {tok:?}")))
        })
        .collect()
}

fn read_matrix(path: &str) -> Result<tourncycles::TournamentMatrix> {
    let text = read_input(path)?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::param(format!("{path}: invalid real {tok:?}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    let mut entries = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::param(format!(
                "{path}: row {} has {} entries, expected {n}",
                i + 1,
                row.len()
            )));
        }
        entries.extend_from_slice(row);
    }
    tourncycles::TournamentMatrix::new(n, entries)
}

fn require<T>(value: Option<T>, what: &str, family: &str) -> Result<T> {
    value.ok_or_else(|| Error::param(format!("--{what} is required for family {family}")))
}

pub fn gen(args: GenArgs) -> Result<ExitCode> {
    let family = args.family.as_str();
    let need_seed = || require(args.seed.map(Seed), "seed", family);
    let (tournament, mut echo) = match family {
        "transitive" => (
            generators::transitive(args.n)?,
            json!({ "family": "transitive", "n": args.n }),
        ),
        "uniform" => {
            let seed = need_seed()?;
            (
                generators::uniform(args.n, seed)?,
                json!({ "family": "uniform", "n": args.n, "seed": seed.0 }),
            )
        }
        "blowup" => {
            let seed = need_seed()?;
            let z = require(args.z, "z", family)?;
            let params = BlowupParams::new(z, args.n, seed)?;
            let sizes = params.part_sizes();
            (
                generators::blowup(&params),
                json!({
                    "family": "blowup", "n": args.n, "z": z, "seed": seed.0,
                    "part_sizes": sizes
                }),
            )
        }
        "circular" => {
            let xi = require(args.xi, "xi", family)?;
            (
                generators::circular(xi, args.n)?,
                json!({ "family": "circular", "n": args.n, "xi": xi }),
            )
        }
        "potential" => {
            let seed = need_seed()?;
            let path = require(args.z_file.as_deref(), "z-file", family)?;
            let p = read_reals(path)?;
            if p.len() != args.n {
                return Err(Error::param(format!(
                    "--z-file holds {} potentials but n = {}",
                    p.len(),
                    args.n
                )));
            }
            (
                generators::potential(&p, seed)?,
                json!({ "family": "potential", "n": args.n, "seed": seed.0, "z_file": path }),
            )
        }
        "mixed" => {
            let seed = need_seed()?;
            let k = require(args.k, "k", family)?;
            let z = require(args.z, "z", family)?;
            let i = require(args.i, "i", family)?;
            let i_prime = require(args.i_prime, "i-prime", family)?;
            let path = require(args.p_file.as_deref(), "p-file", family)?;
            let p = read_reals(path)?;
            let params = MixedParams::new(k, z, i, i_prime, p, args.n, seed)?;
            let sizes = params.part_sizes()?;
            (
                generators::mixed(&params)?,
                json!({
                    "family": "mixed", "n": args.n, "k": k, "z": z,
                    "i": i, "i_prime": i_prime, "seed": seed.0,
                    "part_sizes": sizes
                }),
            )
        }
        "wrandom" => {
            let seed = need_seed()?;
            let path = require(args.matrix.as_deref(), "matrix", family)?;
            let a = read_matrix(path)?;
            (
                generators::wrandom(&a, args.n, seed)?,
                json!({
                    "family": "wrandom", "n": args.n, "seed": seed.0,
                    "matrix": path, "classes": a.n()
                }),
            )
        }
        other => {
            return Err(Error::param(format!(
                "unknown family {other:?} (expected transitive, uniform, blowup, circular, potential, mixed or wrandom)"
            )))
        }
    };

    let text = trn::write_trn(&tournament);
    let wrote_file = write_output(args.out.as_deref(), &text)?;
    if let Some(obj) = echo.as_object_mut() {
        if let Some(out) = &args.out {
            obj.insert("out".into(), json!(out));
        }
    }
    if wrote_file {
        println!("{echo}");
    } else {
        eprintln!("{echo}");
    }
    Ok(OK)
}

fn load_tournament(path: &str) -> Result<Tournament> {
    trn::read_trn(&read_input(path)?)
}

pub fn count(args: CountArgs) -> Result<ExitCode> {
    let t = load_tournament(&args.input)?;
    let report = count::density_report(&t)?;
    let out = match args.format.as_str() {
        "json" => serde_json::to_string(&report).expect("report serializes"),
        "pretty" => serde_json::to_string_pretty(&report).expect("report serializes"),
        other => return Err(Error::param(format!("unknown format {other:?}"))),
    };
    println!("{out}");
    Ok(OK)
}

pub fn spectral(args: SpectralArgs) -> Result<ExitCode> {
    let t = load_tournament(&args.input)?;
    let a = t.to_matrix();
    let profile = spectral::skew_decompose(&a)?;
    let eigen = spectral::eigs_normalized(&a)?;
    let sigma3 = count::sigma(&a, 3)?;
    let sigma4 = count::sigma(&a, 4)?;
    let recon3 = spectral::reconstruct_sigma(&profile, 3)?;
    let recon4 = spectral::reconstruct_sigma(&profile, 4)?;
    let failures = eigen.invariant_failures(sigma3);
    let out = json!({
        "profile": profile,
        "spectrum": eigen,
        "checks": {
            "sigma3": sigma3,
            "sigma4": sigma4,
            "reconstruction_error3": (recon3 - sigma3).abs(),
            "reconstruction_error4": (recon4 - sigma4).abs(),
            "cos2_sum": profile.cos2_sum(),
            "first_moment": eigen.first_moment(),
            "third_moment": eigen.third_moment(),
            "spectrum_failures": failures,
        }
    });
    println!("{out}");
    if out["checks"]["spectrum_failures"].as_array().is_some_and(|v| !v.is_empty()) {
        return Err(Error::numerical("eigenvalue invariants violated"));
    }
    Ok(OK)
}

pub fn bound(args: BoundArgs) -> Result<ExitCode> {
    let d = args.d;
    let g = bounds::g(d)?;
    let (z, k) = if d > 0.0 {
        let rp = bounds::invert_z(d)?;
        (rp.z, rp.k)
    } else {
        (0.0, 0)
    };
    let out = json!({
        "d": d,
        "z": z,
        "k": k,
        "g": g,
        "lm_lower": bounds::lower_envelope_lm(d)?,
        "upper": bounds::upper_envelope(d)?,
    });
    println!("{out}");
    Ok(OK)
}

pub fn region(args: RegionArgs) -> Result<ExitCode> {
    let rows = bounds::region_rows(args.grid)?;
    let sampling = match (args.sample_n, args.seed) {
        (Some(n), Some(seed)) => Some((n, Seed(seed))),
        (Some(_), None) => {
            return Err(Error::param("--sample-n requires --seed"));
        }
        _ => None,
    };
    let mut csv = String::new();
    csv.push_str("d,g,lm_lower,upper,z,k");
    if sampling.is_some() {
        csv.push_str(",t3_sample,t4_sample,sample_n,sample_seed");
    }
    csv.push('\n');
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}",
            fmt_real(row.d),
            fmt_real(row.g),
            fmt_real(row.lm_lower),
            fmt_real(row.upper),
            fmt_real(row.z),
            row.k
        ));
        if let Some((n, seed)) = sampling {
            if row.z > 0.0 {
                let t = generators::blowup(&BlowupParams::new(row.z, n, seed)?);
                let nf = n as f64;
                let t3 = count::cycle_homs(&t, 3)? as f64 / nf.powi(3);
                let t4 = count::cycle_homs(&t, 4)? as f64 / nf.powi(4);
                csv.push_str(&format!(",{},{},{n},{}", fmt_real(t3), fmt_real(t4), seed.0));
            } else {
                csv.push_str(&format!(",{},{},{n},{}", fmt_real(0.0), fmt_real(0.0), seed.0));
            }
        }
        csv.push('\n');
    }
    write_output(args.out.as_deref(), &csv)?;
    Ok(OK)
}

fn instance_for(s3: f64, rho: f64, args: &OptimizeArgs) -> Result<SpectrumInstance> {
    match (args.k, args.l) {
        (Some(k), Some(l)) => SpectrumInstance::new(s3, rho, k, l),
        (None, None) => SpectrumInstance::with_default_caps(s3, rho),
        _ => Err(Error::param("--k and --l must be given together")),
    }
}

fn solve_one(s3: f64, rho: f64, args: &OptimizeArgs) -> Result<serde_json::Value> {
    let inst = instance_for(s3, rho, args)?;
    let structured = spectrum::solve_structured(&inst)?;
    let mut out = serde_json::to_value(&structured).expect("solution serializes");
    if args.numeric {
        let k = args
            .k
            .unwrap_or_else(|| structured.witness.reals.len().saturating_sub(1).max(1));
        let l = args.l.unwrap_or_else(|| structured.witness.pairs.len().max(1));
        let numeric = spectrum::solve_numeric(&inst, k, l, Seed(args.seed), args.restarts)?;
        out = json!({
            "structured": out,
            "numeric": numeric,
            "gap": (structured.value - numeric.value).abs(),
        });
    }
    Ok(out)
}

pub fn optimize(args: OptimizeArgs) -> Result<ExitCode> {
    if let Some(path) = &args.batch {
        let text = read_input(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("s3") {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.and_then(|t| t.trim().parse().ok()).ok_or_else(|| {
                    Error::param(format!("{path}:{}: expected \"s3,rho\"", lineno + 1))
                })
            };
            let s3 = parse(parts.next())?;
            let rho = parse(parts.next())?;
            println!("{}", solve_one(s3, rho, &args)?);
        }
        return Ok(OK);
    }

    let s3 = require(args.s3, "s3", "optimize")?;
    if args.sweep {
        let sweep = spectrum::min_over_rho(s3)?;
        println!("{}", serde_json::to_string(&sweep).expect("sweep serializes"));
        return Ok(OK);
    }
    let rho = require(args.rho, "rho", "optimize")?;
    println!("{}", solve_one(s3, rho, &args)?);
    Ok(OK)
}

pub fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let mut opts = VerifyOptions::default();
    if let Some(n) = args.max_n {
        opts.max_n = n;
    }
    if let Some(seed) = args.seed {
        opts.seed = Seed(seed);
    }
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::all().to_vec()
    } else {
        vec![args.suite.parse()?]
    };
    let mut all_passed = true;
    for suite in suites {
        if suite == Suite::SmallExhaustive && opts.max_n >= 7 {
            eprintln!(
                "enumerating {} tournaments at n = {} ...",
                count::enumeration_count(opts.max_n),
                opts.max_n
            );
        }
        let report = verify::run_suite(suite, &opts)?;
        all_passed &= report.passed;
        println!("{}", serde_json::to_string(&report).expect("report serializes"));
    }
    if all_passed {
        Ok(OK)
    } else {
        Ok(ExitCode::from(3))
    }
}
