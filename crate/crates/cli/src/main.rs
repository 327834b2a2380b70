use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use diffposet::chains::{attach_chain_pair, find_chain_pair, verify_chain_pair, AttachedPoset};
use diffposet::constructions::FamilySpec;
use diffposet::fundamental::{compute_v, divisor_bound, identity_residual, minimal_integral_multiplier};
use diffposet::hasse::{parse_hasse, write_hasse};
use diffposet::smith::{check_divisibility_bound, random_oracle_trials};
use diffposet::spectra::{certify_strict_growth, char_poly_factor_check, weak_growth_check};
use diffposet::verify::{verify_all, VerifyConfig};
use diffposet::GradedPoset;

#[derive(Parser)]
#[command(name = "diffposet", version, about = "Build and verify r-differential posets with exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Young,
    Yf,
    Product,
}

#[derive(clap::Args)]
struct Input {
    /// Poset in diffposet-hasse v1 format
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Override the differential parameter r
    #[arg(long)]
    r: Option<u64>,
    /// Emit line-delimited JSON records
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build a standard family and write it as diffposet-hasse v1
    Build {
        #[arg(long, value_enum)]
        family: Family,
        /// Comma-separated factor families for products, e.g. young,yf
        #[arg(long)]
        factors: Option<String>,
        /// Top rank N
        #[arg(long)]
        ranks: usize,
        /// Output file (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify DU - UD = rI rank by rank
    Check {
        #[command(flatten)]
        input: Input,
    },
    /// Find and verify the chain pair t, s
    Chains {
        #[command(flatten)]
        input: Input,
    },
    /// Compute v_{n,k} and check (DU_n + kI) v_{n,k} = t_n
    Fundamental {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u64,
    },
    /// Smith form of DU_n + kI against the divisibility bound
    Smith {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u64,
    },
    /// Compare det(DU_n + tI) with the product formula
    Spectrum {
        #[command(flatten)]
        input: Input,
        /// Single rank; all checkable ranks if omitted
        #[arg(long)]
        n: Option<usize>,
    },
    /// Strict-growth certificates
    CertifyGrowth {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        n: Option<usize>,
        /// Certify every rank 2..top-1
        #[arg(long)]
        all: bool,
    },
    /// Run every check over ranges of n and k
    VerifyAll {
        #[command(flatten)]
        input: Input,
        /// k values: a range like 1..3 or a list like 1,2,5
        #[arg(long, default_value = "1..3")]
        k: String,
        /// n range like 0..9 (default: every checkable rank)
        #[arg(long)]
        n: Option<String>,
    },
    /// Compare the last Smith entry with the inverse oracle on random matrices
    SmithOracle {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        size: usize,
        /// Entries are drawn from [-bound, bound]
        #[arg(long, default_value_t = 9)]
        bound: i64,
        #[arg(long, default_value_t = 20_140_101)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn load(path: &Path) -> Result<GradedPoset> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_hasse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn resolve_r(poset: &GradedPoset, input: &Input) -> Result<u64> {
    match input.r {
        Some(0) => bail!("r must be positive"),
        Some(r) => Ok(r),
        None => Ok(poset.r_or_infer()?),
    }
}

fn attached(poset: &GradedPoset, r: u64) -> Result<AttachedPoset> {
    let pair = find_chain_pair(poset, r).context("finding the chain pair")?;
    Ok(attach_chain_pair(poset, &pair)?)
}

fn parse_range(spec: &str) -> Result<RangeInclusive<u64>> {
    let (a, b) = spec.split_once("..").with_context(|| format!("expected a..b, got '{spec}'"))?;
    let a: u64 = a.trim().parse().with_context(|| format!("bad range start in '{spec}'"))?;
    let b: u64 = b.trim().trim_start_matches('=').parse().with_context(|| format!("bad range end in '{spec}'"))?;
    if a > b {
        bail!("empty range '{spec}'");
    }
    Ok(a..=b)
}

fn parse_k_values(spec: &str) -> Result<Vec<u64>> {
    let values: Vec<u64> = if spec.contains("..") {
        parse_range(spec)?.collect()
    } else {
        spec.split(',').map(|s| s.trim().parse().with_context(|| format!("bad k '{s}'"))).collect::<Result<_>>()?
    };
    if values.contains(&0) {
        bail!("k values must be positive");
    }
    Ok(values)
}

fn emit(out: &mut impl Write, value: serde_json::Value) -> Result<()> {
    writeln!(out, "{value}")?;
    Ok(())
}

fn run(cli: Cli, out: &mut impl Write) -> Result<bool> {
    match cli.command {
        Command::Build { family, factors, ranks, out: path } => {
            let spec = match (family, factors) {
                (Family::Young, _) => FamilySpec::Young,
                (Family::Yf, _) => FamilySpec::YoungFibonacci,
                (Family::Product, Some(f)) => FamilySpec::product_of(&f)?,
                (Family::Product, None) => bail!("--family product needs --factors"),
            };
            let text = write_hasse(&spec.build(ranks)?);
            match path {
                Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(true)
        }

        Command::Check { input } => {
            let poset = load(&input.input)?;
            let r = resolve_r(&poset, &input)?;
            let report = poset.check_axioms(r);
            if input.json {
                emit(out, serde_json::to_value(&report)?)?;
            } else {
                writeln!(out, "{report}")?;
            }
            Ok(report.passed())
        }

        Command::Chains { input } => {
            let poset = load(&input.input)?;
            let r = resolve_r(&poset, &input)?;
            let pair = find_chain_pair(&poset, r)?;
            let report = verify_chain_pair(&poset, &pair, r);
            if input.json {
                let label = |n: usize, i: usize| poset.label(n, i).map(str::to_string);
                let render = |c: &[usize]| -> Vec<serde_json::Value> {
                    c.iter().enumerate().map(|(n, &i)| json!({"rank": n, "index": i, "label": label(n, i)})).collect()
                };
                emit(out, json!({"t": render(&pair.t), "s": render(&pair.s), "report": report}))?;
            } else {
                writeln!(out, "{}", pair.describe(&poset))?;
                writeln!(out, "{report}")?;
            }
            Ok(report.passed())
        }

        Command::Fundamental { input, n, k } => {
            let poset = load(&input.input)?;
            let r = resolve_r(&poset, &input)?;
            let att = attached(&poset.clone().with_r(Some(r)), r)?;
            let v = compute_v(&att.poset, &att.pair, n, k)?;
            let check = identity_residual(&att.poset, &att.pair, &v)?;
            let multiplier = minimal_integral_multiplier(&v);
            let bound = divisor_bound(r, n as u64, k);
            let coeffs: Vec<(usize, String)> =
                v.value.coeffs().iter().map(|(&i, c)| (att.original_index(n, i), c.to_string())).collect();
            if input.json {
                let rows: Vec<serde_json::Value> =
                    coeffs.iter().map(|(i, c)| json!({"index": i, "label": poset.label(n, *i), "coeff": c})).collect();
                emit(
                    out,
                    json!({
                        "n": n, "k": k, "r": r,
                        "coefficients": rows,
                        "identity_holds": check.passed,
                        "residual_nonzero": check.residual.coeffs().len(),
                        "minimal_integral_multiplier": multiplier.to_string(),
                        "bound": bound.to_string(),
                    }),
                )?;
            } else {
                writeln!(out, "v_{{{n},{k}}} (r = {r}):")?;
                for (i, c) in &coeffs {
                    writeln!(out, "  [{}] {c}", poset.element_name(n, *i))?;
                }
                writeln!(
                    out,
                    "(DU_{n} + {k}I) v = t_{n}: {}",
                    if check.passed { "pass" } else { "FAIL (nonzero residual)" }
                )?;
                writeln!(out, "minimal integral multiplier: {multiplier} (bound {bound})")?;
            }
            Ok(check.passed)
        }

        Command::Smith { input, n, k } => {
            let poset = load(&input.input)?;
            let r = resolve_r(&poset, &input)?;
            let att = attached(&poset.clone().with_r(Some(r)), r)?;
            let report = check_divisibility_bound(&att.poset, &att.pair, n, k)?;
            if input.json {
                emit(out, serde_json::to_value(&report)?)?;
            } else {
                writeln!(out, "{report}")?;
            }
            Ok(report.divides && report.oracle_agrees)
        }

        Command::Spectrum { input, n } => {
            let poset = load(&input.input)?;
            let r = resolve_r(&poset, &input)?;
            let ranks: Vec<usize> = match n {
                Some(n) => vec![n],
                None => (0..poset.top_rank()).collect(),
            };
            let mut ok = weak_growth_check(&poset).is_ok();
            if !input.json {
                writeln!(out, "weak growth: {}", if ok { "pass" } else { "FAIL" })?;
            }
            for n in ranks {
                let rep = char_poly_factor_check(&poset, n, r)?;
                ok &= rep.passed;
                if input.json {
                    emit(
                        out,
                        json!({
                            "n": n,
                            "computed": rep.computed.to_string(),
                            "factorization": rep.factorization,
                            "passed": rep.passed,
                        }),
                    )?;
                } else {
                    writeln!(out, "{rep}")?;
                }
            }
            Ok(ok)
        }

        Command::CertifyGrowth { input, n, all } => {
            let poset = load(&input.input)?;
            let r = resolve_r(&poset, &input)?;
            let ranks: Vec<usize> = match (n, all) {
                (Some(n), false) => vec![n],
                (None, true) | (None, false) => (2..poset.top_rank()).collect(),
                (Some(_), true) => bail!("--n and --all are mutually exclusive"),
            };
            let mut ok = !ranks.is_empty();
            for n in ranks {
                match certify_strict_growth(&poset, r, n) {
                    Ok(cert) => {
                        ok &= cert.recheck();
                        if input.json {
                            emit(out, serde_json::to_value(&cert)?)?;
                        } else {
                            writeln!(out, "{cert}")?;
                        }
                    }
                    Err(e) => {
                        ok = false;
                        if input.json {
                            emit(out, json!({"n": n, "error": e.to_string()}))?;
                        } else {
                            writeln!(out, "rank {n}: certificate FAILED: {e}")?;
                        }
                    }
                }
            }
            Ok(ok)
        }

        Command::VerifyAll { input, k, n } => {
            let poset = load(&input.input)?;
            let ranks = match n {
                Some(spec) => {
                    let range = parse_range(&spec)?;
                    Some(*range.start() as usize..=*range.end() as usize)
                }
                None => None,
            };
            let config = VerifyConfig { r: input.r, ranks, k_values: parse_k_values(&k)? };
            let report = verify_all(&poset, &config);
            for rec in &report.records {
                if input.json {
                    emit(out, serde_json::to_value(rec)?)?;
                } else {
                    writeln!(out, "{rec}")?;
                }
            }
            let failures = report.failures().count();
            if !input.json {
                writeln!(out, "{} checks, {failures} failed", report.records.len())?;
            }
            Ok(report.passed())
        }

        Command::SmithOracle { count, size, bound, seed, json } => {
            let trials = random_oracle_trials(seed, count, size, bound);
            let agree = trials.iter().filter(|t| t.agrees).count();
            for t in &trials {
                if json {
                    emit(out, serde_json::to_value(t)?)?;
                } else if !t.agrees {
                    writeln!(out, "DISAGREE: {:?} smith {} inverse {}", t.matrix, t.smith_last, t.inverse_last)?;
                }
            }
            if !json {
                writeln!(out, "{agree}/{} random {size}x{size} matrices agree (seed {seed})", trials.len())?;
            }
            Ok(agree == trials.len())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
