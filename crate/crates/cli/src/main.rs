use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use garsia::classify::{classify_interval, classify_measure, DEFAULT_NODE_BUDGET};
use garsia::entropy::{bound_schedule, DEFAULT_ATOM_BUDGET};
use garsia::fourier::{decay_scan, select_lambda, DEFAULT_FOURIER_BITS, DEFAULT_TAIL_EPS};
use garsia::measure::parse_measure_json;
use garsia::numeric::{to_f64, Ctx};
use garsia::vanishing::{charequi_check, is_complete_vanishing, search_vanishing, spectrum_support};
use garsia::{conjugate_profile, Error, FiniteAbelianGroup, FiniteMeasure, IntPolynomial};
use num_bigint::BigUint;
use serde_json::json;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_INVALID_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_HEURISTIC_STRICT: u8 = 4;

#[derive(Parser)]
#[command(name = "garsia", version, about = "Entropy bounds, vanishing certificates and Fourier decay for self-similar measures with algebraic contraction ratio")]
struct Cli {
    /// Worker threads for parallel sections (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Fail (exit 4) when a verdict rests on the heuristic numeric zero test.
    #[arg(long, global = true)]
    strict: bool,
    /// Suppress the unverified-irreducibility warning.
    #[arg(long, global = true)]
    assume_irreducible: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PolyArg {
    /// Minimal polynomial of beta: comma-separated integers, degree-descending.
    #[arg(long)]
    poly: String,
    /// Divide a non-primitive polynomial by its content instead of failing.
    #[arg(long)]
    divide_content: bool,
}

impl PolyArg {
    fn parse(&self) -> Result<IntPolynomial, Error> {
        let (f, divided) = IntPolynomial::parse(&self.poly, self.divide_content)?;
        if divided {
            eprintln!("warning: polynomial divided through by its content");
        }
        Ok(f)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Conjugate profile, Mahler measure and group invariants up to a level.
    Info {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value_t = 256)]
        precision: usize,
    },
    /// Two-sided entropy bound schedule as CSV.
    Entropy {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = DEFAULT_ATOM_BUDGET)]
        atom_budget: usize,
    },
    /// Search for the smallest complete-vanishing level, or probe one level.
    Vanishing {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        measure: PathBuf,
        /// Probe exactly this level instead of searching.
        #[arg(long)]
        level: Option<u32>,
        /// Search ceiling; mandatory when gcd(a_1, a_0) != 1.
        #[arg(long)]
        m_max: Option<u32>,
        /// Keep the full witness table (up to M^(m-1)(M-1) entries).
        #[arg(long)]
        full_witnesses: bool,
    },
    /// Cross-check the three equivalent characterizations at one level.
    Charequi {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        level: u32,
        #[arg(long, default_value_t = DEFAULT_ATOM_BUDGET)]
        atom_budget: usize,
    },
    /// Enumerate maximal-entropy zero-set families for an interval length,
    /// or classify a measure file.
    Classify {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, conflicts_with = "measure")]
        interval: Option<u64>,
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: usize,
    },
    /// Fourier decay scan of the self-similar measure on the real line.
    Fourier {
        /// Polynomial whose reversed-polynomial real root in the unit disk gives lambda.
        #[arg(long, conflicts_with = "lambda")]
        poly: Option<String>,
        /// Literal contraction ratio (decimal or p/q), 0 < |lambda| < 1.
        #[arg(long)]
        lambda: Option<String>,
        /// Disambiguate among several admissible real roots.
        #[arg(long)]
        root_index: Option<usize>,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        v_min: f64,
        #[arg(long, default_value_t = 65536.0)]
        v_max: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_FOURIER_BITS)]
        bits: usize,
        #[arg(long, default_value_t = DEFAULT_TAIL_EPS)]
        tail_eps: f64,
        /// Also write the per-point CSV here.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Dual spectrum support of Y_n given a verified vanishing level.
    Spectrum {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = DEFAULT_ATOM_BUDGET)]
        atom_budget: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    if !cli.assume_irreducible {
        eprintln!(
            "note: irreducibility of the polynomial is assumed, not verified \
             (pass --assume-irreducible to silence this)"
        );
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e.downcast_ref::<Error>() {
                Some(Error::AtomBudgetExceeded { .. })
                | Some(Error::CombinatorialBudgetExceeded { .. }) => EXIT_BUDGET,
                _ => EXIT_INVALID_INPUT,
            };
            ExitCode::from(code)
        }
    }
}

fn input_hash(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    format!("sha256:{:x}", hasher.finalize())
}

fn load_measure(path: &PathBuf) -> anyhow::Result<(FiniteMeasure, String)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading measure file {}", path.display()))?;
    let mu = parse_measure_json(&text)?;
    Ok((mu, text))
}

fn emit(cli: &Cli, body: String) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, body).context("writing output")?,
        None => println!("{body}"),
    }
    Ok(())
}

fn heuristic_exit(cli: &Cli, heuristic: bool) -> ExitCode {
    if heuristic && cli.strict {
        eprintln!("error: verdict is heuristic (numeric zero test) and --strict is set");
        ExitCode::from(EXIT_HEURISTIC_STRICT)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let version = env!("CARGO_PKG_VERSION");
    match &cli.command {
        Command::Info {
            poly,
            levels,
            precision,
        } => {
            let f = poly.parse()?;
            let profile = conjugate_profile(&f, *precision);
            let mut groups = Vec::new();
            for n in 1..=*levels {
                let g = FiniteAbelianGroup::build(&f, n)?;
                let iso = g.cyclic_isomorphism().ok();
                groups.push(json!({
                    "level": n,
                    "order": g.order().to_string(),
                    "invariant_factors": g.invariant_factors().iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                    "cyclic": g.is_cyclic(),
                    "t": iso.as_ref().map(|i| i.t.to_string()),
                    "beta_images": iso.as_ref().map(|i| i.beta_images.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
                }));
            }
            let report = json!({
                "tool_version": version,
                "input_hash": input_hash(&[&poly.poly]),
                "polynomial": f.to_string(),
                "degree": f.degree(),
                "modulus": f.modulus().to_string(),
                "cyclic_case": f.is_cyclic_case(),
                "classification": profile.classification.to_string(),
                "mahler": profile.mahler_f64(),
                "mahler_exact_integer": profile.mahler_integer.map(|m| m.to_string()),
                "mahler_error_bound": to_f64(&profile.mahler_error),
                "root_precision_bits": profile.precision_bits,
                "roots": profile.roots.iter().map(|r| json!({
                    "re": to_f64(&r.re), "im": to_f64(&r.im), "radius": to_f64(&r.radius),
                })).collect::<Vec<_>>(),
                "groups": groups,
            });
            emit(cli, serde_json::to_string_pretty(&report)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Entropy {
            poly,
            measure,
            n_max,
            atom_budget,
        } => {
            let f = poly.parse()?;
            let (mu, raw) = load_measure(measure)?;
            let schedule = bound_schedule(&f, &mu, *n_max, *atom_budget)?;
            let mut body = format!(
                "# tool_version={version}\n# input_hash={}\n",
                input_hash(&[&poly.poly, &raw, &n_max.to_string()])
            );
            body.push_str(&schedule.csv());
            if !schedule.skipped_levels.is_empty() {
                body.push_str(&format!(
                    "# skipped_levels={:?} (atom budget)\n",
                    schedule.skipped_levels
                ));
            }
            emit(cli, body)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Vanishing {
            poly,
            measure,
            level,
            m_max,
            full_witnesses,
        } => {
            let f = poly.parse()?;
            let (mu, raw) = load_measure(measure)?;
            let hash = input_hash(&[&poly.poly, &raw]);
            let heuristic = match level {
                Some(m) => {
                    let r = is_complete_vanishing(&f, &mu, *m, *full_witnesses)?;
                    let body = json!({
                        "tool_version": version,
                        "input_hash": hash,
                        "mode": "probe",
                        "level": r.level,
                        "verdict": r.verdict,
                        "characters_checked": r.characters_checked,
                        "heuristic": r.heuristic,
                        "first_unkilled": r.first_unkilled.as_ref().map(|c| coords_json(c.coords())),
                        "witnesses": r.witnesses.as_ref().map(|ws| ws.iter().map(witness_json).collect::<Vec<_>>()),
                    });
                    emit(cli, serde_json::to_string_pretty(&body)?)?;
                    r.heuristic
                }
                None => {
                    let outcome = search_vanishing(&f, &mu, *m_max)?;
                    let heuristic = outcome
                        .as_ref()
                        .map(|o| o.report.heuristic)
                        .unwrap_or(false);
                    let body = match outcome {
                        Some(o) => json!({
                            "tool_version": version,
                            "input_hash": hash,
                            "mode": "search",
                            "found": true,
                            "level": o.level,
                            "m_max": o.m_max,
                            "normalization": {"shift": o.shift.to_string(), "scale": o.scale.to_string()},
                            "heuristic": o.report.heuristic,
                            "witnesses": o.report.witnesses.as_ref().map(|ws| ws.iter().map(witness_json).collect::<Vec<_>>()),
                        }),
                        None => json!({
                            "tool_version": version,
                            "input_hash": hash,
                            "mode": "search",
                            "found": false,
                        }),
                    };
                    emit(cli, serde_json::to_string_pretty(&body)?)?;
                    heuristic
                }
            };
            Ok(heuristic_exit(cli, heuristic))
        }
        Command::Charequi {
            poly,
            measure,
            level,
            atom_budget,
        } => {
            let f = poly.parse()?;
            let (mu, raw) = load_measure(measure)?;
            let r = charequi_check(&f, &mu, *level, *atom_budget)?;
            let body = json!({
                "tool_version": version,
                "input_hash": input_hash(&[&poly.poly, &raw, &level.to_string()]),
                "level": r.level,
                "entropy_cond": r.entropy_cond,
                "equidist_cond": r.equidist_cond,
                "character_cond": r.character_cond,
                "entropy_step_nats": r.entropy_step_nats,
                "entropy_step_log2": r.entropy_step_log2,
                "entropy_target_nats": r.entropy_target_nats,
                "tolerance": r.tolerance,
                "heuristic": r.heuristic,
            });
            emit(cli, serde_json::to_string_pretty(&body)?)?;
            Ok(heuristic_exit(cli, r.heuristic))
        }
        Command::Classify {
            poly,
            interval,
            measure,
            node_budget,
        } => {
            let f = poly.parse()?;
            match (interval, measure) {
                (Some(k), None) => {
                    let fams = classify_interval(&f, &BigUint::from(*k), *node_budget)?;
                    let body = json!({
                        "tool_version": version,
                        "input_hash": input_hash(&[&poly.poly, &k.to_string()]),
                        "interval_length": k,
                        "family_count": fams.len(),
                        "families": fams.iter().map(family_json).collect::<Vec<_>>(),
                    });
                    emit(cli, serde_json::to_string_pretty(&body)?)?;
                    Ok(ExitCode::SUCCESS)
                }
                (None, Some(path)) => {
                    let (mu, raw) = load_measure(path)?;
                    let got = classify_measure(&f, &mu, *node_budget)?;
                    let heuristic = got.as_ref().map(|g| g.heuristic).unwrap_or(false);
                    let body = match got {
                        Some(g) => json!({
                            "tool_version": version,
                            "input_hash": input_hash(&[&poly.poly, &raw]),
                            "classified": true,
                            "level": g.level,
                            "family": family_json(&g.family),
                            "certificate": g.certificate,
                            "heuristic": g.heuristic,
                        }),
                        None => json!({
                            "tool_version": version,
                            "input_hash": input_hash(&[&poly.poly, &raw]),
                            "classified": false,
                        }),
                    };
                    emit(cli, serde_json::to_string_pretty(&body)?)?;
                    Ok(heuristic_exit(cli, heuristic))
                }
                _ => Err(anyhow!("pass exactly one of --interval or --measure")),
            }
        }
        Command::Fourier {
            poly,
            lambda,
            root_index,
            measure,
            v_min,
            v_max,
            points,
            bits,
            tail_eps,
            csv_out,
        } => {
            let (mu, raw) = load_measure(measure)?;
            let mut ctx = Ctx::new(*bits);
            let (lam, lam_desc) = match (poly, lambda) {
                (Some(p), None) => {
                    let (f, _) = IntPolynomial::parse(p, false)?;
                    (select_lambda(&f, *root_index, *bits)?, p.clone())
                }
                (None, Some(l)) => (parse_lambda(l, &mut ctx)?, l.clone()),
                _ => return Err(anyhow!("pass exactly one of --poly or --lambda")),
            };
            let scan = decay_scan(&lam, &mu, *v_min, *v_max, *points, *bits, *tail_eps);
            let hash = input_hash(&[
                &lam_desc,
                &raw,
                &format!("{v_min}:{v_max}:{points}:{bits}:{tail_eps}"),
            ]);
            if let Some(path) = csv_out {
                let mut body = format!("# tool_version={version}\n# input_hash={hash}\n");
                body.push_str(&scan.csv());
                fs::write(path, body)?;
            }
            let body = json!({
                "tool_version": version,
                "input_hash": hash,
                "lambda": scan.lambda,
                "grid": {"v_min": scan.v_min, "v_max": scan.v_max, "points": scan.points},
                "delta": scan.delta,
                "residual": scan.residual,
                "windows_used": scan.windows_used,
            });
            emit(cli, serde_json::to_string_pretty(&body)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum {
            poly,
            measure,
            n,
            m,
            atom_budget,
        } => {
            let f = poly.parse()?;
            let (mu, raw) = load_measure(measure)?;
            let support = spectrum_support(&f, &mu, *n, *m, *atom_budget)?;
            let heuristic = !mu.is_rational();
            let body = json!({
                "tool_version": version,
                "input_hash": input_hash(&[&poly.poly, &raw, &format!("{n}:{m}")]),
                "n": n,
                "vanishing_level": m,
                "support_size": support.len(),
                "support": support.iter().map(|c| coords_json(c.coords())).collect::<Vec<_>>(),
                "heuristic": heuristic,
            });
            emit(cli, serde_json::to_string_pretty(&body)?)?;
            Ok(heuristic_exit(cli, heuristic))
        }
    }
}

fn coords_json(coords: &[BigUint]) -> serde_json::Value {
    json!(coords.iter().map(|c| c.to_string()).collect::<Vec<_>>())
}

fn witness_json(w: &garsia::vanishing::Witness) -> serde_json::Value {
    json!({
        "character": coords_json(w.character.coords()),
        "k": w.k,
        "angle": w.angle.to_string(),
    })
}

fn family_json(fam: &garsia::classify::ZeroSetFamily) -> serde_json::Value {
    json!({
        "level": fam.level,
        "size": fam.len(),
        "angles": fam.angle_strings(),
        "provenance": fam.provenance,
    })
}

fn parse_lambda(text: &str, ctx: &mut Ctx) -> anyhow::Result<garsia::numeric::BigFloat> {
    let text = text.trim();
    let value = if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.trim().parse().context("bad lambda numerator")?;
        let d: i64 = d.trim().parse().context("bad lambda denominator")?;
        if d == 0 {
            return Err(anyhow!("lambda denominator is zero"));
        }
        let nf = ctx.from_f64(n as f64);
        let df = ctx.from_f64(d as f64);
        ctx.div(&nf, &df)
    } else {
        ctx.parse_decimal(text)
            .ok_or_else(|| anyhow!("bad lambda literal {text:?}"))?
    };
    let abs = to_f64(&value.abs());
    if !(abs > 0.0 && abs < 1.0) {
        return Err(anyhow!("lambda must satisfy 0 < |lambda| < 1, got {abs}"));
    }
    Ok(value)
}
