//! `strong-lucas`: strong Lucas probable-prime rounds, exact pseudoprime
//! censuses, worst-case classification, error-bound evaluation and tables,
//! probable-prime generation, and error-rate experiments.
//!
//! Exit codes: 0 success; 1 usage or invalid input; 2 refused by a
//! hypothesis gate, budget cap, or split failure.

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use strong_lucas::bounds::{
    bound_p_kt, bound_prime_count, bound_q_k1, bound_q_kl1, bound_q_kl1_127, bound_q_klt,
    bound_q_klt_large_t, bound_q_kt, bound_twin_products, render_table, BoundReport,
};
use strong_lucas::census::alpha_report;
use strong_lucas::experiment::{
    exact_qkt_small, generate_probable_prime, mc_summary_csv, monte_carlo_qkt,
    rational_to_decimal, write_run_records_jsonl, GenConfig,
};
use strong_lucas::lucas::{sample_base, strong_lucas_round, BaseDraw, CompositeEvidence, TestOutcome};
use strong_lucas::worst_case::{c_m_member, classify_c3};
use strong_lucas::{Error, Result};

#[derive(Parser)]
#[command(
    name = "strong-lucas",
    version,
    about = "Strong Lucas probable-prime rounds, exact pseudoprime censuses, \
             worst-case classification, error bounds, and generation experiments"
)]
struct Cli {
    /// Output rendering for results
    #[arg(long, global = true, value_enum, default_value_t = Output::Human)]
    output: Output,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Output {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run t strong Lucas rounds on n with randomly drawn bases
    Test {
        /// Odd modulus to test (arbitrary precision)
        #[arg(long)]
        n: String,
        /// Discriminant D (may be negative)
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        /// Number of rounds
        #[arg(long, default_value_t = 1)]
        t: u32,
        /// RNG seed; generated and printed when omitted
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact pass census of (n, D): SL, φ_D, α, ᾱ, admissible pairs
    Census {
        #[arg(long)]
        n: String,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
    },
    /// Structural worst-case classification of (n, D) against C₃
    Classify {
        #[arg(long)]
        n: String,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
    },
    /// Error-bound evaluation and the four reference tables
    Bounds {
        #[command(subcommand)]
        cmd: BoundsCmd,
    },
    /// Generate a k-bit probable prime via trial division + t rounds
    Gen {
        /// Bit length of the candidate (≥ 4)
        #[arg(long)]
        k: u32,
        /// Strong Lucas rounds per candidate
        #[arg(long, default_value_t = 1)]
        t: u32,
        /// Trial-divide by the first l odd primes
        #[arg(long, default_value_t = 0)]
        l: u32,
        /// Discriminant D
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        /// RNG seed; generated and printed when omitted
        #[arg(long)]
        seed: Option<u64>,
        /// Reject candidates of the twin-product shape r² − 1 up front
        #[arg(long, action = clap::ArgAction::SetTrue)]
        twin_precheck: bool,
        /// Abort after this many candidates
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Error-rate experiments: exact small-k sweeps and Monte Carlo
    Experiment {
        #[command(subcommand)]
        cmd: ExperimentCmd,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Print one of the four reference tables as CSV
    Table {
        /// Table number, 1–4
        #[arg(long)]
        which: u8,
    },
    /// Evaluate a single bound at the given parameters
    Eval {
        /// Bound identifier: q_k1, q_kt, q_kl1, q_kl1_127, q_klt,
        /// q_klt_large_t, p_kt, prime_count, twin_products
        #[arg(long)]
        theorem: String,
        /// Bit length k
        #[arg(long)]
        k: u64,
        /// Round count t (where the bound takes one)
        #[arg(long)]
        t: Option<u32>,
        /// Trial-division depth l (where the bound takes one)
        #[arg(long)]
        l: Option<u32>,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Exact error by exhaustive sweep over all k-bit candidates
    Exact {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        t: u32,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        #[arg(long, default_value_t = 0)]
        l: u32,
    },
    /// Monte Carlo estimate of the generation error rate
    Mc {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        t: u32,
        #[arg(long, default_value_t = 0)]
        l: u32,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        #[arg(long)]
        trials: u64,
        /// Master seed; generated and printed when omitted
        #[arg(long)]
        seed: Option<u64>,
        /// Write the one-row summary CSV here
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Write one JSON line per trial here
        #[arg(long)]
        records: Option<std::path::PathBuf>,
        #[arg(long, default_value_t = 1)]
        threads: u32,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(match e {
            Error::InvalidInput(_) | Error::EvenModulus(_) | Error::ZeroValue => 1,
            Error::HypothesisViolated(_)
            | Error::BudgetExceeded(_)
            | Error::SieveLimitExceeded { .. }
            | Error::FactorSplitFailed { .. } => 2,
        });
    }
}

fn parse_biguint(s: &str) -> Result<BigUint> {
    s.parse::<BigUint>()
        .map_err(|_| Error::InvalidInput(format!("not a nonnegative integer: {s}")))
}

fn parse_bigint(s: &str) -> Result<BigInt> {
    s.parse::<BigInt>()
        .map_err(|_| Error::InvalidInput(format!("not an integer: {s}")))
}

/// Exact rational with its decimal approximation, e.g. "5/16 (≈ 3.125e-1)".
fn show_rational(r: &BigRational) -> String {
    format!("{} (≈ {})", r, rational_to_decimal(r))
}

/// Resolves the effective seed, announcing a generated one so the run can
/// be reproduced.
fn resolve_seed(given: Option<u64>) -> (u64, bool) {
    match given {
        Some(s) => (s, false),
        None => (rand::random::<u64>(), true),
    }
}

fn evidence_json(ev: &CompositeEvidence) -> serde_json::Value {
    match ev {
        CompositeEvidence::LucasWitness { p, q, d } => serde_json::json!({
            "kind": "lucas_witness",
            "p": p.to_string(),
            "q": q.to_string(),
            "d": d.to_string(),
        }),
        CompositeEvidence::MillerRabinWitness { a } => serde_json::json!({
            "kind": "miller_rabin_witness",
            "a": a.to_string(),
        }),
        CompositeEvidence::Factor(g) => serde_json::json!({
            "kind": "factor",
            "factor": g.to_string(),
        }),
        CompositeEvidence::TwinProduct { smaller, larger } => serde_json::json!({
            "kind": "twin_product",
            "smaller": smaller.to_string(),
            "larger": larger.to_string(),
        }),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Test { n, d, t, seed } => cmd_test(&n, &d, t, seed, cli.output),
        Cmd::Census { n, d } => cmd_census(&n, &d, cli.output),
        Cmd::Classify { n, d } => cmd_classify(&n, &d, cli.output),
        Cmd::Bounds { cmd } => match cmd {
            BoundsCmd::Table { which } => {
                print!("{}", render_table(which)?);
                Ok(())
            }
            BoundsCmd::Eval { theorem, k, t, l } => cmd_bounds_eval(&theorem, k, t, l, cli.output),
        },
        Cmd::Gen {
            k,
            t,
            l,
            d,
            seed,
            twin_precheck,
            budget,
        } => cmd_gen(k, t, l, &d, seed, twin_precheck, budget, cli.output),
        Cmd::Experiment { cmd } => match cmd {
            ExperimentCmd::Exact { k, t, d, l } => cmd_exact(k, t, &d, l, cli.output),
            ExperimentCmd::Mc {
                k,
                t,
                l,
                d,
                trials,
                seed,
                out,
                records,
                threads,
            } => cmd_mc(k, t, l, &d, trials, seed, out, records, threads, cli.output),
        },
    }
}

fn cmd_test(n: &str, d: &str, t: u32, seed: Option<u64>, output: Output) -> Result<()> {
    let n = parse_biguint(n)?;
    let d = parse_bigint(d)?;
    if t < 1 {
        return Err(Error::InvalidInput("t must be ≥ 1".into()));
    }
    let two_d = BigUint::from(2u32) * d.magnitude();
    if n.gcd(&two_d) == n {
        return Err(Error::InvalidInput(format!(
            "n = {n} divides 2D; no usable base exists"
        )));
    }
    let (seed, seed_generated) = resolve_seed(seed);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rounds_run = 0u32;
    let mut evidence: Option<CompositeEvidence> = None;
    while rounds_run < t {
        match sample_base(&n, &d, &mut rng)? {
            BaseDraw::Rejected => continue,
            BaseDraw::Factor(g) => {
                evidence = Some(CompositeEvidence::Factor(g));
                break;
            }
            BaseDraw::Accepted(base) => {
                rounds_run += 1;
                match strong_lucas_round(&n, &base)? {
                    TestOutcome::ProbablePrime => {}
                    TestOutcome::Composite(ev) => {
                        evidence = Some(ev);
                        break;
                    }
                }
            }
        }
    }
    let verdict = if evidence.is_some() {
        "composite"
    } else {
        "probable_prime"
    };
    let json = serde_json::json!({
        "n": n.to_string(),
        "d": d.to_string(),
        "t": t,
        "seed": seed,
        "seed_generated": seed_generated,
        "rounds_run": rounds_run,
        "verdict": verdict,
        "evidence": evidence.as_ref().map(evidence_json),
    });
    match output {
        Output::Json => println!("{json}"),
        Output::Human => {
            if seed_generated {
                println!("seed = {seed} (generated)");
            }
            match &evidence {
                Some(_) => println!("{n} is composite (detected after {rounds_run} rounds)"),
                None => println!("{n} is a probable prime ({t} rounds passed)"),
            }
            println!("{json}");
        }
    }
    Ok(())
}

fn cmd_census(n: &str, d: &str, output: Output) -> Result<()> {
    let n = parse_biguint(n)?;
    let d = parse_bigint(d)?;
    let rep = alpha_report(&n, &d)?;
    let parts: Vec<serde_json::Value> = rep
        .decomp
        .parts
        .iter()
        .map(|pp| {
            serde_json::json!({
                "p": pp.p.to_string(),
                "r": pp.r,
                "eps": pp.eps,
                "k": pp.k,
                "q": pp.q.to_string(),
            })
        })
        .collect();
    let json = serde_json::json!({
        "n": rep.n.to_string(),
        "d": rep.d.to_string(),
        "eps_n": rep.decomp.eps_n,
        "kappa": rep.decomp.kappa,
        "q": rep.decomp.q.to_string(),
        "parts": parts,
        "sl": rep.sl.to_string(),
        "phi_d": rep.phi.to_string(),
        "alpha": rep.alpha.to_string(),
        "alpha_decimal": rational_to_decimal(&rep.alpha),
        "alpha_bar": rep.alpha_bar.to_string(),
        "alpha_bar_decimal": rational_to_decimal(&rep.alpha_bar),
        "admissible_pairs": rep.admissible.to_string(),
    });
    match output {
        Output::Json => println!("{json}"),
        Output::Human => {
            println!("n = {}", rep.n);
            println!("D = {}", rep.d);
            println!("eps = {}", rep.decomp.eps_n);
            println!("sl = {}", rep.sl);
            println!("phi_d = {}", rep.phi);
            println!("alpha = {}", show_rational(&rep.alpha));
            println!("alpha_bar = {}", show_rational(&rep.alpha_bar));
            println!("admissible_pairs = {}", rep.admissible);
        }
    }
    Ok(())
}

fn cmd_classify(n: &str, d: &str, output: Output) -> Result<()> {
    let n = parse_biguint(n)?;
    let d = parse_bigint(d)?;
    let form = classify_c3(&n, &d)?;
    let member = c_m_member(&n, &d, 3)?;
    // α is only defined for odd composites coprime to 2D
    let alpha = alpha_report(&n, &d).ok().map(|rep| rep.alpha);
    let json = serde_json::json!({
        "n": n.to_string(),
        "d": d.to_string(),
        "form": form.tag(),
        "member_of_c3": member,
        "params": form.params_json(),
        "alpha": alpha.as_ref().map(|a| a.to_string()),
        "alpha_decimal": alpha.as_ref().map(rational_to_decimal),
    });
    match output {
        Output::Json => println!("{json}"),
        Output::Human => {
            println!("n = {n}");
            println!("D = {d}");
            println!("form = {}", form.tag());
            println!("member_of_c3 = {member}");
            if !matches!(form.params_json(), serde_json::Value::Object(ref m) if m.is_empty()) {
                println!("params = {}", form.params_json());
            }
            match &alpha {
                Some(a) => println!("alpha = {}", show_rational(a)),
                None => println!("alpha = (undefined: n is prime or shares a factor with 2D)"),
            }
        }
    }
    Ok(())
}

fn cmd_bounds_eval(
    theorem: &str,
    k: u64,
    t: Option<u32>,
    l: Option<u32>,
    output: Output,
) -> Result<()> {
    let need_t = || t.ok_or_else(|| Error::InvalidInput(format!("{theorem} requires --t")));
    let need_l = || l.ok_or_else(|| Error::InvalidInput(format!("{theorem} requires --l")));
    let report: BoundReport = match theorem {
        "q_k1" => bound_q_k1(k)?,
        "q_kt" => bound_q_kt(k, need_t()?)?,
        "q_kl1" => bound_q_kl1(k, need_l()?)?,
        "q_kl1_127" => bound_q_kl1_127(k)?,
        "q_klt" => bound_q_klt(k, need_t()?, need_l()?)?,
        "q_klt_large_t" => bound_q_klt_large_t(k, need_t()?, need_l()?)?,
        "p_kt" => bound_p_kt(k, need_t()?)?,
        "prime_count" => bound_prime_count(k)?,
        "twin_products" => bound_twin_products(k)?,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown bound identifier: {other} (expected one of q_k1, q_kt, q_kl1, \
                 q_kl1_127, q_klt, q_klt_large_t, p_kt, prime_count, twin_products)"
            )))
        }
    };
    match output {
        Output::Json => println!("{}", report.to_json()),
        Output::Human => {
            println!("theorem = {}", report.theorem);
            println!("value ≈ {:.6e}", report.value);
            println!("neg_log2 = {}", report.neg_log2);
            println!("hypotheses_met = {}", report.hypotheses_met);
            println!("trivial = {}", report.is_trivial());
            println!("near_integer_boundary = {}", report.near_integer_boundary);
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    k: u32,
    t: u32,
    l: u32,
    d: &str,
    seed: Option<u64>,
    twin_precheck: bool,
    budget: Option<u64>,
    output: Output,
) -> Result<()> {
    let d = parse_bigint(d)?;
    let (seed, seed_generated) = resolve_seed(seed);
    let cfg = GenConfig {
        k,
        t,
        l,
        d,
        seed,
        twin_precheck,
        candidate_budget: budget,
    };
    let record = generate_probable_prime(&cfg)?;
    match output {
        Output::Json => {
            let mut json = record.to_json();
            json["seed_generated"] = serde_json::json!(seed_generated);
            println!("{json}");
        }
        Output::Human => {
            println!("seed = {seed}{}", if seed_generated { " (generated)" } else { "" });
            println!("output = {}", record.output);
            println!("bits = {}", record.output.bits());
            println!("candidates_tested = {}", record.candidates_tested);
            println!("rounds_per_candidate = {:?}", record.per_candidate_rounds);
            println!("output_is_composite = {}", record.output_is_composite);
        }
    }
    Ok(())
}

fn cmd_exact(k: u32, t: u32, d: &str, l: u32, output: Output) -> Result<()> {
    let d = parse_bigint(d)?;
    let exact = exact_qkt_small(k, t, &d, l)?;
    match output {
        Output::Json => {
            let mut json = exact.to_json();
            json["k"] = serde_json::json!(k);
            json["t"] = serde_json::json!(t);
            json["l"] = serde_json::json!(l);
            json["d"] = serde_json::json!(d.to_string());
            println!("{json}");
        }
        Output::Human => {
            println!("k = {k}, t = {t}, l = {l}, D = {d}");
            println!("q_exact = {}", show_rational(&exact.value));
            println!("prime_count = {}", exact.prime_count);
            println!("composite_mass = {}", show_rational(&exact.composite_mass));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc(
    k: u32,
    t: u32,
    l: u32,
    d: &str,
    trials: u64,
    seed: Option<u64>,
    out: Option<std::path::PathBuf>,
    records_path: Option<std::path::PathBuf>,
    threads: u32,
    output: Output,
) -> Result<()> {
    let d = parse_bigint(d)?;
    let (seed, seed_generated) = resolve_seed(seed);
    let cfg = GenConfig {
        k,
        t,
        l,
        d: d.clone(),
        seed,
        twin_precheck: false,
        candidate_budget: None,
    };
    let (summary, records) = monte_carlo_qkt(&cfg, trials, threads)?;
    // attach the exact reference where the exhaustive sweep is cheap
    let exact = if k <= 12 {
        Some(exact_qkt_small(k, t, &d, l)?.value)
    } else {
        None
    };
    let csv = mc_summary_csv(&cfg, &summary, exact.as_ref());
    if let Some(path) = &out {
        std::fs::write(path, &csv)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(path) = &records_path {
        let mut file = std::fs::File::create(path)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
        write_run_records_jsonl(&mut file, &records)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    }
    match output {
        Output::Json => {
            let json = serde_json::json!({
                "k": k,
                "t": t,
                "l": l,
                "d": d.to_string(),
                "seed": seed,
                "seed_generated": seed_generated,
                "trials": summary.trials,
                "composites": summary.composites,
                "estimate": summary.estimate,
                "std_error": summary.std_error,
                "exact": exact.as_ref().map(|e| e.to_string()),
                "exact_decimal": exact.as_ref().map(rational_to_decimal),
            });
            println!("{json}");
        }
        Output::Human => {
            println!("seed = {seed}{}", if seed_generated { " (generated)" } else { "" });
            println!("trials = {}", summary.trials);
            println!("composite_outputs = {}", summary.composites);
            println!("estimate = {:e}", summary.estimate);
            println!("std_error = {:e}", summary.std_error);
            match &exact {
                Some(e) => println!("exact = {}", show_rational(e)),
                None => println!("exact = (not computed for k > 12)"),
            }
            if let Some(path) = &out {
                println!("summary_csv = {}", path.display());
            }
            if let Some(path) = &records_path {
                println!("records_jsonl = {}", path.display());
            }
        }
    }
    Ok(())
}
