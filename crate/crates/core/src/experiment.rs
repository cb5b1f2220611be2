//! The probable-prime generator, exhaustive small-k computation of the
//! exact average-case error, and seeded Monte Carlo experiments with
//! persisted run records.

use std::io::Write;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rug::Float;

use crate::bounds::PRECISION_BITS;
use crate::census::{alpha_report, sl_count};
use crate::error::{Error, Result};
use crate::intmath::{is_prime_oracle, jacobi, nth_odd_prime, sieve_primes, splitmix64};
use crate::lucas::{sample_base, strong_lucas_round, twin_product_precheck, BaseDraw};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Largest k for which the exact exhaustive sweeps are allowed.
pub const EXACT_SWEEP_MAX_K: u32 = 20;

/// Configuration of one generation run: draw uniform odd k-bit integers,
/// pre-filter by the first `l` odd primes and by gcd with 2D (and
/// optionally by the twin-product precheck), and output the first
/// candidate passing `t` strong Lucas rounds with freshly drawn bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub k: u32,
    pub t: u32,
    pub l: u32,
    pub d: BigInt,
    pub seed: u64,
    pub twin_precheck: bool,
    /// When set, give up with `BudgetExceeded` after this many candidates.
    pub candidate_budget: Option<u64>,
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 4 {
            return Err(Error::InvalidInput(format!(
                "k must be ≥ 4, got {}",
                self.k
            )));
        }
        if self.t < 1 {
            return Err(Error::InvalidInput("t must be ≥ 1".into()));
        }
        if self.d.is_zero() {
            return Err(Error::ZeroValue);
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.k,
            "t": self.t,
            "l": self.l,
            "d": self.d.to_string(),
            "seed": self.seed,
            "twin_precheck": self.twin_precheck,
            "candidate_budget": self.candidate_budget,
        })
    }
}

/// Everything observable about one generation run. `output_is_composite`
/// is adjudicated solely by the deterministic primality oracle, never by
/// the Lucas machinery under test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub config: GenConfig,
    pub candidates_tested: u64,
    pub output: BigUint,
    pub output_is_composite: bool,
    /// One entry per candidate: how many rounds actually ran before the
    /// candidate was resolved (0 for pre-filter eliminations; a base draw
    /// exposing a factor during round i+1 records i).
    pub per_candidate_rounds: Vec<u32>,
}

impl RunRecord {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config.to_json(),
            "candidates_tested": self.candidates_tested,
            "output": self.output.to_string(),
            "output_is_composite": self.output_is_composite,
            "per_candidate_rounds": self.per_candidate_rounds,
        })
    }
}

/// The first `l` odd primes: 3, 5, 7, …
fn first_odd_primes(l: u32) -> Result<Vec<u64>> {
    if l == 0 {
        return Ok(Vec::new());
    }
    let p_max = nth_odd_prime(l as u64)?;
    let primes: Vec<u64> = sieve_primes(p_max)?
        .into_iter()
        .filter(|&p| p > 2)
        .collect();
    debug_assert_eq!(primes.len(), l as usize);
    Ok(primes)
}

/// A candidate is eliminated when a listed prime properly divides it;
/// the prime itself survives (relevant only when p̃_l reaches the k-bit
/// range). Generator and exact sweep share this rule exactly.
fn trial_division_hit(n: &BigUint, small: &[u64]) -> bool {
    small
        .iter()
        .any(|&p| (n % p).is_zero() && *n != BigUint::from(p))
}

/// Draws odd k-bit integers uniformly and outputs the first one that
/// survives the pre-filters and passes t strong Lucas rounds.
/// Deterministic given the seed.
pub fn generate_probable_prime(cfg: &GenConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let small = first_odd_primes(cfg.l)?;
    let two_d = BigUint::from(2u32) * cfg.d.magnitude();
    let top = BigUint::one() << (cfg.k - 1);
    let spread = BigUint::one() << (cfg.k - 2);
    let mut candidates_tested = 0u64;
    let mut per_candidate_rounds = Vec::new();
    loop {
        if let Some(budget) = cfg.candidate_budget {
            if candidates_tested >= budget {
                return Err(Error::BudgetExceeded(format!(
                    "no {}-bit probable prime within {budget} candidates",
                    cfg.k
                )));
            }
        }
        candidates_tested += 1;
        let u = rng.gen_biguint_below(&spread);
        let n: BigUint = &top | (u << 1) | BigUint::one();
        if trial_division_hit(&n, &small) || !n.gcd(&two_d).is_one() {
            per_candidate_rounds.push(0);
            continue;
        }
        if cfg.twin_precheck {
            if let Some((a, b)) = twin_product_precheck(&n) {
                if is_prime_oracle(&a) && is_prime_oracle(&b) {
                    per_candidate_rounds.push(0);
                    continue;
                }
            }
        }
        let mut ran = 0u32;
        let mut passed = true;
        'rounds: for _ in 0..cfg.t {
            let base = loop {
                match sample_base(&n, &cfg.d, &mut rng)? {
                    BaseDraw::Accepted(base) => break base,
                    BaseDraw::Rejected => continue,
                    BaseDraw::Factor(_) => {
                        // certified composite while drawing the base
                        passed = false;
                        break 'rounds;
                    }
                }
            };
            ran += 1;
            if !strong_lucas_round(&n, &base)?.is_probable_prime() {
                passed = false;
                break 'rounds;
            }
        }
        per_candidate_rounds.push(ran);
        if passed {
            let output_is_composite = !is_prime_oracle(&n);
            return Ok(RunRecord {
                config: cfg.clone(),
                candidates_tested,
                output: n,
                output_is_composite,
                per_candidate_rounds,
            });
        }
    }
}

fn check_sweep_range(k: u32, t: u32) -> Result<()> {
    if k < 4 {
        return Err(Error::InvalidInput(format!("k must be ≥ 4, got {k}")));
    }
    if k > EXACT_SWEEP_MAX_K {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive sweep is capped at k = {EXACT_SWEEP_MAX_K}, got {k}"
        )));
    }
    if t < 1 {
        return Err(Error::InvalidInput("t must be ≥ 1".into()));
    }
    Ok(())
}

/// Per-candidate pass fractions over the (k, l, D) candidate set:
/// single-round ᾱ_D for each surviving composite, and the same quantity
/// for each surviving prime (each exactly 1, but computed, not assumed).
fn candidate_sweep(
    k: u32,
    d: &BigInt,
    l: u32,
) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let small = first_odd_primes(l)?;
    let two_d = BigUint::from(2u32) * d.magnitude();
    let mut composite_abars = Vec::new();
    let mut prime_abars = Vec::new();
    let lo = 1u64 << (k - 1);
    let hi = 1u64 << k;
    let mut n = lo + 1;
    while n < hi {
        let nb = BigUint::from(n);
        if trial_division_hit(&nb, &small) || !nb.gcd(&two_d).is_one() {
            n += 2;
            continue;
        }
        if is_prime_oracle(&nb) {
            let eps = jacobi(d, &nb)?;
            debug_assert_ne!(eps, 0);
            let sl = sl_count(&nb, d)?;
            let den = BigInt::from(n) - eps - 1;
            prime_abars.push(BigRational::new(BigInt::from(sl), den));
        } else {
            composite_abars.push(alpha_report(&nb, d)?.alpha_bar);
        }
        n += 2;
    }
    Ok((composite_abars, prime_abars))
}

/// Exact Σ ᾱ_D(n)^t over odd composite k-bit n in the candidate set
/// (coprime to 2D and not properly divisible by the first l odd primes).
pub fn enumerate_alpha_bar_sum(k: u32, t: u32, d: &BigInt, l: u32) -> Result<BigRational> {
    check_sweep_range(k, t)?;
    if d.is_zero() {
        return Err(Error::ZeroValue);
    }
    let (composites, _) = candidate_sweep(k, d, l)?;
    Ok(composites.iter().map(|a| a.pow(t as i32)).sum())
}

/// The exact probability that the generator outputs a composite, with
/// both denominator conventions for primes carried explicitly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactQkt {
    /// Σ'ᾱ^t / (Σ'ᾱ^t + prime count): the headline number, with primes
    /// passing each round with probability exactly 1.
    pub value: BigRational,
    /// Σ'ᾱ^t over surviving composites.
    pub composite_mass: BigRational,
    /// Number of surviving primes.
    pub prime_count: u64,
    /// Σ ᾱ_D(p)^t over surviving primes under the census-denominator
    /// convention; equals `prime_count` exactly since ᾱ_D(p) = 1.
    pub prime_mass: BigRational,
}

impl ExactQkt {
    /// The alternative headline using the census-denominator prime mass;
    /// coincides with `value` because ᾱ_D(p) = 1 exactly.
    pub fn value_alpha_bar_convention(&self) -> BigRational {
        &self.composite_mass / (&self.composite_mass + &self.prime_mass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "value": self.value.to_string(),
            "value_decimal": rational_to_decimal(&self.value),
            "composite_mass": self.composite_mass.to_string(),
            "prime_count": self.prime_count,
            "prime_mass": self.prime_mass.to_string(),
            "value_alpha_bar_convention": self.value_alpha_bar_convention().to_string(),
        })
    }
}

fn assemble_exact(
    composite_pows: &[BigRational],
    prime_pows: &[BigRational],
) -> Result<ExactQkt> {
    let composite_mass: BigRational = composite_pows.iter().sum();
    let prime_mass: BigRational = prime_pows.iter().sum();
    let prime_count = prime_pows.len() as u64;
    if composite_mass.is_zero() && prime_count == 0 {
        return Err(Error::InvalidInput(
            "no candidates survive the filters".into(),
        ));
    }
    let value =
        &composite_mass / (&composite_mass + BigRational::from_integer(prime_count.into()));
    Ok(ExactQkt {
        value,
        composite_mass,
        prime_count,
        prime_mass,
    })
}

/// Exact q_{k,t} by direct definition: fresh ᾱ^t per candidate.
pub fn exact_qkt_small(k: u32, t: u32, d: &BigInt, l: u32) -> Result<ExactQkt> {
    check_sweep_range(k, t)?;
    if d.is_zero() {
        return Err(Error::ZeroValue);
    }
    let (composites, primes) = candidate_sweep(k, d, l)?;
    let cp: Vec<BigRational> = composites.iter().map(|a| a.pow(t as i32)).collect();
    let pp: Vec<BigRational> = primes.iter().map(|a| a.pow(t as i32)).collect();
    assemble_exact(&cp, &pp)
}

/// Exact q_{k,t} for every t in 1..=t_max by incremental accumulation of
/// running ᾱ-powers — the independent arithmetic route cross-checked
/// against `exact_qkt_small`.
pub fn exact_qkt_profile(k: u32, t_max: u32, d: &BigInt, l: u32) -> Result<Vec<ExactQkt>> {
    check_sweep_range(k, t_max)?;
    if d.is_zero() {
        return Err(Error::ZeroValue);
    }
    let (composites, primes) = candidate_sweep(k, d, l)?;
    let mut comp_pow = composites.clone();
    let mut prime_pow = primes.clone();
    let mut out = Vec::with_capacity(t_max as usize);
    for t in 1..=t_max {
        if t > 1 {
            for (acc, a) in comp_pow.iter_mut().zip(&composites) {
                *acc *= a;
            }
            for (acc, a) in prime_pow.iter_mut().zip(&primes) {
                *acc *= a;
            }
        }
        out.push(assemble_exact(&comp_pow, &prime_pow)?);
    }
    Ok(out)
}

/// Monte Carlo aggregate: composite-output fraction with its binomial
/// standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub trials: u64,
    pub composites: u64,
    pub estimate: f64,
    pub std_error: f64,
}

/// Per-trial seed: an independent splitmix64 stream indexed by trial,
/// so results are identical for any thread count.
fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut s = master.wrapping_add(trial.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    splitmix64(&mut s)
}

/// Runs `trials` independent generation runs (config's seed acts as the
/// master seed) across `threads` workers and reports the fraction of
/// composite outputs. Records come back in trial order; the result is
/// byte-identical for any thread count.
pub fn monte_carlo_qkt(
    cfg: &GenConfig,
    trials: u64,
    threads: u32,
) -> Result<(McSummary, Vec<RunRecord>)> {
    cfg.validate()?;
    if trials < 1 {
        return Err(Error::InvalidInput("trials must be ≥ 1".into()));
    }
    if threads < 1 {
        return Err(Error::InvalidInput("threads must be ≥ 1".into()));
    }
    let seeds: Vec<u64> = (0..trials).map(|i| trial_seed(cfg.seed, i)).collect();
    let workers = (threads as u64).min(trials) as usize;
    let chunk = seeds.len().div_ceil(workers);
    let mut indexed: Vec<(usize, Result<RunRecord>)> = std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for (w, part) in seeds.chunks(chunk).enumerate() {
            let base = w * chunk;
            handles.push(scope.spawn(move || {
                part.iter()
                    .enumerate()
                    .map(|(j, &seed)| {
                        let mut c = cfg.clone();
                        c.seed = seed;
                        (base + j, generate_probable_prime(&c))
                    })
                    .collect::<Vec<_>>()
            }));
        }
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("generation worker panicked"))
            .collect()
    });
    indexed.sort_by_key(|(i, _)| *i);
    let mut records = Vec::with_capacity(indexed.len());
    for (_, r) in indexed {
        records.push(r?);
    }
    let composites = records.iter().filter(|r| r.output_is_composite).count() as u64;
    let estimate = composites as f64 / trials as f64;
    let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok((
        McSummary {
            trials,
            composites,
            estimate,
            std_error,
        },
        records,
    ))
}

/// One JSON object per line, in trial order.
pub fn write_run_records_jsonl<W: Write>(out: &mut W, records: &[RunRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json())?;
    }
    Ok(())
}

/// Exact rational as a ~18-significant-figure decimal string.
pub fn rational_to_decimal(r: &BigRational) -> String {
    let parse = |v: &BigInt| {
        let i = rug::Integer::from(
            rug::Integer::parse(v.to_string()).expect("integer decimal string"),
        );
        Float::with_val(PRECISION_BITS, i)
    };
    let v = parse(r.numer()) / parse(r.denom());
    format!("{v:.17e}")
}

/// Summary CSV row (with header):
/// k,t,l,D,trials,composites,estimate,se,exact_value_if_available
pub fn mc_summary_csv(cfg: &GenConfig, s: &McSummary, exact: Option<&BigRational>) -> String {
    let exact_col = exact.map(rational_to_decimal).unwrap_or_default();
    format!(
        "k,t,l,D,trials,composites,estimate,se,exact_value_if_available\n{},{},{},{},{},{},{},{},{}\n",
        cfg.k, cfg.t, cfg.l, cfg.d, s.trials, s.composites, s.estimate, s.std_error, exact_col
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn cfg(k: u32, t: u32, d: i64, l: u32, seed: u64) -> GenConfig {
        GenConfig {
            k,
            t,
            l,
            d: BigInt::from(d),
            seed,
            twin_precheck: false,
            candidate_budget: None,
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(3, 1, 5, 0, 0).validate().is_err());
        assert!(cfg(12, 0, 5, 0, 0).validate().is_err());
        assert!(matches!(
            cfg(12, 1, 0, 0, 0).validate(),
            Err(Error::ZeroValue)
        ));
        assert!(cfg(4, 1, 5, 0, 0).validate().is_ok());
    }

    #[test]
    fn generation_is_deterministic_and_well_formed() {
        let c = cfg(12, 3, 5, 2, 42);
        let r1 = generate_probable_prime(&c).unwrap();
        let r2 = generate_probable_prime(&c).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.output.bits(), 12);
        assert!(r1.output.is_odd());
        assert_eq!(
            r1.per_candidate_rounds.len() as u64,
            r1.candidates_tested
        );
        assert_eq!(*r1.per_candidate_rounds.last().unwrap(), 3);
        // survivors of trial division are coprime to 3 and 5
        assert!(!(&r1.output % 3u64).is_zero());
        assert!(!(&r1.output % 5u64).is_zero());
        let r3 = generate_probable_prime(&cfg(12, 3, 5, 2, 43)).unwrap();
        assert_eq!(r3.output.bits(), 12);
    }

    #[test]
    fn twin_precheck_blocks_twin_products() {
        // 4-bit candidates are {9, 11, 13, 15}; 15 = 3·5 is the twin product
        let mut seen_15_off = false;
        for seed in 0..60 {
            let mut c = cfg(4, 1, 7, 0, seed);
            let off = generate_probable_prime(&c).unwrap();
            seen_15_off |= off.output == BigUint::from(15u32);
            c.twin_precheck = true;
            let on = generate_probable_prime(&c).unwrap();
            assert_ne!(on.output, BigUint::from(15u32));
        }
        assert!(seen_15_off, "15 passes often enough to appear without the precheck");
    }

    #[test]
    fn budget_is_enforced() {
        // every 4-bit candidate is filtered out: 9, 15 by trial division,
        // 11, 13 by gcd with 2·143
        let mut c = cfg(4, 1, 143, 2, 1);
        c.candidate_budget = Some(100);
        assert!(matches!(
            generate_probable_prime(&c),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn exact_regression_values() {
        let d5 = BigInt::from(5);
        let e8 = exact_qkt_small(8, 1, &d5, 0).unwrap();
        assert_eq!(e8.prime_count, 23);
        assert_eq!(
            e8.prime_mass,
            BigRational::from_integer(23.into()),
            "every prime's pass fraction is exactly 1"
        );
        let v = e8.value.to_f64().unwrap();
        assert!((v - 2.4660370214e-2).abs() < 1e-11, "got {v}");
        let s = e8.composite_mass.to_f64().unwrap();
        assert!((s - 5.8152924130e-1).abs() < 1e-10, "got {s}");
        assert_eq!(e8.value, e8.value_alpha_bar_convention());

        let e12 = exact_qkt_small(12, 1, &d5, 0).unwrap();
        assert_eq!(e12.prime_count, 255);
        let v = e12.value.to_f64().unwrap();
        assert!((v - 8.6175976448e-3).abs() < 1e-12, "got {v}");

        // enumerate_alpha_bar_sum is the numerator mass
        assert_eq!(enumerate_alpha_bar_sum(8, 1, &d5, 0).unwrap(), e8.composite_mass);
    }

    #[test]
    fn exact_filters_and_monotonicity() {
        let d5 = BigInt::from(5);
        // l = 5 strips every odd composite below 256 (smallest prime
        // factor ≤ 13), leaving zero composite mass
        let stripped = exact_qkt_small(8, 1, &d5, 5).unwrap();
        assert!(stripped.composite_mass.is_zero());
        assert!(stripped.value.is_zero());
        assert_eq!(stripped.prime_count, 23);
        // more rounds only shrink the error
        let t1 = exact_qkt_small(8, 1, &d5, 0).unwrap().value;
        let t3 = exact_qkt_small(8, 3, &d5, 0).unwrap().value;
        assert!(t3 < t1);
        // trial division only helps
        let l2 = exact_qkt_small(8, 1, &d5, 2).unwrap().value;
        assert!(l2 <= t1);
        // range gates
        assert!(matches!(
            exact_qkt_small(21, 1, &d5, 0),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(exact_qkt_small(3, 1, &d5, 0).is_err());
    }

    #[test]
    fn profile_matches_direct_route() {
        let d5 = BigInt::from(5);
        let profile = exact_qkt_profile(8, 3, &d5, 0).unwrap();
        for (i, p) in profile.iter().enumerate() {
            let direct = exact_qkt_small(8, i as u32 + 1, &d5, 0).unwrap();
            assert_eq!(p, &direct, "routes disagree at t = {}", i + 1);
        }
    }

    #[test]
    fn monte_carlo_is_thread_invariant() {
        let c = cfg(10, 1, 5, 0, 7);
        let (s1, r1) = monte_carlo_qkt(&c, 40, 1).unwrap();
        let (s2, r2) = monte_carlo_qkt(&c, 40, 3).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(r1, r2);
        assert_eq!(s1.trials, 40);
        assert!(s1.estimate >= 0.0 && s1.estimate <= 1.0);
        // single-trial estimate is 0 or 1
        let (s3, _) = monte_carlo_qkt(&c, 1, 1).unwrap();
        assert!(s3.estimate == 0.0 || s3.estimate == 1.0);
        assert!(monte_carlo_qkt(&c, 0, 1).is_err());
        assert!(monte_carlo_qkt(&c, 5, 0).is_err());
    }

    #[test]
    fn persistence_formats() {
        let c = cfg(10, 2, 5, 1, 9);
        let (summary, records) = monte_carlo_qkt(&c, 3, 2).unwrap();
        let mut buf = Vec::new();
        write_run_records_jsonl(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["config"]["k"].is_number());
            assert!(v["output"].is_string());
        }
        let exact = exact_qkt_small(10, 2, &c.d, 1).unwrap();
        let csv = mc_summary_csv(&c, &summary, Some(&exact.value));
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k,t,l,D,trials,composites,estimate,se,exact_value_if_available"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("10,2,1,5,3,"));
        assert!(row.contains('e'), "exact column is scientific notation: {row}");
    }
}
