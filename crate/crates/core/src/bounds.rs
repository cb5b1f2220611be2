//! High-precision evaluators for the closed-form average-case error
//! bounds, reported as floor(−log₂ bound) alongside the 192-bit value.
//!
//! Every decimal constant is parsed as a decimal string and rounded once
//! to the working precision, never round-tripped through `f64`. Each
//! evaluator states its hypotheses; callers get `hypotheses_met = false`
//! (or a `HypothesisViolated` error where no formula applies at all)
//! rather than a silently extrapolated number.

use num_bigint::BigInt;
use num_rational::BigRational;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::intmath::nth_odd_prime;

/// Working precision for all bound evaluation (bits of mantissa).
pub const PRECISION_BITS: u32 = 192;

fn f(v: u64) -> Float {
    Float::with_val(PRECISION_BITS, v)
}

/// Parses a decimal constant at full working precision.
fn dec(s: &str) -> Float {
    Float::with_val(
        PRECISION_BITS,
        Float::parse(s).expect("valid decimal literal"),
    )
}

fn four() -> Float {
    f(4)
}

fn floor_neg_log2(v: &Float) -> i64 {
    let lg = Float::with_val(PRECISION_BITS, v.log2_ref());
    let fl = (-lg).floor();
    fl.to_integer()
        .expect("finite log2")
        .to_i64()
        .expect("neg_log2 fits in i64")
}

/// One evaluated bound: the 192-bit value, its floor(−log₂·), whether the
/// theorem's hypotheses hold for the requested parameters, and whether the
/// reported integer sits so close to a power-of-two boundary that rounding
/// could plausibly move it.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub theorem: &'static str,
    pub value: Float,
    pub neg_log2: i64,
    pub hypotheses_met: bool,
    pub near_integer_boundary: bool,
}

impl BoundReport {
    fn build(theorem: &'static str, value: Float, hypotheses_met: bool) -> Result<BoundReport> {
        if !value.is_finite() || value <= 0u32 {
            return Err(Error::InvalidInput(format!(
                "bound value for {theorem} is not a positive finite number"
            )));
        }
        let neg_log2 = floor_neg_log2(&value);
        // flag instability: nudge the value two ulps each way and re-floor
        let mut up = value.clone();
        up.next_up();
        up.next_up();
        let mut down = value.clone();
        down.next_down();
        down.next_down();
        let unstable = floor_neg_log2(&up) != neg_log2 || floor_neg_log2(&down) != neg_log2;
        let lg = Float::with_val(PRECISION_BITS, value.log2_ref());
        let neg = -lg;
        let frac = (neg.clone() - neg.floor()).to_f64();
        let near_integer_boundary = unstable || frac < 1e-6 || frac > 1.0 - 1e-6;
        Ok(BoundReport {
            theorem,
            value,
            neg_log2,
            hypotheses_met,
            near_integer_boundary,
        })
    }

    /// A bound ≥ 1 carries no information.
    pub fn is_trivial(&self) -> bool {
        self.value >= 1u32
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "theorem": self.theorem,
            "value": format!("{:.40e}", self.value),
            "neg_log2": self.neg_log2,
            "hypotheses_met": self.hypotheses_met,
            "trivial": self.is_trivial(),
            "near_integer_boundary": self.near_integer_boundary,
        })
    }
}

/// ρ_l = 1 + 1/p̃_{l+1}, where p̃_j is the j-th odd prime: after trial
/// division by the first l odd primes, every surviving prime factor
/// exceeds p̃_{l+1}/ (well, is at least p̃_{l+1}), making ρ_l the worst
/// single-factor growth ratio.
pub fn rho_rational(l: u32) -> Result<BigRational> {
    let p = nth_odd_prime(l as u64 + 1)?;
    Ok(BigRational::new(
        BigInt::from(p + 1),
        BigInt::from(p),
    ))
}

fn rho_float(l: u32) -> Result<Float> {
    let p = nth_odd_prime(l as u64 + 1)?;
    Ok(f(1) + f(1) / f(p))
}

/// ρ_l at the working precision.
pub fn rho(l: u32) -> Result<Float> {
    rho_float(l)
}

/// Single-round bound with no trial division: ln(k)·k²·4^{2.3−√k}, k ≥ 2.
pub fn bound_q_k1(k: u64) -> Result<BoundReport> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be ≥ 2, got {k}")));
    }
    let value = f(k).ln() * f(k).square() * four().pow(dec("2.3") - f(k).sqrt());
    BoundReport::build("q_k1", value, true)
}

/// t-round bound: lnᵗ(k)·k^{3/2}·(2ᵗ/√t)·4^{2.12−√(tk)}.
/// Hypotheses: (k ≥ 79 and 3 ≤ t ≤ k/9) or (k ≥ 88 and t = 2).
pub fn bound_q_kt(k: u64, t: u32) -> Result<BoundReport> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be ≥ 2, got {k}")));
    }
    if t < 2 {
        return Err(Error::InvalidInput(format!("t must be ≥ 2, got {t}")));
    }
    let hyp = (k >= 79 && t >= 3 && 9 * t as u64 <= k) || (k >= 88 && t == 2);
    let value = f(k).ln().pow(t) * f(k).pow(dec("1.5")) * (f(1) << t) / f(t as u64).sqrt()
        * four().pow(dec("2.12") - f(t as u64 * k).sqrt());
    BoundReport::build("q_kt", value, hyp)
}

/// Single round after l trial divisions: k²·4^{1.8−√k}·ρ_l^{2√(k−1)−2}, k ≥ 2.
pub fn bound_q_kl1(k: u64, l: u32) -> Result<BoundReport> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be ≥ 2, got {k}")));
    }
    let rho = rho_float(l)?;
    let value = f(k).square()
        * four().pow(dec("1.8") - f(k).sqrt())
        * rho.pow(f(2) * f(k - 1).sqrt() - 2u32);
    BoundReport::build("q_kl1", value, true)
}

/// Specialized single-round bound for l = 127: k²·4^{1.729−0.998·√(k−1)}, k ≥ 2.
pub fn bound_q_kl1_127(k: u64) -> Result<BoundReport> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be ≥ 2, got {k}")));
    }
    let value = f(k).square() * four().pow(dec("1.729") - dec("0.998") * f(k - 1).sqrt());
    BoundReport::build("q_kl1_127", value, true)
}

/// t rounds after l trial divisions: 4^{1.72−√(tk)}·k^{3/2}·2ᵗ·ρ_l^{2√(kt)+t}.
/// Hypotheses: k ≥ 21 and 2 ≤ t ≤ (k−1)/9.
pub fn bound_q_klt(k: u64, t: u32, l: u32) -> Result<BoundReport> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be ≥ 2, got {k}")));
    }
    if t < 2 {
        return Err(Error::InvalidInput(format!("t must be ≥ 2, got {t}")));
    }
    let hyp = k >= 21 && 9 * t as u64 <= k - 1;
    let rho = rho_float(l)?;
    let tk = t as u64 * k;
    let value = four().pow(dec("1.72") - f(tk).sqrt())
        * f(k).pow(dec("1.5"))
        * (f(1) << t)
        * rho.pow(f(2) * f(tk).sqrt() + f(t as u64));
    BoundReport::build("q_klt", value, hyp)
}

/// Many-round bound (t of the same order as k), three-term form:
///   2^{−1.52−4t}·(ρ^{6t}/(2ᵗ−ρᵗ))·k + ρ^{3t}·2^{−3.55−4k/9−2t}·k^{15/4}
///   + ρ^{5t}·2^{1.75−k/4−3t}·k.
/// Hypotheses: k ≥ 122 and 9t ≥ k.
pub fn bound_q_klt_large_t(k: u64, t: u32, l: u32) -> Result<BoundReport> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be ≥ 2, got {k}")));
    }
    if t < 1 {
        return Err(Error::InvalidInput("t must be ≥ 1".into()));
    }
    let hyp = k >= 122 && 9 * t as u64 >= k;
    let rho = rho_float(l)?;
    let t64 = t as u64;
    let term1 = (dec("-1.52") - f(4 * t64)).exp2() * rho.clone().pow(f(6 * t64))
        / ((f(1) << t) - rho.clone().pow(f(t64)))
        * f(k);
    let term2 = rho.clone().pow(f(3 * t64))
        * (dec("-3.55") - f(4 * k) / f(9) - f(2 * t64)).exp2()
        * f(k).pow(dec("3.75"));
    let term3 = rho.pow(f(5 * t64)) * (dec("1.75") - f(k) / f(4) - f(3 * t64)).exp2() * f(k);
    BoundReport::build("q_klt_large_t", term1 + term2 + term3, hyp)
}

fn p_kt_case_ii(k: u64, t: u32) -> Float {
    f(k).pow(dec("1.5")) * (f(1) << t) / f(t as u64).sqrt()
        * four().pow(f(2) - f(t as u64 * k).sqrt())
}

fn p_kt_case_ii_applies(k: u64, t: u32) -> bool {
    (k >= 21 && t >= 3 && 9 * t as u64 <= k) || (k >= 88 && t == 2)
}

/// Strongest applicable bound on the Miller–Rabin analogue p_{k,t}, taken
/// as the minimum over the four published cases:
///   (i)   t = 1:                      k²·4^{2−√k}
///   (ii)  (k≥21, 3≤t≤k/9) or (k≥88, t=2):  k^{3/2}·(2ᵗ/√t)·4^{2−√(tk)}
///   (iii) k ≥ 21, 9t ≥ k:  (7/20)k·2^{−5t} + k^{15/4}·2^{−k/2−2t}/7 + 12k·2^{−k/4−3t}
///   (iv)  k ≥ 21, 4t ≥ k:             k^{15/4}·2^{−k/2−2t}/7
/// Errors with `HypothesisViolated` when no case applies.
pub fn bound_p_kt(k: u64, t: u32) -> Result<BoundReport> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be ≥ 2, got {k}")));
    }
    if t < 1 {
        return Err(Error::InvalidInput("t must be ≥ 1".into()));
    }
    let t64 = t as u64;
    let mut best: Option<Float> = None;
    let mut consider = |v: Float| {
        best = Some(match best.take() {
            Some(b) if b <= v => b,
            _ => v,
        });
    };
    if t == 1 {
        consider(f(k).square() * four().pow(f(2) - f(k).sqrt()));
    }
    if p_kt_case_ii_applies(k, t) {
        consider(p_kt_case_ii(k, t));
    }
    if k >= 21 && 9 * t64 >= k {
        let a = dec("0.35") * f(k) * (f(1) >> (5 * t));
        let b = f(k).pow(dec("3.75")) * (-(f(k) / f(2)) - f(2 * t64)).exp2() / f(7);
        let c = f(12) * f(k) * (-(f(k) / f(4)) - f(3 * t64)).exp2();
        consider(a + b + c);
    }
    if k >= 21 && 4 * t64 >= k {
        consider(f(k).pow(dec("3.75")) * (-(f(k) / f(2)) - f(2 * t64)).exp2() / f(7));
    }
    match best {
        Some(value) => BoundReport::build("p_kt", value, true),
        None => Err(Error::HypothesisViolated(format!(
            "no p_kt case applies for k = {k}, t = {t}"
        ))),
    }
}

/// Trial-division depth used by the tabulated configurations.
pub fn calc_trial_divisions(k: u64) -> u32 {
    match k {
        0..=512 => 63,
        513..=1024 => 127,
        1025..=2048 => 383,
        _ => 1023,
    }
}

/// Lower bound 0.71867·2ᵏ/k on the number of primes with exactly k bits.
/// Hypothesis: k ≥ 21.
pub fn bound_prime_count(k: u64) -> Result<BoundReport> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be ≥ 1".into()));
    }
    let value = dec("0.71867") * (f(1) << u32::try_from(k.min(1 << 30)).unwrap()) / f(k);
    BoundReport::build("prime_count", value, k >= 21)
}

/// Upper bound 6·2^{k/2}/k² on the number of k-bit twin products.
/// Hypothesis: k ≥ 122.
pub fn bound_twin_products(k: u64) -> Result<BoundReport> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be ≥ 1".into()));
    }
    let value = f(6) * (f(k) / f(2)).exp2() / f(k).square();
    BoundReport::build("twin_products", value, k >= 122)
}

/// Riesel–Vaughan upper bound on the twin-prime count up to x:
/// 16·0.6602·x/((7.5 + ln x)·ln x). Hypothesis: x > e⁴².
pub fn riesel_vaughan_pi2(x: f64) -> Result<BoundReport> {
    if !x.is_finite() || x <= 1.0 {
        return Err(Error::InvalidInput(format!("x must be > 1, got {x}")));
    }
    let xf = Float::with_val(PRECISION_BITS, x);
    let lnx = xf.clone().ln();
    let value = f(16) * dec("0.6602") * xf / ((dec("7.5") + lnx.clone()) * lnx);
    let hyp = Float::with_val(PRECISION_BITS, x).ln() > 42u32;
    BoundReport::build("riesel_vaughan_pi2", value, hyp)
}

/// Density bound 8·Σ_{j=2}^{m} 2^{m−j−(k−1)/j} on the fraction of odd
/// k-bit integers lying in C_m. Hypothesis (enforced): (m+1)² ≤ 4(k−1).
/// The empty sum (m ≤ 1) is 0.
pub fn cm_density_bound(k: u64, m: u32) -> Result<Float> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be ≥ 2, got {k}")));
    }
    let mp1 = (m as u64 + 1) * (m as u64 + 1);
    if mp1 > 4 * (k - 1) {
        return Err(Error::HypothesisViolated(format!(
            "(m+1)² ≤ 4(k−1) required, got m = {m}, k = {k}"
        )));
    }
    let mut sum = Float::with_val(PRECISION_BITS, 0);
    for j in 2..=m as u64 {
        sum += (f(m as u64) - f(j) - f(k - 1) / f(j)).exp2();
    }
    Ok(f(8) * sum)
}

/// Bit sizes tabulated by `render_table`.
pub const TABLE_KS: [u64; 7] = [100, 200, 400, 512, 1024, 2048, 4096];
/// Round counts tabulated by `render_table` for the multi-round tables.
pub const TABLE_TS: [u32; 6] = [2, 4, 8, 16, 32, 64];

/// One rendered table cell: a floor(−log₂·) value, or the gate that
/// excludes the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Value(i64),
    Gate(&'static str),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Value(v) => write!(out, "{v}"),
            Cell::Gate(g) => write!(out, "{g}"),
        }
    }
}

fn render_grid(
    mut cell: impl FnMut(u64, u32) -> Result<Cell>,
) -> Result<String> {
    let mut out = String::from("k");
    for t in TABLE_TS {
        out.push_str(&format!(",t={t}"));
    }
    out.push('\n');
    for k in TABLE_KS {
        out.push_str(&k.to_string());
        for t in TABLE_TS {
            out.push_str(&format!(",{}", cell(k, t)?));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Renders one of the four reference tables as CSV.
///
/// 1: per-k single-round columns (p_{k,1}, q_{k,1}, q_{k,127,1});
/// 2: q_{k,t} grid; 3: q_{k,l,t} grid with l from `calc_trial_divisions`;
/// 4: Miller–Rabin p_{k,t} grid (mid-range case). Grid cells outside a
/// theorem's range carry the gate marker instead of a number.
pub fn render_table(which: u8) -> Result<String> {
    match which {
        1 => {
            let mut out = String::from("k,neg_log2_p_k1,neg_log2_q_k1,neg_log2_q_kl1\n");
            for k in TABLE_KS {
                let p = bound_p_kt(k, 1)?.neg_log2;
                let q = bound_q_k1(k)?.neg_log2;
                let ql = bound_q_kl1(k, calc_trial_divisions(k))?.neg_log2;
                out.push_str(&format!("{k},{p},{q},{ql}\n"));
            }
            Ok(out)
        }
        2 => render_grid(|k, t| {
            let rep = bound_q_kt(k, t)?;
            Ok(if rep.hypotheses_met {
                Cell::Value(rep.neg_log2)
            } else {
                Cell::Gate("gate:9t>k")
            })
        }),
        3 => render_grid(|k, t| {
            let rep = bound_q_klt(k, t, calc_trial_divisions(k))?;
            Ok(if rep.hypotheses_met {
                Cell::Value(rep.neg_log2)
            } else {
                Cell::Gate("gate:9t>k-1")
            })
        }),
        4 => render_grid(|k, t| {
            Ok(if p_kt_case_ii_applies(k, t) {
                Cell::Value(BoundReport::build("p_kt", p_kt_case_ii(k, t), true)?.neg_log2)
            } else {
                Cell::Gate("gate:9t>k")
            })
        }),
        other => Err(Error::InvalidInput(format!(
            "table number must be 1–4, got {other}"
        ))),
    }
}

/// All four reference tables, in order.
pub fn emit_tables() -> Result<[String; 4]> {
    Ok([
        render_table(1)?,
        render_table(2)?,
        render_table(3)?,
        render_table(4)?,
    ])
}
