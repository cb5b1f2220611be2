//! Exact census of passing Lucas bases: SL(D,n) in closed form, the
//! companion totient φ_D, the pass fractions α and ᾱ, and a brute-force
//! enumeration oracle for cross-validation.
//!
//! Everything here is exact big-integer/rational arithmetic; floating
//! point is deliberately banned from this module.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intmath::{factorize, jacobi, two_adic_split, Factorization};
use crate::lucas::{strong_lucas_round, BaseDraw, LucasBase};

/// Default ceiling for the brute-force enumeration oracle.
pub const BRUTE_FORCE_BUDGET: u64 = 5000;

/// One prime power p^r of n, with its Jacobi sign ε = (D/p) and the
/// two-adic split p − ε = 2^k · q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimePower {
    pub p: BigUint,
    pub r: u32,
    pub eps: i8,
    pub k: u64,
    pub q: BigUint,
}

/// The full sign/two-adic decomposition of (n, D): ε(n), n − ε(n) = 2^κ·q,
/// and the per-prime data sorted by ascending k (ties by p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsDecomp {
    pub n: BigUint,
    pub d: BigInt,
    pub eps_n: i8,
    pub kappa: u64,
    pub q: BigUint,
    pub parts: Vec<PrimePower>,
}

impl EpsDecomp {
    /// Number of distinct prime factors.
    pub fn s(&self) -> usize {
        self.parts.len()
    }

    /// The smallest two-adic valuation among the p − ε(p).
    pub fn k1(&self) -> u64 {
        self.parts[0].k
    }

    /// k_i − k_1 for the i-th part (0-indexed).
    pub fn delta(&self, i: usize) -> u64 {
        self.parts[i].k - self.k1()
    }

    pub fn big_omega(&self) -> u64 {
        self.parts.iter().map(|pp| pp.r as u64).sum()
    }

    pub fn is_squarefree(&self) -> bool {
        self.parts.iter().all(|pp| pp.r == 1)
    }
}

fn gcd_with_2d(n: &BigUint, d: &BigInt) -> BigUint {
    let two_d = BigUint::from(2u32) * d.magnitude();
    n.gcd(&two_d)
}

/// Computes the ε/two-adic decomposition from a certified factorization.
/// Requires n odd ≥ 3 and gcd(n, 2D) = 1.
pub fn epsilon_decompose(n: &BigUint, d: &BigInt, f: &Factorization) -> Result<EpsDecomp> {
    if n.is_even() {
        return Err(Error::EvenModulus(n.clone()));
    }
    if n < &BigUint::from(3u32) {
        return Err(Error::InvalidInput(format!("n must be ≥ 3, got {n}")));
    }
    if &f.value() != n {
        return Err(Error::InvalidInput(
            "factorization does not multiply back to n".into(),
        ));
    }
    if !gcd_with_2d(n, d).is_one() {
        return Err(Error::InvalidInput(format!(
            "gcd(n, 2D) must be 1 for n = {n}, D = {d}"
        )));
    }
    let eps_n = jacobi(d, n)?;
    debug_assert!(eps_n != 0, "gcd(n, 2D) = 1 forces a nonzero Jacobi symbol");
    let m = if eps_n == 1 { n - 1u32 } else { n + 1u32 };
    let (kappa, q) = two_adic_split(&m)?;
    let mut parts = Vec::with_capacity(f.omega());
    for (p, r) in f.entries() {
        let eps = jacobi(d, p)?;
        let pm = if eps == 1 { p - 1u32 } else { p + 1u32 };
        let (k, pq) = two_adic_split(&pm)?;
        parts.push(PrimePower {
            p: p.clone(),
            r: *r,
            eps,
            k,
            q: pq,
        });
    }
    parts.sort_by(|a, b| a.k.cmp(&b.k).then_with(|| a.p.cmp(&b.p)));
    // consistency: ε(n) is the product of the per-prime signs
    debug_assert_eq!(
        parts
            .iter()
            .map(|pp| if pp.r % 2 == 0 { 1i8 } else { pp.eps })
            .product::<i8>(),
        eps_n
    );
    Ok(EpsDecomp {
        n: n.clone(),
        d: d.clone(),
        eps_n,
        kappa,
        q,
        parts,
    })
}

/// SL(D,n) from a decomposition:
///   Π (gcd(q, q_i) − 1)  +  Σ_{j=0}^{k_1−1} 2^{js} Π gcd(q, q_i)
/// where the geometric sum collapses to (2^{s·k_1} − 1)/(2^s − 1).
pub fn sl_count_from(decomp: &EpsDecomp) -> BigUint {
    let gs: Vec<BigUint> = decomp.parts.iter().map(|pp| decomp.q.gcd(&pp.q)).collect();
    let term1 = gs
        .iter()
        .fold(BigUint::one(), |acc, g| acc * (g - 1u32));
    let s = decomp.s() as u64;
    let k1 = decomp.k1();
    let geom = ((BigUint::one() << (s * k1)) - 1u32) / ((BigUint::one() << s) - 1u32);
    let prod_g = gs.iter().fold(BigUint::one(), |acc, g| acc * g);
    term1 + geom * prod_g
}

/// Exact count of bases (P, Q) mod n passing the strong Lucas round.
/// Zero by convention when gcd(n, 2D) > 1.
pub fn sl_count(n: &BigUint, d: &BigInt) -> Result<BigUint> {
    if n.is_even() {
        return Err(Error::EvenModulus(n.clone()));
    }
    if n < &BigUint::from(3u32) {
        return Err(Error::InvalidInput(format!("n must be ≥ 3, got {n}")));
    }
    if !gcd_with_2d(n, d).is_one() {
        return Ok(BigUint::zero());
    }
    let f = factorize(n)?;
    let decomp = epsilon_decompose(n, d, &f)?;
    Ok(sl_count_from(&decomp))
}

/// φ_D from a decomposition: Π p^{r−1}(p − ε(p)).
pub fn phi_d_from(decomp: &EpsDecomp) -> BigUint {
    decomp.parts.iter().fold(BigUint::one(), |acc, pp| {
        let pm = (BigUint::one() << pp.k) * &pp.q; // p − ε(p)
        acc * pp.p.pow(pp.r - 1) * pm
    })
}

/// The multiplicative companion totient with φ_D(p^r) = p^{r−1}(p − ε(p)).
/// Errors when gcd(n, 2D) > 1.
pub fn phi_d(n: &BigUint, d: &BigInt) -> Result<BigUint> {
    if n.is_even() {
        return Err(Error::EvenModulus(n.clone()));
    }
    if n < &BigUint::from(3u32) {
        return Err(Error::InvalidInput(format!("n must be ≥ 3, got {n}")));
    }
    if !gcd_with_2d(n, d).is_one() {
        return Err(Error::InvalidInput(format!(
            "gcd(n, 2D) must be 1 for n = {n}, D = {d}"
        )));
    }
    let f = factorize(n)?;
    let decomp = epsilon_decompose(n, d, &f)?;
    Ok(phi_d_from(&decomp))
}

/// Count of admissible P in [0, n): those with gcd((P² − D)/4, n) = 1.
/// Multiplicative: Π p^{r−1}(p − ε(p) − 1).
pub fn admissible_pair_count(decomp: &EpsDecomp) -> BigUint {
    decomp.parts.iter().fold(BigUint::one(), |acc, pp| {
        let pm = (BigUint::one() << pp.k) * &pp.q - 1u32; // p − ε(p) − 1
        acc * pp.p.pow(pp.r - 1) * pm
    })
}

/// The exact pass statistics of (n, D).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaReport {
    pub n: BigUint,
    pub d: BigInt,
    pub sl: BigUint,
    pub phi: BigUint,
    /// SL / φ_D.
    pub alpha: BigRational,
    /// SL / (n − ε(n) − 1), the per-round pass probability convention.
    ///
    /// The denominator is the conventional one, not the admissible-pair
    /// count (which [`AlphaReport::admissible`] carries); the two differ
    /// slightly, and both are exposed so the gap is measurable.
    pub alpha_bar: BigRational,
    pub admissible: BigUint,
    pub decomp: EpsDecomp,
}

fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// Full exact census for odd composite n ≥ 9 coprime to 2D.
pub fn alpha_report(n: &BigUint, d: &BigInt) -> Result<AlphaReport> {
    if n.is_even() {
        return Err(Error::EvenModulus(n.clone()));
    }
    if n < &BigUint::from(9u32) {
        return Err(Error::InvalidInput(format!("n must be ≥ 9, got {n}")));
    }
    if !gcd_with_2d(n, d).is_one() {
        return Err(Error::InvalidInput(format!(
            "gcd(n, 2D) must be 1 for n = {n}, D = {d}"
        )));
    }
    let f = factorize(n)?;
    if f.is_prime() {
        return Err(Error::InvalidInput(format!("n = {n} is prime")));
    }
    let decomp = epsilon_decompose(n, d, &f)?;
    let sl = sl_count_from(&decomp);
    let phi = phi_d_from(&decomp);
    let admissible = admissible_pair_count(&decomp);
    // n − ε(n) − 1
    let pass_den = if decomp.eps_n == 1 {
        n - 2u32
    } else {
        n.clone()
    };
    let alpha = ratio(&sl, &phi);
    let alpha_bar = ratio(&sl, &pass_den);
    Ok(AlphaReport {
        n: n.clone(),
        d: d.clone(),
        sl,
        phi,
        alpha,
        alpha_bar,
        admissible,
        decomp,
    })
}

/// Brute-force SL(D,n): enumerate every P in [0, n), build the induced
/// base, and run the actual strong Lucas round. The independent oracle for
/// [`sl_count`]. Budget-capped (default 5000).
pub fn brute_force_sl(n: &BigUint, d: &BigInt) -> Result<u64> {
    brute_force_sl_with(n, d, BRUTE_FORCE_BUDGET)
}

/// [`brute_force_sl`] with an explicit budget.
pub fn brute_force_sl_with(n: &BigUint, d: &BigInt, budget: u64) -> Result<u64> {
    if n.is_even() {
        return Err(Error::EvenModulus(n.clone()));
    }
    let n_u64 = match n.to_u64() {
        Some(v) if v <= budget => v,
        _ => {
            return Err(Error::BudgetExceeded(format!(
                "brute-force enumeration is capped at {budget}, got n = {n}"
            )))
        }
    };
    if n_u64 < 9 {
        return Err(Error::InvalidInput(format!("n must be ≥ 9, got {n}")));
    }
    let mut passes = 0u64;
    for p in 0..n_u64 {
        match LucasBase::from_p(n, d, &BigUint::from(p))? {
            BaseDraw::Accepted(base) => {
                if strong_lucas_round(n, &base)?.is_probable_prime() {
                    passes += 1;
                }
            }
            BaseDraw::Rejected | BaseDraw::Factor(_) => {}
        }
    }
    Ok(passes)
}

/// Constructs n = Π p_i^{e_i} where every prime satisfies (D/p_i) = −1,
/// scanning odd primes upward. For such n, φ_D(n) = Π (p^r + p^{r−1}).
pub fn all_nonresidue_witness(
    d: &BigInt,
    exponents: &[u32],
) -> Result<(BigUint, Factorization)> {
    if exponents.is_empty() || exponents.iter().any(|&e| e == 0) {
        return Err(Error::InvalidInput(
            "exponent list must be nonempty with positive entries".into(),
        ));
    }
    let mut chosen: Vec<(BigUint, u32)> = Vec::with_capacity(exponents.len());
    let mut idx = 0usize;
    let mut candidate = 3u64;
    while idx < exponents.len() {
        let p = BigUint::from(candidate);
        if crate::intmath::is_prime_oracle(&p) && jacobi(d, &p)? == -1 {
            chosen.push((p, exponents[idx]));
            idx += 1;
        }
        candidate += 2;
    }
    let f = Factorization::new(chosen)?;
    Ok((f.value(), f))
}
