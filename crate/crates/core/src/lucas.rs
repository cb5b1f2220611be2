//! The strong Lucas probable-prime round: base sampling, Lucas sequence
//! evaluation by a fast-doubling ladder, the round itself, a Miller-Rabin
//! round for comparison experiments, and a twin-product precheck.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::intmath::{isqrt_newton, jacobi, two_adic_split};

/// A sampled Lucas parameter pair (P, Q) with discriminant D ≡ P² − 4Q
/// (mod n), attached to its modulus.
///
/// Invariants (maintained by the constructors): n odd ≥ 3, P, Q < n,
/// gcd(Q, n) = 1, and P² − 4Q ≡ D (mod n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LucasBase {
    n: BigUint,
    p: BigUint,
    q: BigUint,
    d: BigInt,
    d_mod: BigUint,
}

/// Outcome of drawing a base for a given (n, D).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseDraw {
    /// gcd(Q, n) = 1: a usable base.
    Accepted(LucasBase),
    /// Q ≡ 0 (mod n) (or n divides D): redraw P.
    ///
    /// If n divides D every draw rejects, so callers must check
    /// gcd(n, 2D) = 1 before looping on this variant.
    Rejected,
    /// 1 < gcd(Q, n) < n: a nontrivial factor of n was exposed.
    Factor(BigUint),
}

fn require_odd_modulus(n: &BigUint) -> Result<()> {
    if n.is_even() {
        return Err(Error::EvenModulus(n.clone()));
    }
    if n < &BigUint::from(3u32) {
        return Err(Error::InvalidInput(format!("modulus must be ≥ 3, got {n}")));
    }
    Ok(())
}

fn reduce_mod(a: &BigInt, n: &BigUint) -> BigUint {
    a.mod_floor(&BigInt::from(n.clone()))
        .to_biguint()
        .expect("reduction by a positive modulus is nonnegative")
}

impl LucasBase {
    /// Builds the base induced by P: Q := (P² − D) / 4 mod n.
    ///
    /// Q is a bijective function of P on Z/n (4 is invertible for odd n),
    /// so drawing P uniformly draws (P, Q) uniformly over admissible pairs.
    pub fn from_p(n: &BigUint, d: &BigInt, p_raw: &BigUint) -> Result<BaseDraw> {
        require_odd_modulus(n)?;
        let d_mod = reduce_mod(d, n);
        let g = d_mod.gcd(n);
        if !g.is_one() {
            // n | D rejects outright; a proper divisor is composite evidence
            return Ok(if &g == n {
                BaseDraw::Rejected
            } else {
                BaseDraw::Factor(g)
            });
        }
        let p = p_raw % n;
        // inv(4) = inv(2)², with inv(2) = (n+1)/2 for odd n
        let inv2 = (n + 1u32) >> 1;
        let inv4 = &inv2 * &inv2 % n;
        let p2 = &p * &p % n;
        let diff = (&p2 + n - &d_mod) % n;
        let q: BigUint = diff * inv4 % n;
        let g = q.gcd(n);
        if g.is_one() {
            let d_mod = reduce_mod(d, n);
            Ok(BaseDraw::Accepted(LucasBase {
                n: n.clone(),
                p,
                q,
                d: d.clone(),
                d_mod,
            }))
        } else if &g == n {
            Ok(BaseDraw::Rejected)
        } else {
            Ok(BaseDraw::Factor(g))
        }
    }

    /// Builds a base directly from (P, Q), deriving D := P² − 4Q mod n.
    /// Requires gcd(Q, n) = 1.
    pub fn from_pq(n: &BigUint, p: &BigInt, q: &BigInt) -> Result<LucasBase> {
        require_odd_modulus(n)?;
        let p = reduce_mod(p, n);
        let q = reduce_mod(q, n);
        if !q.gcd(n).is_one() {
            return Err(Error::InvalidInput(format!(
                "gcd(Q, n) must be 1, got Q = {q} mod {n}"
            )));
        }
        let p2 = &p * &p % n;
        let four_q = BigUint::from(4u32) * &q % n;
        let d_mod = (&p2 + n - four_q) % n;
        Ok(LucasBase {
            n: n.clone(),
            p,
            q,
            d: BigInt::from(d_mod.clone()),
            d_mod,
        })
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub(crate) fn d_mod(&self) -> &BigUint {
        &self.d_mod
    }
}

/// Draws P uniformly from [0, n) and builds the induced base.
pub fn sample_base<R: rand::Rng + ?Sized>(
    n: &BigUint,
    d: &BigInt,
    rng: &mut R,
) -> Result<BaseDraw> {
    require_odd_modulus(n)?;
    let p = rng.gen_biguint_below(n);
    LucasBase::from_p(n, d, &p)
}

fn half_mod(x: BigUint, n: &BigUint) -> BigUint {
    // division by 2 mod odd n: lift to the even representative first
    if x.is_even() {
        x >> 1
    } else {
        (x + n) >> 1
    }
}

fn sub_mod(a: BigUint, b: &BigUint, n: &BigUint) -> BigUint {
    // both operands already reduced
    let s = a + n - b;
    if s >= *n {
        s % n
    } else {
        s
    }
}

/// Lucas sequence terms (U_m, V_m, Q^m) mod n, by a most-significant-bit
/// double-and-add ladder:
///   U_{2j} = U_j·V_j,  V_{2j} = V_j² − 2Q^j,
///   U_{j+1} = (P·U_j + V_j)/2,  V_{j+1} = (D·U_j + P·V_j)/2.
pub fn lucas_uv_mod(base: &LucasBase, m: &BigUint) -> (BigUint, BigUint, BigUint) {
    let n = base.n();
    if m.is_zero() {
        return (BigUint::zero(), BigUint::from(2u32), BigUint::one());
    }
    let p = base.p();
    let q = base.q();
    let d = base.d_mod();
    let mut u = BigUint::one();
    let mut v = p.clone();
    let mut qk = q.clone();
    for i in (0..m.bits() - 1).rev() {
        u = &u * &v % n;
        let v2 = &v * &v % n;
        let twice_qk = (&qk << 1) % n;
        v = sub_mod(v2, &twice_qk, n);
        qk = &qk * &qk % n;
        if m.bit(i) {
            let pu = p * &u % n;
            let pv = p * &v % n;
            let du = d * &u % n;
            let new_u = half_mod((pu + &v) % n, n);
            let new_v = half_mod((du + pv) % n, n);
            u = new_u;
            v = new_v;
            qk = qk * q % n;
        }
    }
    (u, v, qk)
}

/// Independently checkable evidence that n is composite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompositeEvidence {
    /// A Lucas base for which the strong congruences fail.
    LucasWitness { p: BigUint, q: BigUint, d: BigInt },
    /// A Miller-Rabin witness.
    MillerRabinWitness { a: BigUint },
    /// A nontrivial divisor.
    Factor(BigUint),
    /// n = smaller · larger with larger = smaller + 2.
    TwinProduct { smaller: BigUint, larger: BigUint },
}

impl CompositeEvidence {
    /// Re-verifies the evidence against n in polynomial time.
    pub fn verify(&self, n: &BigUint) -> bool {
        match self {
            CompositeEvidence::Factor(g) => {
                g > &BigUint::one() && g < n && (n % g).is_zero()
            }
            CompositeEvidence::TwinProduct { smaller, larger } => {
                smaller > &BigUint::one()
                    && *larger == smaller + 2u32
                    && &(smaller * larger) == n
            }
            CompositeEvidence::LucasWitness { p, q, d } => {
                let base = LucasBase {
                    n: n.clone(),
                    p: p.clone(),
                    q: q.clone(),
                    d: d.clone(),
                    d_mod: reduce_mod(d, n),
                };
                matches!(
                    strong_lucas_round(n, &base),
                    Ok(TestOutcome::Composite(_))
                )
            }
            CompositeEvidence::MillerRabinWitness { a } => {
                matches!(miller_rabin_round(n, a), Ok(TestOutcome::Composite(_)))
            }
        }
    }
}

/// Result of one probable-prime round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestOutcome {
    ProbablePrime,
    Composite(CompositeEvidence),
}

impl TestOutcome {
    pub fn is_probable_prime(&self) -> bool {
        matches!(self, TestOutcome::ProbablePrime)
    }
}

/// One strong Lucas round for n with the given base.
///
/// With ε = (D/n) and n − ε = 2^κ·q (q odd), n passes iff U_q ≡ 0 or
/// V_{2^i q} ≡ 0 for some 0 ≤ i < κ. A zero Jacobi symbol short-circuits
/// to a gcd factor.
pub fn strong_lucas_round(n: &BigUint, base: &LucasBase) -> Result<TestOutcome> {
    require_odd_modulus(n)?;
    if base.n() != n {
        return Err(Error::InvalidInput(
            "base was constructed for a different modulus".into(),
        ));
    }
    let eps = jacobi(base.d(), n)?;
    if eps == 0 {
        let g = base.d_mod().gcd(n);
        if &g == n {
            return Err(Error::InvalidInput(
                "n divides D; no valid base exists".into(),
            ));
        }
        return Ok(TestOutcome::Composite(CompositeEvidence::Factor(g)));
    }
    let m = if eps == 1 { n - 1u32 } else { n + 1u32 };
    let (kappa, q) = two_adic_split(&m).expect("n ± 1 is nonzero");
    let (u, mut v, mut qk) = lucas_uv_mod(base, &q);
    if u.is_zero() || v.is_zero() {
        return Ok(TestOutcome::ProbablePrime);
    }
    for _ in 1..kappa {
        let v2 = &v * &v % n;
        let twice_qk = (&qk << 1) % n;
        v = sub_mod(v2, &twice_qk, n);
        qk = &qk * &qk % n;
        if v.is_zero() {
            return Ok(TestOutcome::ProbablePrime);
        }
    }
    Ok(TestOutcome::Composite(CompositeEvidence::LucasWitness {
        p: base.p().clone(),
        q: base.q().clone(),
        d: base.d().clone(),
    }))
}

/// One strong (Miller-Rabin) round for n with witness a, 1 < a < n − 1.
pub fn miller_rabin_round(n: &BigUint, a: &BigUint) -> Result<TestOutcome> {
    require_odd_modulus(n)?;
    let n_m1 = n - 1u32;
    if a <= &BigUint::one() || a >= &n_m1 {
        return Err(Error::InvalidInput(format!(
            "witness must satisfy 1 < a < n − 1, got {a}"
        )));
    }
    let g = a.gcd(n);
    if !g.is_one() {
        return Ok(TestOutcome::Composite(CompositeEvidence::Factor(g)));
    }
    let (s, d) = two_adic_split(&n_m1).expect("n ≥ 3");
    let mut x = a.modpow(&d, n);
    if x.is_one() || x == n_m1 {
        return Ok(TestOutcome::ProbablePrime);
    }
    for _ in 1..s {
        x = &x * &x % n;
        if x == n_m1 {
            return Ok(TestOutcome::ProbablePrime);
        }
    }
    Ok(TestOutcome::Composite(CompositeEvidence::MillerRabinWitness {
        a: a.clone(),
    }))
}

/// Detects n = r² − 1 = (r−1)(r+1), the twin-product shape, without any
/// primality judgement: returns the split when n + 1 is a perfect square
/// with root ≥ 4. The caller decides whether the two factors are prime.
pub fn twin_product_precheck(n: &BigUint) -> Option<(BigUint, BigUint)> {
    let r = isqrt_newton(&(n + 1u32));
    if &r * &r == n + 1u32 && r >= BigUint::from(4u32) {
        Some((&r - 1u32, r + 1u32))
    } else {
        None
    }
}
