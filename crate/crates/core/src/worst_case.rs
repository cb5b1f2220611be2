//! Worst-case composites: membership in the high-pass-rate sets C_m,
//! the complete structural classifier for m = 3, exact closed-form pass
//! fractions for the structured families, and an exhaustive empirical
//! check of the density bound for odd k-bit integers.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rug::Float;

use crate::bounds::cm_density_bound;
use crate::census::{epsilon_decompose, phi_d_from, sl_count_from, EpsDecomp};
use crate::error::{Error, Result};
use crate::intmath::factorize;

/// Structural forms that can realize a pass fraction above 1/8.
///
/// Each variant carries the parameters realizing it; `eps_signs` are the
/// Jacobi signs (D/p) in the same order as the factors/`k`-sorted parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum C3Form {
    /// n = p² for p ∈ {3, 5}. (7² sits exactly at pass fraction 1/8 for
    /// ε(7) = −1 and below it for ε(7) = +1, so it never qualifies.)
    SquareOfSmallPrime { p: u64, eps: i8 },
    /// n = (2^{k1}·q1 − 1)(2^{k1}·q1 + 1), both factors prime. The sign
    /// pattern (−1, +1) is forced by the shape. Always a member.
    TwinPair { k1: u64, q1: BigUint, eps_signs: (i8, i8) },
    /// n = (2^{k1}·q1 + ε1)(3·2^{k1}·q1 + ε2), both prime.
    /// Member exactly when k1 = 1 and q1 ≥ 5.
    TripleShift { k1: u64, q1: BigUint, eps_signs: (i8, i8) },
    /// n = (2^{k1}·q1 + ε1)(2^{k1+1}·q1 + ε2), both prime.
    /// Member exactly when (q1, k1) ≠ (1, 1).
    DoubleShift { k1: u64, q1: BigUint, eps_signs: (i8, i8) },
    /// n = p1·p2·p3, distinct primes, with every p_i − ε(p_i) dividing
    /// n − ε(n) and sharing one two-adic valuation k1.
    /// Member exactly when not (k1 = 1 with some q_i = 1).
    TripleLucasCarmichael {
        k1: u64,
        primes: Vec<BigUint>,
        eps_signs: Vec<i8>,
    },
    NotInC3,
}

impl C3Form {
    pub fn tag(&self) -> &'static str {
        match self {
            C3Form::SquareOfSmallPrime { .. } => "SquareOfSmallPrime",
            C3Form::TwinPair { .. } => "TwinPair",
            C3Form::TripleShift { .. } => "TripleShift",
            C3Form::DoubleShift { .. } => "DoubleShift",
            C3Form::TripleLucasCarmichael { .. } => "TripleLucasCarmichael",
            C3Form::NotInC3 => "NotInC3",
        }
    }

    pub fn is_member(&self) -> bool {
        !matches!(self, C3Form::NotInC3)
    }

    /// The realizing parameters as JSON (empty object for `NotInC3`).
    pub fn params_json(&self) -> serde_json::Value {
        match self {
            C3Form::SquareOfSmallPrime { p, eps } => serde_json::json!({
                "p": p, "eps": eps,
            }),
            C3Form::TwinPair { k1, q1, eps_signs }
            | C3Form::TripleShift { k1, q1, eps_signs }
            | C3Form::DoubleShift { k1, q1, eps_signs } => serde_json::json!({
                "k1": k1,
                "q1": q1.to_string(),
                "eps_signs": [eps_signs.0, eps_signs.1],
            }),
            C3Form::TripleLucasCarmichael {
                k1,
                primes,
                eps_signs,
            } => serde_json::json!({
                "k1": k1,
                "primes": primes.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "eps_signs": eps_signs,
            }),
            C3Form::NotInC3 => serde_json::json!({}),
        }
    }
}

fn gcd_with_2d(n: &BigUint, d: &BigInt) -> BigUint {
    let two_d = BigUint::from(2u32) * d.magnitude();
    n.gcd(&two_d)
}

/// Exact membership test: n composite, coprime to 2D, with SL/φ_D > 2^{−m}.
pub fn c_m_member(n: &BigUint, d: &BigInt, m: u32) -> Result<bool> {
    if n.is_even() {
        return Err(Error::EvenModulus(n.clone()));
    }
    if n < &BigUint::from(9u32) {
        return Err(Error::InvalidInput(format!("n must be ≥ 9, got {n}")));
    }
    if !gcd_with_2d(n, d).is_one() {
        return Ok(false);
    }
    let f = factorize(n)?;
    if f.is_prime() {
        return Ok(false);
    }
    let decomp = epsilon_decompose(n, d, &f)?;
    let sl = sl_count_from(&decomp);
    let phi = phi_d_from(&decomp);
    // SL/φ > 2^{−m}  ⇔  SL·2^m > φ, exactly
    Ok(sl << m > phi)
}

/// Classifies (n, D) into the structural form that places it above pass
/// fraction 1/8, or `NotInC3`. Purely structural — the exact-α membership
/// test is the independent route this classifier is validated against.
pub fn classify_c3(n: &BigUint, d: &BigInt) -> Result<C3Form> {
    if n.is_even() {
        return Err(Error::EvenModulus(n.clone()));
    }
    if n < &BigUint::from(9u32) {
        return Err(Error::InvalidInput(format!("n must be ≥ 9, got {n}")));
    }
    if !gcd_with_2d(n, d).is_one() {
        return Ok(C3Form::NotInC3);
    }
    let f = factorize(n)?;
    if f.is_prime() {
        return Ok(C3Form::NotInC3);
    }
    let decomp = epsilon_decompose(n, d, &f)?;
    let parts = &decomp.parts;
    match parts.len() {
        1 => {
            // prime power p^r, r ≥ 2
            let p = parts[0].p.to_u64();
            match p {
                Some(p @ (3 | 5)) if parts[0].r == 2 => Ok(C3Form::SquareOfSmallPrime {
                    p,
                    eps: parts[0].eps,
                }),
                _ => Ok(C3Form::NotInC3),
            }
        }
        2 => {
            if !decomp.is_squarefree() {
                return Ok(C3Form::NotInC3);
            }
            let (a, b) = (&parts[0], &parts[1]);
            let k1 = a.k;
            let q1 = a.q.clone();
            let eps_signs = (a.eps, b.eps);
            if a.k == b.k && a.q == b.q {
                debug_assert_eq!(eps_signs, (-1, 1));
                return Ok(C3Form::TwinPair { k1, q1, eps_signs });
            }
            if a.k == b.k && b.q == 3u32 * &a.q {
                return Ok(if k1 == 1 && q1 >= BigUint::from(5u32) {
                    C3Form::TripleShift { k1, q1, eps_signs }
                } else {
                    C3Form::NotInC3
                });
            }
            if b.k == a.k + 1 && a.q == b.q {
                return Ok(if k1 == 1 && q1.is_one() {
                    C3Form::NotInC3
                } else {
                    C3Form::DoubleShift { k1, q1, eps_signs }
                });
            }
            Ok(C3Form::NotInC3)
        }
        3 => {
            if !decomp.is_squarefree() {
                return Ok(C3Form::NotInC3);
            }
            let k1 = parts[0].k;
            if parts.iter().any(|pp| pp.k != k1) {
                return Ok(C3Form::NotInC3);
            }
            // every p_i − ε_i must divide n − ε(n)
            let m = (BigUint::one() << decomp.kappa) * &decomp.q;
            for pp in parts {
                let pm = (BigUint::one() << pp.k) * &pp.q;
                if !(&m % pm).is_zero() {
                    return Ok(C3Form::NotInC3);
                }
            }
            if k1 == 1 && parts.iter().any(|pp| pp.q.is_one()) {
                return Ok(C3Form::NotInC3);
            }
            Ok(C3Form::TripleLucasCarmichael {
                k1,
                primes: parts.iter().map(|pp| pp.p.clone()).collect(),
                eps_signs: parts.iter().map(|pp| pp.eps).collect(),
            })
        }
        _ => Ok(C3Form::NotInC3),
    }
}

/// The closed-form pass fraction SL/φ_D, assembled from per-prime ratios:
///   (Π (g_i−1)/q_i + geom · Π g_i/q_i) / (2^{Σk_i} · Π p_i^{r_i−1})
/// with g_i = gcd(q, q_i) and geom = (2^{s·k1} − 1)/(2^s − 1). This is an
/// arithmetic route independent of the integer counts in the census.
pub fn alpha_exact_formula(decomp: &EpsDecomp) -> BigRational {
    let s = decomp.s() as u64;
    let k1 = decomp.k1();
    let one = BigRational::one();
    let mut prod_g_over_q = one.clone();
    let mut prod_gm1_over_q = one.clone();
    for pp in &decomp.parts {
        let g = decomp.q.gcd(&pp.q);
        prod_g_over_q *= BigRational::new(BigInt::from(g.clone()), BigInt::from(pp.q.clone()));
        prod_gm1_over_q *=
            BigRational::new(BigInt::from(&g - 1u32), BigInt::from(pp.q.clone()));
    }
    let geom = BigRational::new(
        BigInt::from((BigUint::one() << (s * k1)) - 1u32),
        BigInt::from((BigUint::one() << s) - 1u32),
    );
    let sum_k: u64 = decomp.parts.iter().map(|pp| pp.k).sum();
    let p_pow = decomp
        .parts
        .iter()
        .fold(BigUint::one(), |acc, pp| acc * pp.p.pow(pp.r - 1));
    let denom = BigRational::from_integer(BigInt::from((BigUint::one() << sum_k) * p_pow));
    (prod_gm1_over_q + geom * prod_g_over_q) / denom
}

/// Pass fraction of a twin pair with q1 = 1: 1/3 − 1/(3·4^{k1}).
pub fn twin_alpha(k1: u64) -> BigRational {
    let four_k = BigUint::one() << (2 * k1);
    BigRational::new(
        BigInt::from(&four_k - 1u32),
        BigInt::from(3u32 * four_k),
    )
}

/// Exhaustively measures |C_m ∩ {odd k-bit}| / 2^{k−2} and evaluates the
/// density bound 8·Σ_{j=2}^m 2^{m−j−(k−1)/j}.
///
/// Gate: (m+1)² ≤ 4(k−1), checked in exact integer arithmetic. The sweep
/// is capped at k ≤ 22.
pub fn frac_cm_empirical(k: u32, m: u32, d: &BigInt) -> Result<(BigRational, Float)> {
    if k < 4 {
        return Err(Error::InvalidInput(format!("k must be ≥ 4, got {k}")));
    }
    if k > 22 {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive sweep is capped at k = 22, got {k}"
        )));
    }
    let mp1 = (m as u64 + 1) * (m as u64 + 1);
    if mp1 > 4 * (k as u64 - 1) {
        return Err(Error::HypothesisViolated(format!(
            "(m+1)² ≤ 4(k−1) required, got m = {m}, k = {k}"
        )));
    }
    let lo = 1u64 << (k - 1);
    let hi = 1u64 << k;
    let mut count = 0u64;
    let mut n = lo + 1;
    while n < hi {
        if c_m_member(&BigUint::from(n), d, m)? {
            count += 1;
        }
        n += 2;
    }
    let observed = BigRational::new(BigInt::from(count), BigInt::from(1u64 << (k - 2)));
    let bound = cm_density_bound(k as u64, m)?;
    Ok((observed, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::alpha_report;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn d(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn membership_examples() {
        assert!(c_m_member(&big(9), &d(5), 3).unwrap());
        assert!(c_m_member(&big(9), &d(13), 3).unwrap()); // ε(3) = +1 variant
        assert!(!c_m_member(&big(45), &d(14), 3).unwrap());
        assert!(!c_m_member(&big(45), &d(19), 3).unwrap());
        assert!(!c_m_member(&big(49), &d(5), 3).unwrap()); // exactly 1/8
        // primes and shared factors are never members
        assert!(!c_m_member(&big(13), &d(5), 3).unwrap());
        assert!(!c_m_member(&big(35), &d(5), 3).unwrap());
    }

    #[test]
    fn twin_products_can_exceed_quarter() {
        // 11663 = 107·109 with both signs aligned: pass fraction above 1/4,
        // so the two-round worst-case set is nonempty
        let n = big(11663);
        let dv = d(5);
        assert!(c_m_member(&n, &dv, 2).unwrap());
        let rep = alpha_report(&n, &dv).unwrap();
        assert_eq!(rep.sl, big(4321));
        assert_eq!(rep.phi, big(11664));
        assert!(rep.alpha > BigRational::new(1.into(), 4.into()));
        // and the structural reason is the twin shape
        assert!(matches!(
            classify_c3(&n, &dv).unwrap(),
            C3Form::TwinPair { .. }
        ));
    }

    #[test]
    fn classify_examples() {
        let form = classify_c3(&big(15), &d(14)).unwrap();
        match form {
            C3Form::TwinPair { k1, ref q1, eps_signs } => {
                assert_eq!(k1, 2);
                assert_eq!(*q1, big(1));
                assert_eq!(eps_signs, (-1, 1));
            }
            ref other => panic!("expected TwinPair, got {other:?}"),
        }
        // 15 with both signs +1 is the degenerate double-shift: excluded
        assert_eq!(classify_c3(&big(15), &d(19)).unwrap(), C3Form::NotInC3);
        // 49 never qualifies (pass fraction exactly 1/8 at ε(7) = −1)
        assert_eq!(classify_c3(&big(49), &d(5)).unwrap(), C3Form::NotInC3);
        assert_eq!(
            classify_c3(&big(9), &d(5)).unwrap(),
            C3Form::SquareOfSmallPrime { p: 3, eps: -1 }
        );
        assert_eq!(
            classify_c3(&big(25), &d(2)).unwrap(),
            C3Form::SquareOfSmallPrime { p: 5, eps: -1 }
        );
        // 341 = 11·31 with D = 5: signs (+1, +1), k = (1,1), q = (5, 15)
        let form = classify_c3(&big(341), &d(5)).unwrap();
        match form {
            C3Form::TripleShift { k1, ref q1, .. } => {
                assert_eq!((k1, q1.clone()), (1, big(5)));
            }
            ref other => panic!("expected TripleShift, got {other:?}"),
        }
        assert!(c_m_member(&big(341), &d(5), 3).unwrap());
        // 85 = 5·17 has the triple-shift shape with q1 = 3: not a member
        assert_eq!(classify_c3(&big(85), &d(-7)).unwrap(), C3Form::NotInC3);
        assert!(!c_m_member(&big(85), &d(-7), 3).unwrap());
        // 3655 = 5·17·43: the smallest triple Lucas-Carmichael member here
        let form = classify_c3(&big(3655), &d(-7)).unwrap();
        assert!(matches!(form, C3Form::TripleLucasCarmichael { .. }));
        assert!(c_m_member(&big(3655), &d(-7), 3).unwrap());
        // non-squarefree two-prime shapes are excluded
        assert_eq!(classify_c3(&big(45), &d(14)).unwrap(), C3Form::NotInC3);
        // primes
        assert_eq!(classify_c3(&big(13), &d(5)).unwrap(), C3Form::NotInC3);
    }

    #[test]
    fn alpha_formula_matches_examples() {
        for (n, dv, num, den) in [
            (9u64, 5i64, 1i64, 4i64),
            (15, 14, 5, 16),
            (25, 2, 1, 6),
            (49, 5, 1, 8),
            (15, 19, 1, 8),
        ] {
            let f = factorize(&big(n)).unwrap();
            let dec = epsilon_decompose(&big(n), &d(dv), &f).unwrap();
            assert_eq!(
                alpha_exact_formula(&dec),
                BigRational::new(num.into(), den.into()),
                "alpha formula mismatch at n={n}, D={dv}"
            );
        }
    }

    #[test]
    fn twin_alpha_values() {
        assert_eq!(twin_alpha(1), BigRational::new(1.into(), 4.into()));
        assert_eq!(twin_alpha(2), BigRational::new(5.into(), 16.into()));
        let third = BigRational::new(1.into(), 3.into());
        let mut prev = twin_alpha(1);
        for k1 in 2..12 {
            let a = twin_alpha(k1);
            assert!(a > prev && a < third);
            prev = a;
        }
    }

    #[test]
    fn frac_gate() {
        // (m+1)² > 4(k−1) must be rejected
        assert!(matches!(
            frac_cm_empirical(10, 6, &d(5)),
            Err(Error::HypothesisViolated(_))
        ));
        assert!(matches!(
            frac_cm_empirical(23, 3, &d(5)),
            Err(Error::BudgetExceeded(_))
        ));
        // k=14, m=3 is within the gate
        let (obs, bound) = frac_cm_empirical(14, 3, &d(5)).unwrap();
        let obs_f = rug::Float::with_val(
            192,
            rug::Integer::from_str_radix(&obs.numer().to_string(), 10).unwrap(),
        ) / rug::Float::with_val(
            192,
            rug::Integer::from_str_radix(&obs.denom().to_string(), 10).unwrap(),
        );
        assert!(obs_f <= bound);
    }
}
