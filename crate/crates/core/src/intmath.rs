//! Integer building blocks: Jacobi symbol, integer square root, two-adic
//! splitting, sieves, deterministic factorization, and a firewalled
//! primality oracle.
//!
//! The oracle ([`is_prime_oracle`]) exists to certify factors and to
//! adjudicate experiment outputs. It is deliberately kept out of the
//! probable-prime test under study: nothing in the Lucas round path calls it.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest limit accepted by [`sieve_primes`].
pub const SIEVE_LIMIT_MAX: u64 = 1 << 27;

/// Largest upper endpoint accepted by [`prime_count_range`].
pub const COUNT_LIMIT_MAX: u64 = 1 << 32;

const SMALL_PRIME_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Jacobi symbol (a/n) for odd n ≥ 1, computed by the binary algorithm.
///
/// Returns −1, 0, or +1; 0 exactly when gcd(a, n) > 1. `a` may be negative
/// or larger than `n`; it is reduced into `[0, n)` first.
pub fn jacobi(a: &BigInt, n: &BigUint) -> Result<i8> {
    if n.is_even() {
        return Err(Error::EvenModulus(n.clone()));
    }
    let n_int = BigInt::from(n.clone());
    let mut a = a
        .mod_floor(&n_int)
        .to_biguint()
        .expect("mod_floor of a positive modulus is nonnegative");
    let mut n = n.clone();
    let mut sign = 1i8;
    while !a.is_zero() {
        let z = a.trailing_zeros().expect("a is nonzero");
        if z > 0 {
            a >>= z;
            // each factor of 2 flips the sign when n ≡ ±3 (mod 8)
            if z & 1 == 1 {
                let r = (&n % 8u32).to_u8().unwrap();
                if r == 3 || r == 5 {
                    sign = -sign;
                }
            }
        }
        // quadratic reciprocity for the now-odd a
        if (&a % 4u32).to_u8().unwrap() == 3 && (&n % 4u32).to_u8().unwrap() == 3 {
            sign = -sign;
        }
        let r = &n % &a;
        n = std::mem::replace(&mut a, r);
    }
    Ok(if n.is_one() { sign } else { 0 })
}

/// Floor of the square root, by Newton iteration seeded from the bit length.
///
/// The seed `2^ceil(bits/2)` is at least the true root, so the iteration
/// decreases monotonically; a final downward correction guards the boundary.
pub fn isqrt_newton(n: &BigUint) -> BigUint {
    if n < &BigUint::from(2u32) {
        return n.clone();
    }
    let half_bits = (n.bits() + 1) / 2;
    let mut x = BigUint::one() << half_bits;
    loop {
        let y = (&x + n / &x) >> 1;
        if y >= x {
            break;
        }
        x = y;
    }
    while &x * &x > *n {
        x -= 1u32;
    }
    debug_assert!(&x * &x <= *n && (&x + 1u32) * (&x + 1u32) > *n);
    x
}

/// Writes m = 2^k · q with q odd, returning (k, q). Errors on m = 0.
pub fn two_adic_split(m: &BigUint) -> Result<(u64, BigUint)> {
    let k = m.trailing_zeros().ok_or(Error::ZeroValue)?;
    Ok((k, m >> k))
}

/// All primes ≤ `limit`, from a bit-packed odd-only sieve of Eratosthenes.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    if limit > SIEVE_LIMIT_MAX {
        return Err(Error::SieveLimitExceeded {
            requested: limit,
            max: SIEVE_LIMIT_MAX,
        });
    }
    if limit < 2 {
        return Ok(Vec::new());
    }
    // bit i represents the odd number 2i + 3
    let n_odds = ((limit - 1) / 2) as usize;
    let mut composite = vec![0u64; (n_odds + 63) / 64];
    let mut p = 3u64;
    while p * p <= limit {
        let idx = ((p - 3) / 2) as usize;
        if composite[idx >> 6] & (1 << (idx & 63)) == 0 {
            let mut j = (p * p - 3) / 2;
            while j < n_odds as u64 {
                composite[(j >> 6) as usize] |= 1 << (j & 63);
                j += p;
            }
        }
        p += 2;
    }
    let mut primes = Vec::with_capacity(n_odds / 4 + 2);
    primes.push(2);
    for i in 0..n_odds {
        if composite[i >> 6] & (1 << (i & 63)) == 0 {
            primes.push(2 * i as u64 + 3);
        }
    }
    Ok(primes)
}

fn isqrt_u64(x: u64) -> u64 {
    if x < 2 {
        return x;
    }
    let mut r = (x as f64).sqrt() as u64;
    while r.saturating_mul(r) > x {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= x {
        r += 1;
    }
    r
}

/// Number of primes in `[lo, hi]`, by a segmented sieve.
///
/// This is an independent code path from [`sieve_primes`] (it even generates
/// its base primes by trial division), so the two can cross-check each other.
pub fn prime_count_range(lo: u64, hi: u64) -> Result<u64> {
    if hi > COUNT_LIMIT_MAX {
        return Err(Error::SieveLimitExceeded {
            requested: hi,
            max: COUNT_LIMIT_MAX,
        });
    }
    if hi < 2 || hi < lo {
        return Ok(0);
    }
    let lo = lo.max(2);
    let root = isqrt_u64(hi);
    let mut base: Vec<u64> = Vec::new();
    let mut c = 2u64;
    while c <= root {
        if base
            .iter()
            .take_while(|&&p| p * p <= c)
            .all(|&p| c % p != 0)
        {
            base.push(c);
        }
        c += 1;
    }
    const SEGMENT: u64 = 1 << 20;
    let mut count = 0u64;
    let mut start = lo;
    while start <= hi {
        let end = hi.min(start.saturating_add(SEGMENT - 1));
        let len = (end - start + 1) as usize;
        let mut composite = vec![false; len];
        for &p in &base {
            if p.saturating_mul(p) > end {
                break;
            }
            // first multiple of p in the segment, but never p itself
            let mut j = (start.div_ceil(p) * p).max(p * p);
            while j <= end {
                composite[(j - start) as usize] = true;
                j += p;
            }
        }
        count += composite.iter().filter(|&&c| !c).count() as u64;
        start = end + 1;
    }
    Ok(count)
}

/// The `l`-th odd prime, 1-indexed: 1 → 3, 2 → 5, 128 → 727.
pub fn nth_odd_prime(l: u64) -> Result<u64> {
    if l == 0 {
        return Err(Error::InvalidInput(
            "odd-prime index is 1-based; there is no 0th odd prime".into(),
        ));
    }
    // we need the (l+1)-th prime overall
    let n = l + 1;
    let mut bound: u64 = if n < 6 {
        16
    } else {
        let nf = n as f64;
        (nf * (nf.ln() + nf.ln().ln())).ceil() as u64 + 16
    };
    loop {
        let primes = sieve_primes(bound)?;
        if primes.len() as u64 > l {
            return Ok(primes[l as usize]);
        }
        bound = bound.saturating_mul(2);
    }
}

/// base^exp mod modulus. Errors on a zero modulus.
pub fn mod_pow(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> Result<BigUint> {
    if modulus.is_zero() {
        return Err(Error::ZeroValue);
    }
    if modulus.is_one() {
        return Ok(BigUint::zero());
    }
    Ok(base.modpow(exp, modulus))
}

/// Deterministic 64-bit mixer; used for reproducible substream seeds.
pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mul_mod_u64(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn add_mod_u64(a: u64, b: u64, n: u64) -> u64 {
    let s = (a as u128 + b as u128) % n as u128;
    s as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1u64 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, n);
        }
        base = mul_mod_u64(base, base, n);
        exp >>= 1;
    }
    acc
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Deterministic Miller-Rabin for 64-bit inputs (witness set 2..37).
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIME_WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIME_WITNESSES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mr_pass_big(n: &BigUint, a: &BigUint, s: u64, d: &BigUint) -> bool {
    let n_m1 = n - 1u32;
    let a = a % n;
    if a.is_zero() {
        return true;
    }
    let mut x = a.modpow(d, n);
    if x.is_one() || x == n_m1 {
        return true;
    }
    for _ in 1..s {
        x = &x * &x % n;
        if x == n_m1 {
            return true;
        }
    }
    false
}

/// Primality oracle: deterministic Miller-Rabin below 2^64, and 64 rounds
/// (12 fixed witnesses plus 52 derived deterministically from n) above.
///
/// Above 2^64 the answer is probabilistic with error below 4^{−64}, but it
/// is a pure function of n, so every run agrees. This oracle certifies
/// factors and adjudicates generator outputs; the strong Lucas test itself
/// never consults it.
pub fn is_prime_oracle(n: &BigUint) -> bool {
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    if n.is_even() {
        return false;
    }
    let (s, d) = two_adic_split(&(n - 1u32)).expect("n ≥ 3");
    for &a in &SMALL_PRIME_WITNESSES {
        if !mr_pass_big(n, &BigUint::from(a), s, &d) {
            return false;
        }
    }
    let mut state = n.iter_u64_digits().next().unwrap_or(0) ^ n.bits().wrapping_mul(0x9E37_79B9_7F4A_7C15);
    for _ in 0..52 {
        let a = BigUint::from(splitmix64(&mut state)) + 2u32;
        if !mr_pass_big(n, &a, s, &d) {
            return false;
        }
    }
    true
}

/// A certified prime factorization: ascending primes with exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    entries: Vec<(BigUint, u32)>,
}

impl Factorization {
    /// Builds a factorization from (prime, exponent) entries, validating
    /// primality (via the oracle), positive exponents, and ascending order.
    pub fn new(entries: Vec<(BigUint, u32)>) -> Result<Self> {
        for window in entries.windows(2) {
            if window[0].0 >= window[1].0 {
                return Err(Error::InvalidInput(
                    "factorization entries must be strictly ascending".into(),
                ));
            }
        }
        for (p, e) in &entries {
            if *e == 0 {
                return Err(Error::InvalidInput("zero exponent in factorization".into()));
            }
            if !is_prime_oracle(p) {
                return Err(Error::InvalidInput(format!("{p} is not prime")));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(BigUint, u32)] {
        &self.entries
    }

    /// The factored integer, Π p^r.
    pub fn value(&self) -> BigUint {
        self.entries
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.entries.len()
    }

    /// Number of prime factors counted with multiplicity.
    pub fn big_omega(&self) -> u64 {
        self.entries.iter().map(|(_, e)| *e as u64).sum()
    }

    pub fn is_prime(&self) -> bool {
        self.entries.len() == 1 && self.entries[0].1 == 1
    }

    pub fn is_squarefree(&self) -> bool {
        self.entries.iter().all(|(_, e)| *e == 1)
    }
}

/// Effort knobs for [`factorize_with`].
#[derive(Debug, Clone)]
pub struct FactorConfig {
    /// Trial-divide by primes up to this bound first.
    pub trial_bound: u64,
    /// Iteration budget per rho attempt.
    pub rho_budget: u64,
    /// Number of rho attempts (fresh polynomial each time) before giving up.
    pub rho_retries: u32,
    /// Seed for the rho polynomial/starting-point stream. Fixed default, so
    /// factorization is deterministic.
    pub seed: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        Self {
            trial_bound: 1_000_000,
            rho_budget: 1 << 22,
            rho_retries: 8,
            seed: 0x9E37_79B9_7F4A_7C15,
        }
    }
}

static TRIAL_PRIMES: OnceLock<Vec<u64>> = OnceLock::new();

fn trial_primes() -> &'static [u64] {
    TRIAL_PRIMES.get_or_init(|| sieve_primes(1_000_000).expect("fixed limit within budget"))
}

/// Brent-cycle rho with batched gcds, for 64-bit composites.
fn brent_rho_u64(n: u64, seed: u64, budget: u64) -> Option<u64> {
    let mut state = seed;
    let c = splitmix64(&mut state) % (n - 2) + 1;
    let mut y = splitmix64(&mut state) % n;
    let batch = 128u64;
    let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
    let mut x = 0u64;
    let mut ys = 0u64;
    let mut steps = 0u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = add_mod_u64(mul_mod_u64(y, y, n), c, n);
        }
        let mut k = 0u64;
        while k < r && g == 1 {
            ys = y;
            let lim = batch.min(r - k);
            for _ in 0..lim {
                y = add_mod_u64(mul_mod_u64(y, y, n), c, n);
                q = mul_mod_u64(q, x.abs_diff(y), n);
            }
            g = gcd_u64(q, n);
            k += lim;
        }
        steps += r;
        if steps > budget {
            return None;
        }
        r <<= 1;
    }
    if g == n {
        // batched gcd overshot; replay one step at a time
        loop {
            ys = add_mod_u64(mul_mod_u64(ys, ys, n), c, n);
            g = gcd_u64(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    if g == n {
        None
    } else {
        Some(g)
    }
}

/// Brent-cycle rho for arbitrary-size composites.
fn brent_rho_big(n: &BigUint, seed: u64, budget: u64) -> Option<BigUint> {
    let mut state = seed;
    let c = BigUint::from(splitmix64(&mut state) % 1024 + 1);
    let mut y = BigUint::from(splitmix64(&mut state)) % n;
    let batch = 128u64;
    let one = BigUint::one();
    let (mut g, mut r, mut q) = (BigUint::one(), 1u64, BigUint::one());
    let mut x = BigUint::zero();
    let mut ys = BigUint::zero();
    let mut steps = 0u64;
    let abs_diff = |a: &BigUint, b: &BigUint| if a >= b { a - b } else { b - a };
    while g == one {
        x = y.clone();
        for _ in 0..r {
            y = (&y * &y + &c) % n;
        }
        let mut k = 0u64;
        while k < r && g == one {
            ys = y.clone();
            let lim = batch.min(r - k);
            for _ in 0..lim {
                y = (&y * &y + &c) % n;
                q = q * abs_diff(&x, &y) % n;
            }
            g = q.gcd(n);
            k += lim;
        }
        steps += r;
        if steps > budget {
            return None;
        }
        r <<= 1;
    }
    if &g == n {
        loop {
            ys = (&ys * &ys + &c) % n;
            g = abs_diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    if &g == n {
        None
    } else {
        Some(g)
    }
}

fn factor_u64_into(v: u64, cfg: &FactorConfig, out: &mut BTreeMap<BigUint, u32>) -> Result<()> {
    let mut rem = v;
    for &p in trial_primes() {
        if p > cfg.trial_bound || p * p > rem {
            break;
        }
        while rem % p == 0 {
            rem /= p;
            *out.entry(BigUint::from(p)).or_insert(0) += 1;
        }
    }
    if rem == 1 {
        return Ok(());
    }
    let mut stack = vec![rem];
    while let Some(m) = stack.pop() {
        if is_prime_u64(m) {
            *out.entry(BigUint::from(m)).or_insert(0) += 1;
            continue;
        }
        let mut split = None;
        for attempt in 0..cfg.rho_retries {
            let mut s = cfg.seed ^ m ^ (attempt as u64) << 32;
            let seed = splitmix64(&mut s);
            if let Some(d) = brent_rho_u64(m, seed, cfg.rho_budget) {
                split = Some(d);
                break;
            }
        }
        match split {
            Some(d) => {
                stack.push(d);
                stack.push(m / d);
            }
            None => {
                return Err(Error::FactorSplitFailed {
                    cofactor: BigUint::from(m),
                })
            }
        }
    }
    Ok(())
}

/// Factors n with the default effort configuration.
pub fn factorize(n: &BigUint) -> Result<Factorization> {
    factorize_with(n, &FactorConfig::default())
}

/// Factors n by trial division up to `cfg.trial_bound`, then Brent rho with
/// oracle-certified primality of every factor. Deterministic for a fixed
/// config. Errors with [`Error::FactorSplitFailed`] if the rho budget runs
/// out (only plausible for adversarially large semiprimes).
pub fn factorize_with(n: &BigUint, cfg: &FactorConfig) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::ZeroValue);
    }
    let mut out: BTreeMap<BigUint, u32> = BTreeMap::new();
    if let Some(v) = n.to_u64() {
        if v > 1 {
            factor_u64_into(v, cfg, &mut out)?;
        }
        return Ok(Factorization {
            entries: out.into_iter().collect(),
        });
    }
    let mut rem = n.clone();
    for &p in trial_primes() {
        if p > cfg.trial_bound {
            break;
        }
        if let Some(r) = rem.to_u64() {
            // small enough now; finish on the fast path
            if r > 1 {
                factor_u64_into(r, cfg, &mut out)?;
            }
            return Ok(Factorization {
                entries: out.into_iter().collect(),
            });
        }
        while (&rem % p).is_zero() {
            rem /= p;
            *out.entry(BigUint::from(p)).or_insert(0) += 1;
        }
    }
    if let Some(r) = rem.to_u64() {
        if r > 1 {
            factor_u64_into(r, cfg, &mut out)?;
        }
        return Ok(Factorization {
            entries: out.into_iter().collect(),
        });
    }
    let mut stack = vec![rem];
    while let Some(m) = stack.pop() {
        if let Some(v) = m.to_u64() {
            factor_u64_into(v, cfg, &mut out)?;
            continue;
        }
        if is_prime_oracle(&m) {
            *out.entry(m).or_insert(0) += 1;
            continue;
        }
        let mut split = None;
        for attempt in 0..cfg.rho_retries {
            let mut s = cfg.seed
                ^ m.iter_u64_digits().next().unwrap_or(0)
                ^ (attempt as u64) << 32;
            let seed = splitmix64(&mut s);
            if let Some(d) = brent_rho_big(&m, seed, cfg.rho_budget) {
                split = Some(d);
                break;
            }
        }
        match split {
            Some(d) => {
                let q = &m / &d;
                stack.push(d);
                stack.push(q);
            }
            None => return Err(Error::FactorSplitFailed { cofactor: m }),
        }
    }
    Ok(Factorization {
        entries: out.into_iter().collect(),
    })
}
