//! Strong Lucas probable-prime testing, exactly.
//!
//! The strong Lucas test takes an odd n and a discriminant D with Jacobi
//! symbol ε = (D/n) ≠ 0, writes n − ε = 2^κ·q, draws a base (P, Q) with
//! P² − 4Q ≡ D, and accepts when U_q ≡ 0 or V_{2^i q} ≡ 0 (0 ≤ i < κ) in
//! the associated Lucas sequence. This crate provides:
//!
//! - [`lucas`]: the test itself over arbitrary-precision integers, with
//!   uniform base sampling and re-verifiable composite evidence;
//! - [`census`]: the exact count SL(D, n) of bases that pass for a given
//!   composite n, the matching totient φ_D, and both pass-fraction
//!   normalizations α and ᾱ — closed-form from the factorization, plus a
//!   brute-force counter used only as a cross-check;
//! - [`worst_case`]: the structural classification of every composite
//!   whose pass fraction exceeds 2^{−3}, exact membership tests for the
//!   sets C_m, and exhaustive density measurements;
//! - [`bounds`]: 192-bit evaluators for the closed-form average-case
//!   error bounds q_{k,t}, q_{k,l,t} and the Miller–Rabin analogue
//!   p_{k,t}, with the four reference tables reproduced byte-exactly;
//! - [`experiment`]: the random generator ("draw odd k-bit integers,
//!   output the first passing t rounds"), the exact small-k error
//!   computed by exhaustive enumeration, and seeded Monte Carlo runs;
//! - [`intmath`]: shared integer primitives (Jacobi symbol, sieves,
//!   factorization, and a deterministic primality oracle that is kept
//!   firewalled from the Lucas code it adjudicates).
//!
//! Everything randomized is deterministic given a seed; everything exact
//! is computed in integer/rational arithmetic, never floating point.

pub mod bounds;
pub mod census;
pub mod error;
pub mod experiment;
pub mod intmath;
pub mod lucas;
pub mod worst_case;

pub use error::{Error, Result};
