//! Exact rational arithmetic helpers.
//!
//! All weights, LP values and load bounds in this crate are exact
//! `BigRational`s. Floating point never enters any feasibility or load
//! computation.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Exact rational number used throughout the crate.
pub type Q = BigRational;

/// Integer as a rational.
pub fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// The fraction `n/d`.
pub fn qr(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_zero() -> Q {
    Q::zero()
}

pub fn q_one() -> Q {
    Q::one()
}

/// Smallest integer `>= x`, as an `i64`.
///
/// Panics if the result does not fit; instance sizes in this crate keep
/// everything far below that.
pub fn ceil_to_i64(x: &Q) -> i64 {
    let c = x.ceil();
    let i = c.to_integer();
    i64::try_from(i).expect("rational ceiling out of i64 range")
}

/// Serialize as `"p/q"` (or just `"p"` when the denominator is one).
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse the `"p/q"` format produced by [`fmt_q`].
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = num
        .trim()
        .parse()
        .map_err(|e| format!("bad numerator {num:?}: {e}"))?;
    let d: BigInt = den
        .trim()
        .parse()
        .map_err(|e| format!("bad denominator {den:?}: {e}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(BigRational::new(n, d))
}

/// `max(1, ceil(x))` — the integral working capacity used by the pipeline.
pub fn integralize_capacity(x: &Q) -> i64 {
    ceil_to_i64(x).max(1)
}

/// True iff `x` is a nonnegative multiple of `grid`.
pub fn on_grid(x: &Q, grid: &Q) -> bool {
    !x.is_negative() && (x / grid).denom().is_one()
}
