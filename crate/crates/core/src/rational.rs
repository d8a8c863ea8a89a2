//! Exact rational helpers.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Nonnegative float rounded to the nearest multiple of `2^-bits`.
pub fn from_f64_grid(x: f64, bits: u32) -> Q {
    let scale = (1u64 << bits) as f64;
    let n = (x.max(0.0) * scale).round();
    Q::new(BigInt::from(n as u128), BigInt::from(1u64 << bits))
}

/// Smallest multiple of `2^-bits` that is at least `x` (x finite, nonnegative).
pub fn ceil_f64_grid(x: f64, bits: u32) -> Q {
    let scale = (1u64 << bits) as f64;
    let n = (x.max(0.0) * scale).ceil();
    Q::new(BigInt::from(n as u128), BigInt::from(1u64 << bits))
}

/// Largest multiple of `2^-bits` that is at most `x`.
pub fn floor_f64_grid(x: f64, bits: u32) -> Q {
    let scale = (1u64 << bits) as f64;
    let n = (x.max(0.0) * scale).floor();
    Q::new(BigInt::from(n as u128), BigInt::from(1u64 << bits))
}

pub fn ceil_to_u64(x: &Q) -> u64 {
    x.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
}

pub fn is_nonneg(x: &Q) -> bool {
    !x.is_negative()
}

/// Renders `a/b` or `a`.
pub fn show(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse(s: &str) -> Option<Q> {
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                None
            } else {
                Some(Q::new(a, b))
            }
        }
        None => s.trim().parse::<BigInt>().ok().map(Q::from_integer),
    }
}
