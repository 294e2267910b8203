//! Exact rational helpers on top of `num::BigRational`.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).unwrap_or_else(zero)
}

/// Closest fraction with denominator at most `max_den` (continued fractions).
pub fn approximate(x: f64, max_den: i64) -> Q {
    if !x.is_finite() {
        return zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_den as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return zero();
    }
    let r = Q::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -r
    } else {
        r
    }
}

/// Parses `"3"`, `"-3/4"` or `"0.25"`.
pub fn parse(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((i, f)) = s.split_once('.') {
        let neg = i.starts_with('-');
        let digits = format!("{}{}", i.trim_start_matches('-'), f);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num::pow(BigInt::from(10), f.len());
        let r = Q::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

pub fn fmt(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn min(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max(a: &Q, b: &Q) -> Q {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn abs_diff(a: &Q, b: &Q) -> Q {
    (a - b).abs()
}

/// Smallest power of two (possibly negative exponent) that is `>= x`, for `x > 0`.
pub fn dyadic_ceil(x: &Q) -> Q {
    assert!(x.is_positive());
    let two = q(2);
    let mut p = one();
    if &p >= x {
        while &(&p / &two) >= x {
            p = &p / &two;
        }
    } else {
        while &p < x {
            p = &p * &two;
        }
    }
    p
}

/// `ceil(log2(x))` for `x > 0`.
pub fn ceil_log2(x: &Q) -> i64 {
    let p = dyadic_ceil(x);
    let mut k = 0i64;
    let mut t = one();
    let two = q(2);
    if p >= t {
        while t < p {
            t = &t * &two;
            k += 1;
        }
    } else {
        while t > p {
            t = &t / &two;
            k -= 1;
        }
    }
    k
}

pub fn pow2(k: i64) -> Q {
    let two = q(2);
    if k >= 0 {
        num::pow(two, k as usize)
    } else {
        one() / num::pow(two, (-k) as usize)
    }
}
