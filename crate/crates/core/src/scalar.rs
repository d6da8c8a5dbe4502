//! Scalar abstraction shared by the geometry kernel.
//!
//! The kernel is written once over [`Scalar`] and instantiated either with a
//! floating type (incidence predicates use an absolute tolerance) or with
//! [`BigRational`], where every predicate is exact and the tolerance is zero.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Incidence tolerance used by the double-precision kernel.
pub const GEOM_TOLERANCE_F64: f64 = 1e-9;

/// Incidence tolerance used by the single-precision kernel.
pub const GEOM_TOLERANCE_F32: f32 = 1e-4;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// `true` when arithmetic is closed and predicates are exact.
    const EXACT: bool;

    /// Absolute distance below which two features are considered incident.
    fn tolerance() -> Self;

    /// Conversion from a double. Exact for rationals (every finite double is
    /// a dyadic rational).
    fn from_f64(v: f64) -> Self;

    fn as_f64(&self) -> f64;

    fn from_rational(q: &BigRational) -> Self;

    fn to_rational(&self) -> BigRational;

    /// Strict sign tests; `Signed::is_positive` counts `+0.0` as positive.
    fn is_pos(&self) -> bool {
        *self > Self::zero()
    }

    fn is_neg(&self) -> bool {
        *self < Self::zero()
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        GEOM_TOLERANCE_F64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).expect("finite coordinate")
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        GEOM_TOLERANCE_F32
    }

    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn as_f64(&self) -> f64 {
        *self as f64
    }

    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q) as f32
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).expect("finite coordinate")
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite coordinate")
    }

    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

/// Correctly scaled conversion that survives numerators and denominators far
/// outside the `f64` range.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(q) {
        if v.is_finite() && (v != 0.0 || q.is_zero()) {
            return v;
        }
    }
    let n = q.numer();
    let d = q.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    // Shift both into ~60 significant bits before dividing.
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let nn: BigInt = n >> (shift_n as usize);
    let dd: BigInt = d >> (shift_d as usize);
    let ratio = ToPrimitive::to_f64(&nn).unwrap_or(0.0) / ToPrimitive::to_f64(&dd).unwrap_or(1.0);
    ratio * 2f64.powi((shift_n - shift_d) as i32)
}

/// Parses `"3"`, `"-0.125"`, `"1e-3"` or `"7/3"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((p, q)) = text.split_once('/') {
        let p = BigInt::from_str_radix(p.trim(), 10).ok()?;
        let q = BigInt::from_str_radix(q.trim(), 10).ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str_radix(if all.is_empty() { "0" } else { &all }, 10).ok()?;
    if neg {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let q = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(q)
}

/// Canonical text form: integers as-is, terminating decimals in plain
/// decimal notation, everything else as `p/q`.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        return q.numer().to_string();
    }
    let mut den = q.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let digits = twos.max(fives);
    let scaled = q * BigRational::from_integer(num_traits::pow(BigInt::from(10u32), digits));
    debug_assert!(scaled.is_integer());
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let mut s = n.abs().to_string();
    if s.len() <= digits {
        s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
    }
    let split = s.len() - digits;
    let out = format!("{}.{}", &s[..split], &s[split..]);
    if neg {
        format!("-{out}")
    } else {
        out
    }
}

/// Exact rational from a double for callers that hold `f64` data.
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite value")
}

pub fn rational_from_i64(v: i64) -> BigRational {
    BigRational::from_i64(v).expect("integer")
}
