//! Exact rationals and big-floats behind one value type.
//!
//! Arithmetic between two exact values stays exact. Anything that touches a
//! float becomes a float at the larger of the operand precisions.

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::{Float, Integer, Rational};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const DEFAULT_PRECISION: u32 = 256;

thread_local! {
    static PARSE_PRECISION: Cell<u32> = const { Cell::new(DEFAULT_PRECISION) };
}

/// Runs `f` with decimal strings parsed (through `FromStr` and serde) at
/// `prec` bits instead of the default.
pub fn with_parse_precision<R>(prec: u32, f: impl FnOnce() -> R) -> R {
    let old = PARSE_PRECISION.with(|p| p.replace(prec));
    let out = f();
    PARSE_PRECISION.with(|p| p.set(old));
    out
}

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Rational),
    Float(Float),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse scalar {0:?}")]
pub struct ParseScalarError(pub String);

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Rational::new())
    }

    pub fn one() -> Self {
        Scalar::Exact(Rational::from(1))
    }

    pub fn int(v: i64) -> Self {
        Scalar::Exact(Rational::from(v))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(Rational::from((num, den)))
    }

    pub fn float(v: Float) -> Self {
        Scalar::Float(v)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Float precision in bits, `None` for exact values.
    pub fn precision(&self) -> Option<u32> {
        match self {
            Scalar::Exact(_) => None,
            Scalar::Float(f) => Some(f.prec()),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_float(&self, prec: u32) -> Float {
        match self {
            Scalar::Exact(r) => Float::with_val(prec, r),
            Scalar::Float(f) => Float::with_val(prec, f),
        }
    }

    /// Converts to a float of the given precision; exact values are rounded.
    pub fn into_float(self, prec: u32) -> Scalar {
        Scalar::Float(self.to_float(prec))
    }

    /// The exact value of a float (floats are dyadic rationals). `None` for NaN/inf.
    pub fn to_rational_exact(&self) -> Option<Rational> {
        match self {
            Scalar::Exact(r) => Some(r.clone()),
            Scalar::Float(f) => f.to_rational(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64(),
            Scalar::Float(f) => f.to_f64(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.cmp0() == Ordering::Equal,
            Scalar::Float(f) => f.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(r) => *r == 1,
            Scalar::Float(f) => *f == 1,
        }
    }

    /// -1, 0 or 1. NaN counts as 0.
    pub fn signum(&self) -> i32 {
        let ord = match self {
            Scalar::Exact(r) => Some(r.cmp0()),
            Scalar::Float(f) => f.cmp0(),
        };
        match ord {
            Some(Ordering::Less) => -1,
            Some(Ordering::Greater) => 1,
            _ => 0,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(Rational::from(r.abs_ref())),
            Scalar::Float(f) => Scalar::Float(Float::with_val(f.prec(), f.abs_ref())),
        }
    }

    pub fn recip(&self) -> Scalar {
        Scalar::one() / self
    }

    pub fn powi(&self, e: i32) -> Scalar {
        match self {
            Scalar::Exact(r) => {
                let p = Rational::from(rug::ops::Pow::pow(r, e.unsigned_abs()));
                if e < 0 {
                    Scalar::Exact(p.recip())
                } else {
                    Scalar::Exact(p)
                }
            }
            Scalar::Float(f) => Scalar::Float(Float::with_val(f.prec(), rug::ops::Pow::pow(f, e))),
        }
    }

    /// Natural logarithm as a float; only meaningful for positive values.
    pub fn ln(&self, prec: u32) -> Float {
        self.to_float(prec).ln()
    }

    /// True when `|self| <= tol`. Exact values compare exactly against zero
    /// whatever the tolerance.
    pub fn is_negligible(&self, tol: &Float) -> bool {
        match self {
            Scalar::Exact(r) => r.cmp0() == Ordering::Equal,
            Scalar::Float(f) => f.is_zero() || Float::with_val(f.prec(), f.abs_ref()) <= *tol,
        }
    }

    /// Parses `p`, `p/q` as exact and decimal or scientific notation as a float
    /// at `prec` bits.
    pub fn parse_with_precision(src: &str, prec: u32) -> Result<Scalar, ParseScalarError> {
        let s = src.trim();
        let looks_rational = !s.is_empty()
            && s.chars().enumerate().all(|(i, c)| c.is_ascii_digit() || c == '/' || (i == 0 && (c == '-' || c == '+')));
        if looks_rational {
            let body = s.strip_prefix('+').unwrap_or(s);
            return Rational::parse(body)
                .map(|r| Scalar::Exact(Rational::from(r)))
                .map_err(|_| ParseScalarError(src.to_string()));
        }
        Float::parse(s).map(|f| Scalar::Float(Float::with_val(prec, f))).map_err(|_| ParseScalarError(src.to_string()))
    }

    fn float_prec_pair(a: &Scalar, b: &Scalar) -> u32 {
        match (a.precision(), b.precision()) {
            (Some(p), Some(q)) => p.max(q),
            (Some(p), None) | (None, Some(p)) => p,
            (None, None) => DEFAULT_PRECISION,
        }
    }

    /// Rounds a float to `prec` bits; exact values are unchanged.
    pub fn with_precision(self, prec: u32) -> Scalar {
        match self {
            Scalar::Float(f) => Scalar::Float(Float::with_val(prec, f)),
            e => e,
        }
    }

    pub fn max_precision<'a, I: IntoIterator<Item = &'a Scalar>>(values: I) -> Option<u32> {
        values.into_iter().filter_map(|s| s.precision()).max()
    }
}

/// Bit length of the larger of numerator and denominator; a rough size measure.
pub fn rational_bits(r: &Rational) -> u32 {
    r.numer().significant_bits().max(r.denom().significant_bits())
}

pub fn integer_bits(i: &Integer) -> u32 {
    i.significant_bits()
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(Rational::from(a $op b)),
                    (Scalar::Float(a), Scalar::Float(b)) => {
                        let p = a.prec().max(b.prec());
                        Scalar::Float(Float::with_val(p, a $op b))
                    }
                    (Scalar::Float(a), Scalar::Exact(b)) => Scalar::Float(Float::with_val(a.prec(), a $op b)),
                    (Scalar::Exact(a), Scalar::Float(b)) => {
                        let p = Scalar::float_prec_pair(self, rhs);
                        let a = Float::with_val(p, a);
                        Scalar::Float(Float::with_val(p, &a $op b))
                    }
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -(self.clone())
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Some(a.cmp(b)),
            (Scalar::Float(a), Scalar::Float(b)) => a.partial_cmp(b),
            (Scalar::Float(a), Scalar::Exact(b)) => a.partial_cmp(b),
            (Scalar::Exact(a), Scalar::Float(b)) => b.partial_cmp(a).map(Ordering::reverse),
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::int(v)
    }
}

impl From<Rational> for Scalar {
    fn from(v: Rational) -> Self {
        Scalar::Exact(v)
    }
}

impl From<Float> for Scalar {
    fn from(v: Float) -> Self {
        Scalar::Float(v)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if *r.denom() == 1 {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Float(x) => write!(f, "{}", x.to_string_radix(10, None)),
        }
    }
}

impl std::str::FromStr for Scalar {
    type Err = ParseScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scalar::parse_with_precision(s, PARSE_PRECISION.with(Cell::get))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

struct ScalarVisitor;

impl<'de> Visitor<'de> for ScalarVisitor {
    type Value = Scalar;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a rational string \"p/q\", a decimal string, or an integer")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
        Ok(Scalar::int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
        Ok(Scalar::Exact(Rational::from(v)))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
        Ok(Scalar::Float(Float::with_val(PARSE_PRECISION.with(Cell::get), v)))
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Scalar, D::Error> {
        deserializer.deserialize_any(ScalarVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_precision_is_scoped() {
        let x: Scalar = with_parse_precision(512, || "0.1".parse().unwrap());
        assert_eq!(x.precision(), Some(512));
        let y: Scalar = "0.1".parse().unwrap();
        assert_eq!(y.precision(), Some(DEFAULT_PRECISION));
        let z: Scalar = with_parse_precision(64, || serde_json::from_str("\"3/7\"").unwrap());
        assert!(z.is_exact());
    }

    #[test]
    fn exact_stays_exact() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::ratio(1, 6);
        let s = &a + &b;
        assert!(s.is_exact());
        assert_eq!(s, Scalar::ratio(1, 2));
        assert_eq!(s.to_string(), "1/2");
    }

    #[test]
    fn mixing_promotes_to_float() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::Float(Float::with_val(128, 1));
        let s = &a * &b;
        assert_eq!(s.precision(), Some(128));
        let c = Scalar::Float(Float::with_val(300, 2));
        assert_eq!((&b + &c).precision(), Some(300));
    }

    #[test]
    fn lowest_terms() {
        let r = Scalar::ratio(6, -4);
        assert_eq!(r.to_string(), "-3/2");
    }

    #[test]
    fn parse_round_trip() {
        for s in ["3", "-7/9", "0"] {
            let v: Scalar = s.parse().unwrap();
            assert!(v.is_exact());
            assert_eq!(v.to_string(), s);
        }
        let f: Scalar = "0.125".parse().unwrap();
        assert_eq!(f.precision(), Some(DEFAULT_PRECISION));
        assert_eq!(f, Scalar::ratio(1, 8));
        assert!("1/0x".parse::<Scalar>().is_err());
    }

    #[test]
    fn json_uses_strings() {
        let v = Scalar::ratio(-2, 5);
        let j = serde_json::to_string(&v).unwrap();
        assert_eq!(j, "\"-2/5\"");
        let back: Scalar = serde_json::from_str(&j).unwrap();
        assert_eq!(back, v);
        let n: Scalar = serde_json::from_str("4").unwrap();
        assert_eq!(n, Scalar::int(4));
    }

    #[test]
    fn powers() {
        assert_eq!(Scalar::ratio(2, 3).powi(-2), Scalar::ratio(9, 4));
        assert_eq!(Scalar::int(5).powi(0), Scalar::one());
    }
}
