//! Exact rationals extended by `+inf` and `-inf`.
//!
//! Addition follows the convex convention `inf - inf = +inf` and `0 * inf = +inf`.
//! [`ExtendedScalar::add_concave`] is the mirrored convention used when a
//! function is handled through its negation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Builds an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Builds `num / den`. Panics when `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// Serde adapter for [`Rational`] as a `"p/q"` string.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>` as an array of `"p/q"` strings.
pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// A value in `[-inf, +inf]` with an exact rational finite part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtendedScalar {
    MinusInfinity,
    Finite(Rational),
    PlusInfinity,
}

use ExtendedScalar::{Finite, MinusInfinity, PlusInfinity};

impl ExtendedScalar {
    pub fn zero() -> Self {
        Finite(Rational::zero())
    }

    pub fn int(n: i64) -> Self {
        Finite(rat(n))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Finite(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn is_plus_infinity(&self) -> bool {
        matches!(self, PlusInfinity)
    }

    pub fn is_minus_infinity(&self) -> bool {
        matches!(self, MinusInfinity)
    }

    /// Sum under the convex convention: `+inf` absorbs `-inf`.
    pub fn add_convex(&self, other: &Self) -> Self {
        match (self, other) {
            (PlusInfinity, _) | (_, PlusInfinity) => PlusInfinity,
            (MinusInfinity, _) | (_, MinusInfinity) => MinusInfinity,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }

    /// Sum under the concave convention: `-inf` absorbs `+inf`.
    pub fn add_concave(&self, other: &Self) -> Self {
        match (self, other) {
            (MinusInfinity, _) | (_, MinusInfinity) => MinusInfinity,
            (PlusInfinity, _) | (_, PlusInfinity) => PlusInfinity,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }

    /// `n * self` for a nonnegative integer; `0 * inf = +inf`.
    pub fn scale(&self, n: u64) -> Self {
        match self {
            Finite(q) => Finite(q * rat(n as i64)),
            MinusInfinity if n == 0 => PlusInfinity,
            other => other.clone(),
        }
    }

    /// Multiplication by a positive rational.
    pub fn scale_rational(&self, r: &Rational) -> Self {
        debug_assert!(r.is_positive());
        match self {
            Finite(q) => Finite(q * r),
            other => other.clone(),
        }
    }

    /// Division by a positive integer.
    pub fn div_int(&self, n: u64) -> Self {
        assert!(n > 0, "division by zero");
        match self {
            Finite(q) => Finite(q / rat(n as i64)),
            other => other.clone(),
        }
    }

    pub fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    pub fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    /// Sum of `(coefficient, value)` pairs under the convex convention.
    pub fn weighted_sum_convex<'a>(terms: impl IntoIterator<Item = (u64, &'a Self)>) -> Self {
        terms
            .into_iter()
            .fold(Self::zero(), |acc, (m, v)| acc.add_convex(&v.scale(m)))
    }
}

impl Ord for ExtendedScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (MinusInfinity, MinusInfinity) | (PlusInfinity, PlusInfinity) => Ordering::Equal,
            (MinusInfinity, _) | (_, PlusInfinity) => Ordering::Less,
            (PlusInfinity, _) | (_, MinusInfinity) => Ordering::Greater,
        }
    }
}

impl PartialOrd for ExtendedScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Neg for ExtendedScalar {
    type Output = Self;
    fn neg(self) -> Self {
        match self {
            Finite(q) => Finite(-q),
            PlusInfinity => MinusInfinity,
            MinusInfinity => PlusInfinity,
        }
    }
}

impl Neg for &ExtendedScalar {
    type Output = ExtendedScalar;
    fn neg(self) -> ExtendedScalar {
        -self.clone()
    }
}

impl Add for ExtendedScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_convex(&rhs)
    }
}

impl Add for &ExtendedScalar {
    type Output = ExtendedScalar;
    fn add(self, rhs: Self) -> ExtendedScalar {
        self.add_convex(rhs)
    }
}

/// `a - b` with the convex convention, i.e. `a + (-b)` where `inf - inf = +inf`.
impl Sub for &ExtendedScalar {
    type Output = ExtendedScalar;
    fn sub(self, rhs: Self) -> ExtendedScalar {
        self.add_convex(&-rhs)
    }
}

impl Sub for ExtendedScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl From<Rational> for ExtendedScalar {
    fn from(q: Rational) -> Self {
        Finite(q)
    }
}

impl From<i64> for ExtendedScalar {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl fmt::Display for ExtendedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(q) => write!(f, "{}", format_rational(q)),
            PlusInfinity => f.write_str("+inf"),
            MinusInfinity => f.write_str("-inf"),
        }
    }
}

impl FromStr for ExtendedScalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "+inf" | "inf" => Ok(PlusInfinity),
            "-inf" => Ok(MinusInfinity),
            other => parse_rational(other).map(Finite),
        }
    }
}

impl Serialize for ExtendedScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtendedScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Least common multiple of the denominators of `qs` (1 for an empty slice).
pub fn common_denominator<'a>(qs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    use num_integer::Integer;
    qs.into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}
