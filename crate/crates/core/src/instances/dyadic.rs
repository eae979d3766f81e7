use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::lattice::BoxWindow;
use crate::algebra::{Divisibility, DualKind, Structure};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};

/// `num / 2^exp` in canonical form: `num` odd or `exp == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };

    pub fn new(num: i64, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        if num == 0 {
            d.exp = 0;
        }
        while d.exp > 0 && d.num % 2 == 0 {
            d.num /= 2;
            d.exp -= 1;
        }
        d
    }

    pub fn int(n: i64) -> Self {
        Self::new(n, 0)
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    /// Numerator over `2^e` for `e >= self.exp`.
    fn scaled(&self, e: u32) -> i128 {
        (self.num as i128) << (e - self.exp)
    }

    fn from_scaled(v: i128, e: u32) -> Self {
        let mut v = v;
        let mut e = e;
        while e > 0 && v % 2 == 0 {
            v /= 2;
            e -= 1;
        }
        let num = i64::try_from(v).expect("dyadic numerator overflow");
        Self::new(num, e)
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.num), BigInt::one() << self.exp as usize)
    }

    pub fn from_rational(q: &Rational) -> Option<Self> {
        let den = q.denom().magnitude();
        if den.count_ones() != 1 {
            return None;
        }
        let exp = den.trailing_zeros()? as u32;
        Some(Self::new(q.numer().to_i64()?, exp))
    }

    pub fn add(&self, other: &Self) -> Self {
        let e = self.exp.max(other.exp);
        Self::from_scaled(self.scaled(e) + other.scaled(e), e)
    }

    pub fn neg(&self) -> Self {
        Self { num: -self.num, exp: self.exp }
    }

    /// The unique `x` with `n x = self`, if it is dyadic.
    pub fn div(&self, n: u64) -> Option<Self> {
        assert!(n >= 1);
        if self.num == 0 {
            return Some(Self::ZERO);
        }
        let a = n.trailing_zeros();
        let q = (n >> a) as i64;
        (self.num % q == 0).then(|| Self::new(self.num / q, self.exp + a))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        self.scaled(e).cmp(&other.scaled(e))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1u64 << self.exp)
        }
    }
}

/// Grid `k / 2^exp` with `lo_i <= k_i <= hi_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicWindow {
    pub exp: u32,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl DyadicWindow {
    /// Points of `[-radius, radius]^dim` with denominator dividing `2^exp`.
    pub fn cube(dim: usize, exp: u32, radius: i64) -> Self {
        let r = radius << exp;
        Self { exp, lo: vec![-r; dim], hi: vec![r; dim] }
    }

    /// `[lo, hi]` in one dimension.
    pub fn interval(exp: u32, lo: i64, hi: i64) -> Self {
        Self { exp, lo: vec![lo << exp], hi: vec![hi << exp] }
    }

    fn grid(&self) -> BoxWindow {
        BoxWindow::new(self.lo.clone(), self.hi.clone())
    }
}

/// The product group `(Z[1/2])^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicRationals {
    dim: usize,
}

impl DyadicRationals {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInstance("dyadic dimension must be positive".into()));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Convenience constructor for an element from `(num, exp)` pairs.
    pub fn elem(&self, coords: &[(i64, u32)]) -> Vec<Dyadic> {
        coords.iter().map(|(n, e)| Dyadic::new(*n, *e)).collect()
    }

    pub fn ints(&self, coords: &[i64]) -> Vec<Dyadic> {
        coords.iter().map(|n| Dyadic::int(*n)).collect()
    }
}

impl Structure for DyadicRationals {
    type Elem = Vec<Dyadic>;
    type Window = DyadicWindow;

    fn name(&self) -> String {
        format!("Z[1/2]^{}", self.dim)
    }

    fn zero(&self) -> Vec<Dyadic> {
        vec![Dyadic::ZERO; self.dim]
    }

    fn add(&self, a: &Vec<Dyadic>, b: &Vec<Dyadic>) -> Vec<Dyadic> {
        a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
    }

    fn negate(&self, a: &Vec<Dyadic>) -> Option<Vec<Dyadic>> {
        Some(a.iter().map(Dyadic::neg).collect())
    }

    fn divide(&self, y: &Vec<Dyadic>, n: u64) -> Vec<Vec<Dyadic>> {
        y.iter()
            .map(|c| c.div(n))
            .collect::<Option<Vec<_>>>()
            .into_iter()
            .collect()
    }

    fn enumerate(&self, w: &DyadicWindow) -> Vec<Vec<Dyadic>> {
        assert_eq!(w.lo.len(), self.dim, "window dimension mismatch");
        w.grid()
            .points()
            .into_iter()
            .map(|p| p.into_iter().map(|k| Dyadic::new(k, w.exp)).collect())
            .collect()
    }

    fn window_contains(&self, w: &DyadicWindow, x: &Vec<Dyadic>) -> bool {
        x.len() == w.lo.len()
            && x.iter().zip(w.lo.iter().zip(&w.hi)).all(|(c, (lo, hi))| {
                c.exp <= w.exp && {
                    let k = c.scaled(w.exp);
                    *lo as i128 <= k && k <= *hi as i128
                }
            })
    }

    fn declared_divisibility(&self, n: u64) -> Divisibility {
        if n.is_power_of_two() {
            Divisibility::Divisible
        } else {
            Divisibility::NotDivisible
        }
    }

    fn dual_kind(&self) -> DualKind {
        DualKind::CoefficientVector(self.dim)
    }

    fn coordinates(&self, x: &Vec<Dyadic>) -> Option<Vec<Rational>> {
        Some(x.iter().map(Dyadic::to_rational).collect())
    }

    fn from_coordinates(&self, c: &[Rational]) -> Option<Vec<Dyadic>> {
        if c.len() != self.dim {
            return None;
        }
        c.iter().map(Dyadic::from_rational).collect()
    }

    fn encode(&self, x: &Vec<Dyadic>) -> Value {
        Value::Array(x.iter().map(|c| Value::String(c.to_string())).collect())
    }

    fn decode(&self, v: &Value) -> Result<Vec<Dyadic>> {
        let bad = || Error::Parse(format!("expected a dyadic vector of length {}, got {v}", self.dim));
        let coord = |c: &Value| -> Result<Dyadic> {
            let q = match c {
                Value::String(s) => parse_rational(s)?,
                Value::Number(n) => Rational::from_integer(BigInt::from(n.as_i64().ok_or_else(bad)?)),
                _ => return Err(bad()),
            };
            Dyadic::from_rational(&q).ok_or_else(|| Error::Parse(format!("{q} is not dyadic")))
        };
        let out = match v {
            Value::Array(xs) => xs.iter().map(coord).collect::<Result<Vec<_>>>()?,
            other => vec![coord(other)?],
        };
        if out.len() != self.dim {
            return Err(bad());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{nth_multiple, probe_divisibility, DivisibilityProbe};

    #[test]
    fn canonical_form() {
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(0, 5), Dyadic::ZERO);
        assert_eq!(Dyadic::new(3, 2).to_string(), "3/4");
    }

    #[test]
    fn division_by_two_always_succeeds() {
        let q = DyadicRationals::new(1).unwrap();
        for x in q.enumerate(&DyadicWindow::interval(2, -3, 3)) {
            let h = q.divide(&x, 2);
            assert_eq!(h.len(), 1);
            assert_eq!(nth_multiple(&q, &h[0], 2), x);
        }
    }

    #[test]
    fn division_by_three_needs_divisible_numerator() {
        let q = DyadicRationals::new(1).unwrap();
        assert!(q.divide(&q.ints(&[1]), 3).is_empty());
        assert_eq!(q.divide(&q.elem(&[(3, 1)]), 6), vec![q.elem(&[(1, 2)])]);
    }

    #[test]
    fn probe_taxonomy() {
        let q = DyadicRationals::new(1).unwrap();
        let w = DyadicWindow::interval(0, 0, 2);
        assert_eq!(probe_divisibility(&q, 2, &w), DivisibilityProbe::Divisible);
        assert_eq!(probe_divisibility(&q, 3, &w), DivisibilityProbe::NotDivisible(q.ints(&[1])));
    }

    #[test]
    fn window_membership_respects_denominator() {
        let q = DyadicRationals::new(1).unwrap();
        let w = DyadicWindow::interval(1, -1, 1);
        assert!(q.window_contains(&w, &q.elem(&[(1, 1)])));
        assert!(!q.window_contains(&w, &q.elem(&[(1, 2)])));
        assert!(!q.window_contains(&w, &q.ints(&[2])));
        assert_eq!(q.enumerate(&w).len(), 5);
    }
}
