use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{Divisibility, DualKind, Structure};
use crate::error::{Error, Result};
use crate::scalar::parse_rational;

/// `num / den` in `[0, 1)`, reduced, with zero as `0/1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mod1 {
    num: u64,
    den: u64,
}

impl Mod1 {
    pub fn new(num: i64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let n = num.rem_euclid(den as i64) as u64;
        let g = n.gcd(&den);
        Self { num: n / g, den: den / g }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// Least `k >= 1` with `k x = 0`.
    pub fn order(&self) -> u64 {
        self.den
    }
}

impl Ord for Mod1 {
    fn cmp(&self, other: &Self) -> Ordering {
        ((self.num as u128) * other.den as u128)
            .cmp(&((other.num as u128) * self.den as u128))
    }
}

impl PartialOrd for Mod1 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Mod1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            f.write_str("0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Elements with denominator at most `max_den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mod1Window {
    pub max_den: u64,
}

/// The rational points of the circle group, `Q / Z`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RationalsMod1;

impl Structure for RationalsMod1 {
    type Elem = Mod1;
    type Window = Mod1Window;

    fn name(&self) -> String {
        "Q/Z".into()
    }

    fn zero(&self) -> Mod1 {
        Mod1::new(0, 1)
    }

    fn add(&self, a: &Mod1, b: &Mod1) -> Mod1 {
        let den = a.den.lcm(&b.den);
        let num = a.num * (den / a.den) + b.num * (den / b.den);
        Mod1::new((num % den) as i64, den)
    }

    fn negate(&self, a: &Mod1) -> Option<Mod1> {
        Some(Mod1::new(-(a.num as i64), a.den))
    }

    fn divide(&self, y: &Mod1, n: u64) -> Vec<Mod1> {
        assert!(n >= 1);
        let den = y.den * n;
        let mut out: Vec<Mod1> = (0..n)
            .map(|k| Mod1::new((y.num + k * y.den) as i64, den))
            .collect();
        out.sort();
        out
    }

    fn enumerate(&self, w: &Mod1Window) -> Vec<Mod1> {
        let mut out: Vec<Mod1> = (1..=w.max_den)
            .flat_map(|q| (0..q).filter(move |p| p.gcd(&q) == 1 || (*p == 0 && q == 1)).map(move |p| Mod1::new(p as i64, q)))
            .collect();
        out.sort();
        out
    }

    fn window_contains(&self, w: &Mod1Window, x: &Mod1) -> bool {
        x.den <= w.max_den
    }

    fn declared_divisibility(&self, _n: u64) -> Divisibility {
        Divisibility::Divisible
    }

    fn dual_kind(&self) -> DualKind {
        DualKind::TriviallyZero
    }

    fn encode(&self, x: &Mod1) -> Value {
        Value::String(x.to_string())
    }

    fn decode(&self, v: &Value) -> Result<Mod1> {
        let q = match v {
            Value::String(s) => parse_rational(s)?,
            Value::Number(n) => parse_rational(&n.to_string())?,
            _ => return Err(Error::Parse(format!("expected \"p/q\", got {v}"))),
        };
        let num = i64::try_from(q.numer()).map_err(|_| Error::Parse("numerator too large".into()))?;
        let den = u64::try_from(q.denom()).map_err(|_| Error::Parse("denominator too large".into()))?;
        Ok(Mod1::new(num, den))
    }
}
