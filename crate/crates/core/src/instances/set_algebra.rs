use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{Divisibility, DualKind, Structure};
use crate::error::{Error, Result};

pub const MAX_GROUND_SET: u32 = 24;

/// Subsets of `mask` (the full carrier when `mask` covers the ground set).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetWindow {
    pub mask: u32,
}

/// The power set of `{0, .., s-1}` under symmetric difference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SetAlgebraGroup {
    size: u32,
}

impl SetAlgebraGroup {
    pub fn new(size: u32) -> Result<Self> {
        if size > MAX_GROUND_SET {
            return Err(Error::InvalidInstance(format!(
                "ground set of size {size} exceeds {MAX_GROUND_SET}"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    fn all(&self) -> u32 {
        if self.size == 0 {
            0
        } else {
            u32::MAX >> (32 - self.size)
        }
    }

    pub fn set(&self, members: &[u32]) -> u32 {
        members.iter().fold(0, |acc, i| {
            assert!(*i < self.size, "member {i} outside ground set");
            acc | (1 << i)
        })
    }
}

impl Structure for SetAlgebraGroup {
    type Elem = u32;
    type Window = SubsetWindow;

    fn name(&self) -> String {
        format!("P({})", self.size)
    }

    fn zero(&self) -> u32 {
        0
    }

    fn add(&self, a: &u32, b: &u32) -> u32 {
        a ^ b
    }

    fn negate(&self, a: &u32) -> Option<u32> {
        Some(*a)
    }

    fn divide(&self, y: &u32, n: u64) -> Vec<u32> {
        if n % 2 == 1 {
            vec![*y]
        } else if *y == 0 {
            (0..=self.all()).collect()
        } else {
            Vec::new()
        }
    }

    fn enumerate(&self, w: &SubsetWindow) -> Vec<u32> {
        let mask = w.mask & self.all();
        let mut out = Vec::with_capacity(1 << mask.count_ones());
        let mut sub = 0u32;
        loop {
            out.push(sub);
            if sub == mask {
                break;
            }
            sub = (sub.wrapping_sub(mask)) & mask;
        }
        out
    }

    fn window_contains(&self, w: &SubsetWindow, x: &u32) -> bool {
        x & !(w.mask & self.all()) == 0
    }

    fn exponent(&self) -> Option<u64> {
        Some(if self.size == 0 { 1 } else { 2 })
    }

    fn full_window(&self) -> Option<SubsetWindow> {
        Some(SubsetWindow { mask: self.all() })
    }

    fn declared_divisibility(&self, n: u64) -> Divisibility {
        if n % 2 == 1 || self.size == 0 {
            Divisibility::Divisible
        } else {
            Divisibility::NotDivisible
        }
    }

    fn dual_kind(&self) -> DualKind {
        DualKind::TriviallyZero
    }

    fn encode(&self, x: &u32) -> Value {
        Value::from((0..self.size).filter(|i| x & (1 << i) != 0).collect::<Vec<_>>())
    }

    fn decode(&self, v: &Value) -> Result<u32> {
        let bad = || Error::Parse(format!("expected a list of members below {}, got {v}", self.size));
        let xs = v.as_array().ok_or_else(bad)?;
        xs.iter().try_fold(0u32, |acc, i| {
            let i = i.as_u64().filter(|i| *i < self.size as u64).ok_or_else(bad)?;
            Ok(acc | (1 << i))
        })
    }
}
