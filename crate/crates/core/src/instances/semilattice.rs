use std::collections::BTreeSet;

use num_integer::Integer;
use serde_json::Value;

use super::cyclic::FullWindow;
use crate::algebra::{Divisibility, DualKind, Structure};
use crate::error::{Error, Result};

/// A finite meet-semilattice with a top element, as a commutative idempotent
/// monoid under `x + y = x ∧ y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeetSemilattice {
    table: Vec<Vec<usize>>,
    top: usize,
    labels: Vec<String>,
}

impl MeetSemilattice {
    /// Validates commutativity, associativity and idempotence of `table`;
    /// the identity is the unique element `t` with `t ∧ x = x` for all `x`.
    pub fn from_table(table: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = table.len();
        let bad = |m: String| Err(Error::InvalidInstance(m));
        if n == 0 || table.iter().any(|r| r.len() != n || r.iter().any(|v| *v >= n)) {
            return bad("meet table must be square with entries in range".into());
        }
        for x in 0..n {
            if table[x][x] != x {
                return bad(format!("meet is not idempotent at {x}"));
            }
            for y in 0..n {
                if table[x][y] != table[y][x] {
                    return bad(format!("meet is not commutative at ({x}, {y})"));
                }
                for z in 0..n {
                    if table[table[x][y]][z] != table[x][table[y][z]] {
                        return bad(format!("meet is not associative at ({x}, {y}, {z})"));
                    }
                }
            }
        }
        let Some(top) = (0..n).find(|&t| (0..n).all(|x| table[t][x] == x)) else {
            return bad("meet table has no top element".into());
        };
        let labels = match labels {
            Some(l) if l.len() != n => return bad("label count differs from table size".into()),
            Some(l) => l,
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        Ok(Self { table, top, labels })
    }

    /// Divisors of `n` under `gcd`, with `n` as the top element.
    pub fn divisors(n: u64) -> Result<Self> {
        if n == 0 || n > 10_000 {
            return Err(Error::InvalidInstance("divisor lattice needs 1 <= n <= 10000".into()));
        }
        let ds: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
        let idx = |v: u64| ds.iter().position(|d| *d == v).unwrap();
        let table = ds
            .iter()
            .map(|a| ds.iter().map(|b| idx(a.gcd(b))).collect())
            .collect();
        Self::from_table(table, Some(ds.iter().map(u64::to_string).collect()))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Closure of `s` under pairwise meets (without the top element unless present).
    pub fn meet_closure(&self, s: &[usize]) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = s.iter().copied().collect();
        loop {
            let next: BTreeSet<usize> = out
                .iter()
                .flat_map(|a| out.iter().map(move |b| self.table[*a][*b]))
                .collect();
            if next.is_subset(&out) {
                return out;
            }
            out.extend(next);
        }
    }
}

impl Structure for MeetSemilattice {
    type Elem = usize;
    type Window = FullWindow;

    fn name(&self) -> String {
        format!("meet-semilattice({})", self.table.len())
    }

    fn zero(&self) -> usize {
        self.top
    }

    fn add(&self, a: &usize, b: &usize) -> usize {
        self.table[*a][*b]
    }

    fn negate(&self, a: &usize) -> Option<usize> {
        (self.table.len() == 1).then_some(*a)
    }

    fn divide(&self, y: &usize, _n: u64) -> Vec<usize> {
        vec![*y]
    }

    fn enumerate(&self, _w: &FullWindow) -> Vec<usize> {
        (0..self.table.len()).collect()
    }

    fn window_contains(&self, _w: &FullWindow, x: &usize) -> bool {
        *x < self.table.len()
    }

    fn full_window(&self) -> Option<FullWindow> {
        Some(FullWindow)
    }

    fn declared_divisibility(&self, _n: u64) -> Divisibility {
        Divisibility::Divisible
    }

    fn dual_kind(&self) -> DualKind {
        DualKind::TriviallyZero
    }

    fn encode(&self, x: &usize) -> Value {
        Value::String(self.labels[*x].clone())
    }

    fn decode(&self, v: &Value) -> Result<usize> {
        let found = match v {
            Value::String(s) => self.index_of(s),
            Value::Number(n) => n.as_u64().map(|n| n.to_string()).and_then(|s| self.index_of(&s)),
            _ => None,
        };
        found.ok_or_else(|| Error::Parse(format!("unknown semilattice element {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisor_lattice_is_valid() {
        let l = MeetSemilattice::divisors(12).unwrap();
        assert_eq!(l.len(), 6);
        assert_eq!(l.label(l.top()), "12");
        let four = l.index_of("4").unwrap();
        let six = l.index_of("6").unwrap();
        assert_eq!(l.label(l.add(&four, &six)), "2");
    }

    #[test]
    fn division_is_idempotent() {
        let l = MeetSemilattice::divisors(30).unwrap();
        for y in 0..l.len() {
            for n in 1..6 {
                assert!(l.divide(&y, n).contains(&y));
            }
        }
    }

    #[test]
    fn rejects_non_associative_tables() {
        // commutative, idempotent, but 1∧(2∧0) != (1∧2)∧0
        let t = vec![vec![0, 0, 1], vec![0, 1, 2], vec![1, 2, 2]];
        assert!(MeetSemilattice::from_table(t, None).is_err());
    }
}
