use num_integer::Integer;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{Divisibility, DualKind, Structure};
use crate::error::{Error, Result};

/// Window covering the entire carrier of a finite instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullWindow;

const MAX_CARRIER: u64 = 1 << 20;

/// A finite abelian group `Z/n_1 x ... x Z/n_r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCyclic {
    moduli: Vec<u64>,
}

impl FiniteCyclic {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        if moduli.is_empty() || moduli.contains(&0) {
            return Err(Error::InvalidInstance("moduli must be a nonempty list of positive integers".into()));
        }
        let size = moduli.iter().try_fold(1u64, |acc, m| acc.checked_mul(*m));
        if size.is_none_or(|s| s > MAX_CARRIER) {
            return Err(Error::InvalidInstance(format!("carrier larger than {MAX_CARRIER} elements")));
        }
        Ok(Self { moduli })
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> u64 {
        self.moduli.iter().product()
    }
}

impl Structure for FiniteCyclic {
    type Elem = Vec<u64>;
    type Window = FullWindow;

    fn name(&self) -> String {
        self.moduli.iter().map(|m| format!("Z/{m}")).collect::<Vec<_>>().join(" x ")
    }

    fn zero(&self) -> Vec<u64> {
        vec![0; self.moduli.len()]
    }

    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(&self.moduli)
            .map(|((x, y), m)| (x + y) % m)
            .collect()
    }

    fn negate(&self, a: &Vec<u64>) -> Option<Vec<u64>> {
        Some(a.iter().zip(&self.moduli).map(|(x, m)| (m - x) % m).collect())
    }

    fn divide(&self, y: &Vec<u64>, n: u64) -> Vec<Vec<u64>> {
        // solutions per coordinate, then their product
        let per: Vec<Vec<u64>> = y
            .iter()
            .zip(&self.moduli)
            .map(|(c, m)| (0..*m).filter(|x| (n % m) * x % m == *c).collect())
            .collect();
        let mut out = vec![Vec::new()];
        for sols in per {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<u64>| {
                    sols.iter().map(move |s| {
                        let mut v = prefix.clone();
                        v.push(*s);
                        v
                    })
                })
                .collect();
        }
        out
    }

    fn enumerate(&self, _w: &FullWindow) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new()];
        for m in &self.moduli {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<u64>| {
                    (0..*m).map(move |s| {
                        let mut v = prefix.clone();
                        v.push(s);
                        v
                    })
                })
                .collect();
        }
        out
    }

    fn window_contains(&self, _w: &FullWindow, x: &Vec<u64>) -> bool {
        x.len() == self.moduli.len() && x.iter().zip(&self.moduli).all(|(c, m)| c < m)
    }

    fn exponent(&self) -> Option<u64> {
        Some(self.moduli.iter().fold(1, |acc, m| acc.lcm(m)))
    }

    fn full_window(&self) -> Option<FullWindow> {
        Some(FullWindow)
    }

    fn declared_divisibility(&self, n: u64) -> Divisibility {
        let e = self.exponent().unwrap();
        if n.gcd(&e) == 1 {
            Divisibility::Divisible
        } else {
            Divisibility::NotDivisible
        }
    }

    fn dual_kind(&self) -> DualKind {
        DualKind::TriviallyZero
    }

    fn encode(&self, x: &Vec<u64>) -> Value {
        if x.len() == 1 {
            Value::from(x[0])
        } else {
            Value::from(x.clone())
        }
    }

    fn decode(&self, v: &Value) -> Result<Vec<u64>> {
        let bad = || Error::Parse(format!("expected a residue vector for {}, got {v}", self.name()));
        let x: Vec<u64> = match v {
            Value::Number(n) => vec![n.as_u64().ok_or_else(bad)?],
            Value::Array(xs) => xs.iter().map(|c| c.as_u64().ok_or_else(bad)).collect::<Result<_>>()?,
            _ => return Err(bad()),
        };
        if !self.window_contains(&FullWindow, &x) {
            return Err(bad());
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{combine_residual, nth_multiple, NCombination};

    #[test]
    fn exponent_of_products() {
        assert_eq!(FiniteCyclic::cyclic(6).unwrap().exponent(), Some(6));
        assert_eq!(FiniteCyclic::new(vec![4, 6]).unwrap().exponent(), Some(12));
    }

    #[test]
    fn zero_multiple_is_identity() {
        let g = FiniteCyclic::cyclic(6).unwrap();
        assert_eq!(nth_multiple(&g, &vec![4], 0), vec![0]);
    }

    #[test]
    fn torsion_gives_several_residuals() {
        let g = FiniteCyclic::cyclic(4).unwrap();
        let c = NCombination::new(vec![(1, vec![0]), (1, vec![2])]).unwrap();
        assert_eq!(combine_residual(&g, &c), vec![vec![1], vec![3]]);
    }

    #[test]
    fn coprime_division_is_unique() {
        let g = FiniteCyclic::cyclic(7).unwrap();
        for y in 0..7 {
            assert_eq!(g.divide(&vec![y], 3).len(), 1);
        }
        assert_eq!(g.declared_divisibility(3), Divisibility::Divisible);
        assert_eq!(g.declared_divisibility(14), Divisibility::NotDivisible);
    }

    #[test]
    fn rejects_empty_moduli() {
        assert!(FiniteCyclic::new(vec![]).is_err());
        assert!(FiniteCyclic::new(vec![0]).is_err());
    }
}
