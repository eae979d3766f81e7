use num_traits::Zero;
use serde_json::Value;

use std::collections::BTreeSet;

use super::lattice::{decode_int_vector, lattice_bounded_closure, lattice_bounded_residuals, BoxWindow, LatticeZd};
use crate::algebra::{Bounds, Divisibility, DualKind, Structure};
use crate::error::{Error, Result};
use crate::linear::matrix::{rank, solve};
use crate::scalar::{rat, Rational};

/// A lattice `Γ = Z v_1 + ... + Z v_k` in `Q^d` with independent generators.
///
/// Elements are integer coefficient vectors; [`GeneralLattice::transform`]
/// maps them to points of `Γ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralLattice {
    generators: Vec<Vec<Rational>>,
    inner: LatticeZd,
}

impl GeneralLattice {
    pub fn new(generators: Vec<Vec<Rational>>) -> Result<Self> {
        let k = generators.len();
        let d = generators.first().map_or(0, Vec::len);
        if k == 0 || d == 0 || generators.iter().any(|g| g.len() != d) {
            return Err(Error::InvalidInstance("generators must be nonempty vectors of equal length".into()));
        }
        if rank(&generators) < k {
            return Err(Error::DependentGenerators);
        }
        Ok(Self { generators, inner: LatticeZd::new(k)? })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.generators[0].len()
    }

    pub fn generators(&self) -> &[Vec<Rational>] {
        &self.generators
    }

    /// `T(α) = Σ α_i v_i`.
    pub fn transform(&self, a: &[i64]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.ambient_dim()];
        for (alpha, v) in a.iter().zip(&self.generators) {
            for (o, c) in out.iter_mut().zip(v) {
                *o += c * rat(*alpha);
            }
        }
        out
    }

    /// `T⁻¹(p)`, failing with [`Error::NotInLattice`] off the lattice.
    pub fn inverse(&self, p: &[Rational]) -> Result<Vec<i64>> {
        if p.len() != self.ambient_dim() {
            return Err(Error::NotInLattice);
        }
        // rows are ambient coordinates, columns are generators
        let a: Vec<Vec<Rational>> = (0..self.ambient_dim())
            .map(|r| self.generators.iter().map(|g| g[r].clone()).collect())
            .collect();
        let y = solve(&a, p).ok_or(Error::NotInLattice)?;
        y.iter()
            .map(|q| {
                if q.is_integer() {
                    i64::try_from(q.to_integer()).map_err(|_| Error::NotInLattice)
                } else {
                    Err(Error::NotInLattice)
                }
            })
            .collect()
    }
}

impl Structure for GeneralLattice {
    type Elem = Vec<i64>;
    type Window = BoxWindow;

    fn name(&self) -> String {
        format!("lattice of rank {} in Q^{}", self.rank(), self.ambient_dim())
    }

    fn zero(&self) -> Vec<i64> {
        self.inner.zero()
    }

    fn add(&self, a: &Vec<i64>, b: &Vec<i64>) -> Vec<i64> {
        self.inner.add(a, b)
    }

    fn negate(&self, a: &Vec<i64>) -> Option<Vec<i64>> {
        self.inner.negate(a)
    }

    fn divide(&self, y: &Vec<i64>, n: u64) -> Vec<Vec<i64>> {
        self.inner.divide(y, n)
    }

    fn enumerate(&self, w: &BoxWindow) -> Vec<Vec<i64>> {
        self.inner.enumerate(w)
    }

    fn window_contains(&self, w: &BoxWindow, x: &Vec<i64>) -> bool {
        self.inner.window_contains(w, x)
    }

    fn declared_divisibility(&self, n: u64) -> Divisibility {
        self.inner.declared_divisibility(n)
    }

    fn dual_kind(&self) -> DualKind {
        DualKind::CoefficientVector(self.rank())
    }

    fn coordinates(&self, x: &Vec<i64>) -> Option<Vec<Rational>> {
        self.inner.coordinates(x)
    }

    fn from_coordinates(&self, c: &[Rational]) -> Option<Vec<i64>> {
        self.inner.from_coordinates(c)
    }

    fn lattice_coordinates(&self, x: &Vec<i64>) -> Option<Vec<i64>> {
        Some(x.clone())
    }

    fn from_lattice_coordinates(&self, v: &[i64]) -> Option<Vec<i64>> {
        (v.len() == self.rank()).then(|| v.to_vec())
    }

    fn bounded_residuals(&self, terms: &[Vec<i64>], max_coeff: u64, w: &BoxWindow) -> Vec<Vec<i64>> {
        lattice_bounded_residuals(terms, max_coeff, w)
    }

    fn bounded_closure(&self, a: &[Vec<i64>], bounds: Bounds, w: &BoxWindow) -> Option<BTreeSet<Vec<i64>>> {
        Some(lattice_bounded_closure(a, bounds, w))
    }

    fn encode(&self, x: &Vec<i64>) -> Value {
        Value::from(x.clone())
    }

    /// Accepts a coefficient vector or `{"point": ["p/q", ...]}` in ambient coordinates.
    fn decode(&self, v: &Value) -> Result<Vec<i64>> {
        if let Some(p) = v.get("point") {
            let pt: Vec<Rational> = serde_json::from_value::<Vec<String>>(p.clone())
                .map_err(|e| Error::Parse(e.to_string()))?
                .iter()
                .map(|s| crate::scalar::parse_rational(s))
                .collect::<Result<_>>()?;
            return self.inverse(&pt);
        }
        decode_int_vector(v, self.rank())
    }
}
