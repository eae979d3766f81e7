use serde::{Deserialize, Serialize};
use serde_json::Value;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use std::collections::BTreeSet;

use crate::algebra::{any_subset, Bounds, Divisibility, DualKind, Structure};
use crate::error::{Error, Result};
use crate::hull::{rational_hull_membership, RationalHullMembership};
use crate::linear::matrix::dot as dot_q;
use crate::scalar::{rat, Rational};

/// A coordinate box `lo <= x <= hi` in `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxWindow {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl BoxWindow {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box corners differ in dimension");
        Self { lo, hi }
    }

    /// `[-r, r]^d`.
    pub fn cube(dim: usize, r: i64) -> Self {
        Self::new(vec![-r; dim], vec![r; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| l <= v && v <= h)
    }

    /// Lattice points in lexicographic order.
    pub fn points(&self) -> Vec<Vec<i64>> {
        let d = self.dim();
        if self.lo.iter().zip(&self.hi).any(|(l, h)| l > h) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut cur = self.lo.clone();
        loop {
            out.push(cur.clone());
            let mut i = d;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < self.hi[i] {
                    cur[i] += 1;
                    cur[i + 1..].copy_from_slice(&self.lo[i + 1..]);
                    break;
                }
            }
        }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self::new(
            self.lo.iter().zip(&other.lo).map(|(a, b)| *a.max(b)).collect(),
            self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect(),
        )
    }

    /// Smallest box containing `pts` (which must be nonempty).
    pub fn bounding(pts: &[Vec<i64>]) -> Self {
        let d = pts[0].len();
        let mut lo = pts[0].clone();
        let mut hi = pts[0].clone();
        for p in pts {
            for i in 0..d {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        Self::new(lo, hi)
    }
}

/// The integer lattice `Z^d` under coordinate-wise addition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeZd {
    dim: usize,
}

impl LatticeZd {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInstance("lattice dimension must be positive".into()));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

pub(crate) fn decode_int_vector(v: &Value, dim: usize) -> Result<Vec<i64>> {
    let bad = || Error::Parse(format!("expected an integer vector of length {dim}, got {v}"));
    let out: Vec<i64> = match v {
        Value::Number(n) => vec![n.as_i64().ok_or_else(bad)?],
        Value::Array(xs) => xs
            .iter()
            .map(|x| x.as_i64().ok_or_else(bad))
            .collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    if out.len() != dim {
        return Err(bad());
    }
    Ok(out)
}

impl Structure for LatticeZd {
    type Elem = Vec<i64>;
    type Window = BoxWindow;

    fn name(&self) -> String {
        format!("Z^{}", self.dim)
    }

    fn zero(&self) -> Vec<i64> {
        vec![0; self.dim]
    }

    fn add(&self, a: &Vec<i64>, b: &Vec<i64>) -> Vec<i64> {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.checked_add(*y).expect("lattice coordinate overflow"))
            .collect()
    }

    fn negate(&self, a: &Vec<i64>) -> Option<Vec<i64>> {
        Some(a.iter().map(|x| -x).collect())
    }

    fn divide(&self, y: &Vec<i64>, n: u64) -> Vec<Vec<i64>> {
        assert!(n >= 1);
        let n = n as i64;
        if y.iter().all(|c| c % n == 0) {
            vec![y.iter().map(|c| c / n).collect()]
        } else {
            Vec::new()
        }
    }

    fn enumerate(&self, w: &BoxWindow) -> Vec<Vec<i64>> {
        assert_eq!(w.dim(), self.dim, "window dimension mismatch");
        w.points()
    }

    fn window_contains(&self, w: &BoxWindow, x: &Vec<i64>) -> bool {
        w.contains(x)
    }

    fn declared_divisibility(&self, n: u64) -> Divisibility {
        if n == 1 {
            Divisibility::Divisible
        } else {
            Divisibility::NotDivisible
        }
    }

    fn dual_kind(&self) -> DualKind {
        DualKind::CoefficientVector(self.dim)
    }

    fn coordinates(&self, x: &Vec<i64>) -> Option<Vec<Rational>> {
        Some(x.iter().map(|c| rat(*c)).collect())
    }

    fn from_coordinates(&self, c: &[Rational]) -> Option<Vec<i64>> {
        if c.len() != self.dim || !c.iter().all(|q| q.is_integer()) {
            return None;
        }
        c.iter().map(|q| i64::try_from(q.to_integer()).ok()).collect()
    }

    fn lattice_coordinates(&self, x: &Vec<i64>) -> Option<Vec<i64>> {
        Some(x.clone())
    }

    fn from_lattice_coordinates(&self, v: &[i64]) -> Option<Vec<i64>> {
        (v.len() == self.dim).then(|| v.to_vec())
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

    fn decode(&self, v: &Value) -> Result<Vec<i64>> {
        decode_int_vector(v, self.dim)
    }
}

/// Closure under bounded combinations, driven per candidate point.
///
/// Every residual lies in the real hull of `a`, so candidates are the window
/// points of its bounding box. A candidate is rejected up front only with a
/// verified separating functional; otherwise it enters once a term set of the
/// current closure combines to it. Each round only tries term sets that use a
/// point added in the previous round.
pub(crate) fn lattice_bounded_closure(a: &[Vec<i64>], bounds: Bounds, w: &BoxWindow) -> BTreeSet<Vec<i64>> {
    let mut set: BTreeSet<Vec<i64>> = a.iter().cloned().collect();
    if a.is_empty() || bounds.max_coeff == 0 {
        return set;
    }
    let mut elems: Vec<Vec<i64>> = set.iter().cloned().collect();
    let rational: Vec<Vec<Rational>> = a.iter().map(|p| p.iter().map(|v| rat(*v)).collect()).collect();
    let mut pending: Vec<Vec<i64>> = BoxWindow::bounding(a)
        .intersect(w)
        .points()
        .into_iter()
        .filter(|x| !set.contains(x) && !separated(x, a, &rational))
        .collect();
    let mut frontier = 0;
    loop {
        let mut found = Vec::new();
        pending.retain(|x| {
            let hit = (2..=bounds.max_terms.min(elems.len())).any(|size| {
                any_subset(elems.len(), size, frontier, &mut |idx| {
                    let cols: Vec<Vec<i64>> = idx
                        .iter()
                        .map(|i| elems[*i].iter().zip(x).map(|(t, c)| t - c).collect())
                        .collect();
                    has_bounded_positive_kernel(&cols, bounds.max_coeff as i64)
                })
            });
            if hit {
                found.push(x.clone());
            }
            !hit
        });
        if found.is_empty() {
            return set;
        }
        frontier = elems.len();
        set.extend(found.iter().cloned());
        elems.extend(found);
    }
}

/// Is `x` provably outside the real hull of `pts`? Tries coordinate and
/// diagonal directions first, then an exact separating functional; either
/// way the functional is checked before it is trusted.
fn separated(x: &[i64], pts: &[Vec<i64>], rational: &[Vec<Rational>]) -> bool {
    let d = x.len();
    let dot = |u: &[i64], p: &[i64]| -> i64 { u.iter().zip(p).map(|(a, b)| a * b).sum() };
    if d <= 3 {
        let dirs = (0..3i64.pow(d as u32)).map(|mut k| {
            (0..d)
                .map(|_| {
                    let v = k % 3 - 1;
                    k /= 3;
                    v
                })
                .collect::<Vec<i64>>()
        });
        for u in dirs {
            if pts.iter().all(|p| dot(&u, p) < dot(&u, x)) {
                return true;
            }
        }
    }
    let xr: Vec<Rational> = x.iter().map(|v| rat(*v)).collect();
    match rational_hull_membership(&xr, rational) {
        Ok(RationalHullMembership::Outside { a, b }) => {
            dot_q(&a, &xr) > b && rational.iter().all(|p| dot_q(&a, p) <= b)
        }
        _ => false,
    }
}

/// Residuals of bounded combinations over integer points, computed per
/// candidate point by solving `Σ m_i (t_i - x) = 0` for `m_i` in `[1, M]`.
pub(crate) fn lattice_bounded_residuals(
    terms: &[Vec<i64>],
    max_coeff: u64,
    w: &BoxWindow,
) -> Vec<Vec<i64>> {
    if terms.is_empty() || max_coeff == 0 {
        return Vec::new();
    }
    let candidates = BoxWindow::bounding(terms).intersect(w);
    candidates
        .points()
        .into_iter()
        .filter(|x| {
            let cols: Vec<Vec<i64>> = terms
                .iter()
                .map(|t| t.iter().zip(x).map(|(a, b)| a - b).collect())
                .collect();
            has_bounded_positive_kernel(&cols, max_coeff as i64)
        })
        .collect()
}

type Q128 = Ratio<i128>;

/// Is there `m` in `[1, bound]^k` with `Σ m_i cols[i] = 0`?
pub(crate) fn has_bounded_positive_kernel(cols: &[Vec<i64>], bound: i64) -> bool {
    let k = cols.len();
    let d = cols[0].len();
    // rows = coordinates, columns = terms
    let mut a: Vec<Vec<Q128>> = (0..d)
        .map(|r| cols.iter().map(|c| Q128::from_integer(c[r] as i128)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..k {
        let Some(p) = (row..d).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for v in a[row].iter_mut() {
            *v *= inv;
        }
        for r in 0..d {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col];
                for c in 0..k {
                    let sub = f * a[row][c];
                    a[r][c] -= sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == d {
            break;
        }
    }
    let nullity = k - pivots.len();
    match nullity {
        0 => false,
        1 => {
            let free = (0..k).find(|c| !pivots.contains(c)).unwrap();
            let mut v = vec![Q128::zero(); k];
            v[free] = Q128::from_integer(1);
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][free];
            }
            let den = v.iter().fold(1i128, |acc, q| acc.lcm(q.denom()));
            let mut ints: Vec<i128> = v.iter().map(|q| (q * den).to_integer()).collect();
            let g = ints.iter().fold(0i128, |acc, x| acc.gcd(x));
            for x in &mut ints {
                *x /= g;
            }
            if ints.iter().all(|x| x.is_negative()) {
                for x in &mut ints {
                    *x = -*x;
                }
            }
            ints.iter().all(|&x| x > 0 && x <= bound as i128)
        }
        _ => search_bounded_kernel(cols, bound),
    }
}

/// Exhaustive search over the first `k - 1` coefficients, solving for the last.
fn search_bounded_kernel(cols: &[Vec<i64>], bound: i64) -> bool {
    let k = cols.len();
    let d = cols[0].len();
    let last = &cols[k - 1];
    let pivot = last.iter().position(|v| *v != 0);
    let mut coeffs = vec![1i64; k - 1];
    loop {
        let mut s = vec![0i64; d];
        for (m, c) in coeffs.iter().zip(cols) {
            for j in 0..d {
                s[j] += m * c[j];
            }
        }
        let ok = match pivot {
            None => s.iter().all(|v| *v == 0),
            Some(j) => {
                let num = -s[j];
                num % last[j] == 0 && {
                    let mk = num / last[j];
                    (1..=bound).contains(&mk) && (0..d).all(|i| s[i] + mk * last[i] == 0)
                }
            }
        };
        if ok {
            return true;
        }
        let mut i = k - 1;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if coeffs[i] < bound {
                coeffs[i] += 1;
                for c in &mut coeffs[i + 1..] {
                    *c = 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{brute_force_residuals, nth_multiple};

    #[test]
    fn nth_multiple_by_doubling() {
        let z2 = LatticeZd::new(2).unwrap();
        assert_eq!(nth_multiple(&z2, &vec![2, 3], 3), vec![6, 9]);
        assert_eq!(nth_multiple(&z2, &vec![2, 3], 0), vec![0, 0]);
    }

    #[test]
    fn divide_requires_divisible_coordinates() {
        let z2 = LatticeZd::new(2).unwrap();
        assert_eq!(z2.divide(&vec![4, 6], 2), vec![vec![2, 3]]);
        assert!(z2.divide(&vec![4, 5], 2).is_empty());
    }

    #[test]
    fn box_points_are_lexicographic() {
        let w = BoxWindow::new(vec![0, 0], vec![1, 2]);
        assert_eq!(
            w.points(),
            vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]
        );
    }

    #[test]
    fn fast_residuals_match_brute_force() {
        let z2 = LatticeZd::new(2).unwrap();
        let w = BoxWindow::cube(2, 6);
        let cases: Vec<Vec<Vec<i64>>> = vec![
            vec![vec![0, 0], vec![4, 2]],
            vec![vec![0, 0], vec![3, 0], vec![0, 3]],
            vec![vec![0, 0], vec![2, 2], vec![4, 4]],
            vec![vec![1, 1]],
            vec![vec![-2, 1], vec![2, -1], vec![0, 0]],
        ];
        for terms in cases {
            for m in 1..=4 {
                let fast = lattice_bounded_residuals(&terms, m, &w);
                let slow = brute_force_residuals(&z2, &terms, m, &w);
                assert_eq!(fast, slow, "terms {terms:?} bound {m}");
            }
        }
    }
}
