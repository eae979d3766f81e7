//! Dense exact simplex with Bland's rule.
//!
//! The core routine solves `min c·y` subject to `M y = r`, `y >= 0` and
//! returns replayable certificates: optimal duals, a Farkas vector, or an
//! improving ray. Inequality-form problems are solved through their duals.

use num_traits::{One, Signed, Zero};

use super::matrix::dot;
use crate::scalar::Rational;

/// Result of [`solve_standard`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StandardOutcome {
    /// `y` optimal; `dual` satisfies `c - Mᵀ dual >= 0` and `r · dual = value`.
    Optimal { y: Vec<Rational>, dual: Vec<Rational>, value: Rational },
    /// `farkas · M <= 0` componentwise and `farkas · r > 0`.
    Infeasible { farkas: Vec<Rational> },
    /// `y` feasible, `ray >= 0`, `M ray = 0`, `c · ray < 0`.
    Unbounded { y: Vec<Rational>, ray: Vec<Rational> },
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    n: usize,
    m: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.n + self.m]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *v -= &f * p;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    fn reduced_cost(&self, cost: &[Rational], j: usize) -> Rational {
        let mut d = cost[j].clone();
        for (i, &b) in self.basis.iter().enumerate() {
            if !cost[b].is_zero() && !self.rows[i][j].is_zero() {
                d -= &cost[b] * &self.rows[i][j];
            }
        }
        d
    }

    /// Runs Bland's rule over columns `0..limit`. Returns the entering column
    /// that proved unboundedness, if any.
    fn optimize(&mut self, cost: &[Rational], limit: usize) -> Option<usize> {
        loop {
            let entering = (0..limit)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| self.reduced_cost(cost, j).is_negative());
            let Some(j) = entering else {
                return None;
            };
            let mut best: Option<(Rational, usize, usize)> = None;
            for i in 0..self.m {
                let a = &self.rows[i][j];
                if a.is_positive() {
                    let ratio = self.rhs(i) / a;
                    let better = match &best {
                        None => true,
                        Some((r, _, bi)) => ratio < *r || (ratio == *r && self.basis[i] < *bi),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, i, _)) => self.pivot(i, j),
                None => return Some(j),
            }
        }
    }

    fn primal(&self) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                y[b] = self.rhs(i).clone();
            }
        }
        y
    }

    /// `c_B B⁻¹`, read off the artificial columns.
    fn duals(&self, cost: &[Rational]) -> Vec<Rational> {
        (0..self.m)
            .map(|k| {
                self.basis
                    .iter()
                    .enumerate()
                    .fold(Rational::zero(), |acc, (i, &b)| acc + &cost[b] * &self.rows[i][self.n + k])
            })
            .collect()
    }
}

/// Solves `min c·y` s.t. `M y = r`, `y >= 0` exactly.
pub fn solve_standard(m_rows: &[Vec<Rational>], r: &[Rational], c: &[Rational]) -> StandardOutcome {
    let m = m_rows.len();
    let n = c.len();
    assert_eq!(r.len(), m, "right-hand side length");
    assert!(m_rows.iter().all(|row| row.len() == n), "matrix width");

    // flip rows so the right-hand side is nonnegative
    let signs: Vec<Rational> = r
        .iter()
        .map(|v| if v.is_negative() { -Rational::one() } else { Rational::one() })
        .collect();
    let rows: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row: Vec<Rational> = m_rows[i].iter().map(|v| v * &signs[i]).collect();
            row.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
            row.push(&r[i] * &signs[i]);
            row
        })
        .collect();
    let mut t = Tableau { rows, basis: (n..n + m).collect(), n, m };

    let mut phase1 = vec![Rational::zero(); n + m];
    for v in &mut phase1[n..] {
        *v = Rational::one();
    }
    t.optimize(&phase1, n + m);
    let infeas: Rational = (0..m).filter(|&i| t.basis[i] >= n).map(|i| t.rhs(i).clone()).sum();
    if infeas.is_positive() {
        let pi = t.duals(&phase1);
        return StandardOutcome::Infeasible {
            farkas: pi.iter().zip(&signs).map(|(p, s)| p * s).collect(),
        };
    }
    // drive zero-level artificials out where possible; rows that stay are redundant
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[i][j].is_zero() && !t.basis.contains(&j)) {
                t.pivot(i, j);
            }
        }
    }

    let mut phase2: Vec<Rational> = c.to_vec();
    phase2.extend((0..m).map(|_| Rational::zero()));
    if let Some(j) = t.optimize(&phase2, n) {
        let mut ray = vec![Rational::zero(); n];
        ray[j] = Rational::one();
        for (i, &b) in t.basis.iter().enumerate() {
            if b < n {
                ray[b] = -t.rows[i][j].clone();
            }
        }
        return StandardOutcome::Unbounded { y: t.primal(), ray };
    }
    let y = t.primal();
    let value = dot(c, &y);
    let pi = t.duals(&phase2);
    StandardOutcome::Optimal {
        y,
        dual: pi.iter().zip(&signs).map(|(p, s)| p * s).collect(),
        value,
    }
}

/// Result of [`maximize`] for `max c·x` s.t. `A x <= b`, `x` free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    /// `multipliers >= 0` with `multipliersᵀ A = c` and `multipliers · b = value`.
    Optimal { x: Vec<Rational>, multipliers: Vec<Rational>, value: Rational },
    /// `multipliers >= 0`, `multipliersᵀ A = 0`, `multipliers · b < 0`.
    Infeasible { multipliers: Vec<Rational> },
    /// `x` feasible, `A direction <= 0`, `c · direction > 0`.
    Unbounded { x: Vec<Rational>, direction: Vec<Rational> },
}

fn transpose(a: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    (0..cols).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

/// `max c·x` subject to `A x <= b` with free `x`, solved through the dual
/// `min b·π` s.t. `Aᵀ π = c`, `π >= 0`.
pub fn maximize(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpOutcome {
    let at = transpose(a, c.len());
    match solve_standard(&at, c, b) {
        StandardOutcome::Optimal { y, dual, value } => LpOutcome::Optimal { x: dual, multipliers: y, value },
        StandardOutcome::Unbounded { ray, .. } => LpOutcome::Infeasible { multipliers: scrub_ray(a, b, ray) },
        StandardOutcome::Infeasible { farkas } => match feasible_point(a, b) {
            Ok(x) => LpOutcome::Unbounded { x, direction: farkas },
            Err(multipliers) => LpOutcome::Infeasible { multipliers },
        },
    }
}

/// `min c·x` subject to `A x <= b`; `value` is the minimum.
pub fn minimize(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpOutcome {
    let neg: Vec<Rational> = c.iter().map(|v| -v).collect();
    match maximize(a, b, &neg) {
        LpOutcome::Optimal { x, multipliers, value } => LpOutcome::Optimal { x, multipliers, value: -value },
        LpOutcome::Unbounded { x, direction } => LpOutcome::Unbounded { x, direction },
        other => other,
    }
}

/// A point with `A x <= b`, or Farkas multipliers proving there is none.
pub fn feasible_point(a: &[Vec<Rational>], b: &[Rational]) -> Result<Vec<Rational>, Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let at = transpose(a, cols);
    let zero = vec![Rational::zero(); cols];
    match solve_standard(&at, &zero, b) {
        StandardOutcome::Optimal { dual, .. } => Ok(dual),
        StandardOutcome::Unbounded { ray, .. } => Err(scrub_ray(a, b, ray)),
        StandardOutcome::Infeasible { .. } => unreachable!("the zero vector is dual feasible"),
    }
}

fn scrub_ray(a: &[Vec<Rational>], b: &[Rational], ray: Vec<Rational>) -> Vec<Rational> {
    debug_assert!(verify_infeasibility(a, b, &ray));
    ray
}

/// Checks a Farkas certificate for `A x <= b`: `π >= 0`, `πᵀA = 0`, `π·b < 0`.
pub fn verify_infeasibility(a: &[Vec<Rational>], b: &[Rational], pi: &[Rational]) -> bool {
    let cols = a.first().map_or(0, Vec::len);
    pi.len() == a.len()
        && pi.iter().all(|p| !p.is_negative())
        && (0..cols).all(|j| a.iter().zip(pi).fold(Rational::zero(), |acc, (row, p)| acc + &row[j] * p).is_zero())
        && dot(pi, b).is_negative()
}

/// Checks `A x <= b`.
pub fn satisfies(a: &[Vec<Rational>], b: &[Rational], x: &[Rational]) -> bool {
    a.iter().zip(b).all(|(row, bi)| dot(row, x) <= *bi)
}
