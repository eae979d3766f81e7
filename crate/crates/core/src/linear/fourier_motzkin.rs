//! Fourier–Motzkin elimination that tracks how each derived inequality is
//! built from the input rows.

use num_traits::{Signed, Zero};

use crate::scalar::Rational;

/// `coeffs · x <= rhs`, equal to `Σ multipliers_i * row_i` of the input system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedRow {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
    pub multipliers: Vec<Rational>,
}

impl DerivedRow {
    /// Recomputes the row from the input system and the multipliers.
    pub fn replays(&self, a: &[Vec<Rational>], b: &[Rational]) -> bool {
        let cols = self.coeffs.len();
        let mut coeffs = vec![Rational::zero(); cols];
        let mut rhs = Rational::zero();
        for ((row, bi), m) in a.iter().zip(b).zip(&self.multipliers) {
            if m.is_negative() {
                return false;
            }
            for (c, v) in coeffs.iter_mut().zip(row) {
                *c += m * v;
            }
            rhs += m * bi;
        }
        coeffs == self.coeffs && rhs == self.rhs
    }
}

/// The input system as derived rows with unit multipliers.
pub fn initial_rows(a: &[Vec<Rational>], b: &[Rational]) -> Vec<DerivedRow> {
    let k = a.len();
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, bi))| DerivedRow {
            coeffs: row.clone(),
            rhs: bi.clone(),
            multipliers: (0..k)
                .map(|j| if i == j { Rational::from_integer(1.into()) } else { Rational::zero() })
                .collect(),
        })
        .collect()
}

/// Eliminates variable `var`: rows with zero coefficient are kept, and every
/// positive/negative pair is combined with positive weights.
pub fn eliminate(rows: &[DerivedRow], var: usize) -> Vec<DerivedRow> {
    let mut out: Vec<DerivedRow> = rows.iter().filter(|r| r.coeffs[var].is_zero()).cloned().collect();
    let pos: Vec<&DerivedRow> = rows.iter().filter(|r| r.coeffs[var].is_positive()).collect();
    let neg: Vec<&DerivedRow> = rows.iter().filter(|r| r.coeffs[var].is_negative()).collect();
    for p in &pos {
        for n in &neg {
            let wp = -n.coeffs[var].clone();
            let wn = p.coeffs[var].clone();
            let combine = |x: &Vec<Rational>, y: &Vec<Rational>| -> Vec<Rational> {
                x.iter().zip(y).map(|(a, b)| &wp * a + &wn * b).collect()
            };
            let mut coeffs = combine(&p.coeffs, &n.coeffs);
            coeffs[var] = Rational::zero();
            let row = DerivedRow {
                coeffs,
                rhs: &wp * &p.rhs + &wn * &n.rhs,
                multipliers: combine(&p.multipliers, &n.multipliers),
            };
            if !out.contains(&row) {
                out.push(row);
            }
        }
    }
    out
}

/// Upper and lower bounds on variable `keep` implied by the system after
/// eliminating every other variable; each bound carries its derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    /// `x_keep <= value`.
    pub upper: Vec<(Rational, DerivedRow)>,
    /// `x_keep >= value`.
    pub lower: Vec<(Rational, DerivedRow)>,
    /// Rows with every coefficient zero and negative right-hand side.
    pub contradictions: Vec<DerivedRow>,
}

impl Projection {
    pub fn tightest_upper(&self) -> Option<&(Rational, DerivedRow)> {
        self.upper.iter().min_by(|a, b| a.0.cmp(&b.0))
    }

    pub fn tightest_lower(&self) -> Option<&(Rational, DerivedRow)> {
        self.lower.iter().max_by(|a, b| a.0.cmp(&b.0))
    }
}

pub fn project_onto(a: &[Vec<Rational>], b: &[Rational], keep: usize) -> Projection {
    let cols = a.first().map_or(0, Vec::len);
    let mut rows = initial_rows(a, b);
    for var in (0..cols).filter(|v| *v != keep) {
        rows = eliminate(&rows, var);
    }
    let mut p = Projection { upper: Vec::new(), lower: Vec::new(), contradictions: Vec::new() };
    for r in rows {
        let c = r.coeffs[keep].clone();
        if c.is_positive() {
            p.upper.push((&r.rhs / &c, r));
        } else if c.is_negative() {
            p.lower.push((&r.rhs / &c, r));
        } else if r.rhs.is_negative() {
            p.contradictions.push(r);
        }
    }
    p
}
