//! Sandwich, Kaufman and Hahn–Banach witnesses, the interpolation refine
//! step and Stone partitions.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{AdditiveMap, AdditiveWitness, GeneralizedAffineWitness};
use crate::algebra::{enumerate_combinations, nth_multiple, semidivisibility_prime, Bounds, DualKind, Structure};
use crate::error::{Error, Result};
use crate::functions::{check_convex, check_n_sublinear, check_subadditive, FunctionTable, OutsidePolicy};
use crate::linear::fourier_motzkin::{project_onto, DerivedRow};
use crate::linear::matrix::{rank, solve};
use crate::linear::simplex::{feasible_point, maximize, LpOutcome};
use crate::scalar::{ExtendedScalar, Rational};

/// Coordinates used by additive witnesses; empty for trivial duals.
fn dual_coordinates<S: Structure + ?Sized>(s: &S, x: &S::Elem) -> Result<Vec<Rational>> {
    match s.dual_kind() {
        DualKind::CoefficientVector(_) => s.coordinates(x).ok_or(Error::UnsupportedDual),
        DualKind::TriviallyZero => Ok(Vec::new()),
        DualKind::Unsupported => Err(Error::UnsupportedDual),
    }
}

fn dual_dimension<S: Structure + ?Sized>(s: &S) -> Result<usize> {
    match s.dual_kind() {
        DualKind::CoefficientVector(d) => Ok(d),
        DualKind::TriviallyZero => Ok(0),
        DualKind::Unsupported => Err(Error::UnsupportedDual),
    }
}

/// A point of `A x <= b` minimising `Σ |x_i|` over the first `penalized`
/// coordinates, or Farkas multipliers for `A x <= b`.
fn solve_system(
    rows: &[Vec<Rational>],
    rhs: &[Rational],
    cols: usize,
    penalized: usize,
) -> std::result::Result<Vec<Rational>, Vec<Rational>> {
    if rows.is_empty() {
        return Ok(vec![Rational::zero(); cols]);
    }
    if cols == 0 {
        return match rhs.iter().position(Signed::is_negative) {
            None => Ok(Vec::new()),
            Some(i) => Err((0..rhs.len()).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()),
        };
    }
    feasible_point(rows, rhs)?;
    // variables (x, u) with -u <= x <= u on the penalized block
    let width = cols + penalized;
    let mut a: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| r.iter().cloned().chain(std::iter::repeat_n(Rational::zero(), penalized)).collect())
        .collect();
    let mut b = rhs.to_vec();
    for i in 0..penalized {
        for sign in [1, -1] {
            let mut row = vec![Rational::zero(); width];
            row[i] = Rational::from_integer(sign.into());
            row[cols + i] = -Rational::one();
            a.push(row);
            b.push(Rational::zero());
        }
    }
    let mut objective = vec![Rational::zero(); width];
    for o in &mut objective[cols..] {
        *o = -Rational::one();
    }
    match maximize(&a, &b, &objective) {
        LpOutcome::Optimal { x, .. } => Ok(x[..cols].to_vec()),
        other => unreachable!("feasible and bounded below by zero: {other:?}"),
    }
}

/// Why the affine sandwich is infeasible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SandwichCertificate<E> {
    /// Each row of the system `(a, c)` with the element it came from;
    /// `true` for `a(x) + c <= f(x)`, `false` for `-a(x) - c <= -g(Tx)`.
    pub rows: Vec<(E, bool)>,
    pub matrix: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
    /// `π >= 0`, `πᵀA = 0`, `π·b < 0`.
    pub farkas: Vec<Rational>,
    /// Tightest derived `c <= value` and `c >= value` after eliminating `a`,
    /// for systems small enough to project.
    pub c_upper: Option<(Rational, DerivedRow)>,
    pub c_lower: Option<(Rational, DerivedRow)>,
    /// A derived `0 <= negative` that does not involve `c`.
    pub contradiction: Option<DerivedRow>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SandwichOutcome<E> {
    Witness { linear: AdditiveWitness, offset: Rational },
    Infeasible(SandwichCertificate<E>),
    /// `f(x) = -inf` or `g(Tx) = +inf` rules out every finite affine map.
    InfiniteValue { x: E, upper: bool },
}

const PROJECTION_ROW_LIMIT: usize = 40;

/// An affine `a + c` with `g∘T <= a + c <= f` on the window of `f`.
///
/// Off the window of `g`, `g∘T` is taken as `-inf`.
pub fn sandwich_witness<A: Structure, B: Structure>(
    f: &FunctionTable<A>,
    g: &FunctionTable<B>,
    t: &AdditiveMap<A, B>,
) -> Result<SandwichOutcome<A::Elem>> {
    let sa = f.instance();
    let d = dual_dimension(sa)?;
    let mut labels = Vec::new();
    let mut matrix = Vec::new();
    let mut rhs = Vec::new();
    for (x, fx) in f.values() {
        let gtx = g.value(&t.apply(x)).cloned().unwrap_or(ExtendedScalar::MinusInfinity);
        if gtx > *fx {
            return Err(Error::PreconditionFailed(format!("g(Tx) > f(x) at {}", sa.encode(x))));
        }
        let coords = dual_coordinates(sa, x)?;
        match fx {
            ExtendedScalar::MinusInfinity => return Ok(SandwichOutcome::InfiniteValue { x: x.clone(), upper: true }),
            ExtendedScalar::Finite(q) => {
                labels.push((x.clone(), true));
                matrix.push(coords.iter().cloned().chain([Rational::one()]).collect());
                rhs.push(q.clone());
            }
            ExtendedScalar::PlusInfinity => {}
        }
        match gtx {
            ExtendedScalar::PlusInfinity => return Ok(SandwichOutcome::InfiniteValue { x: x.clone(), upper: false }),
            ExtendedScalar::Finite(q) => {
                labels.push((x.clone(), false));
                matrix.push(coords.iter().map(|v| -v).chain([-Rational::one()]).collect());
                rhs.push(-q);
            }
            ExtendedScalar::MinusInfinity => {}
        }
    }
    match solve_system(&matrix, &rhs, d + 1, d) {
        Ok(v) => Ok(SandwichOutcome::Witness { linear: AdditiveWitness::new(v[..d].to_vec()), offset: v[d].clone() }),
        Err(farkas) => {
            let (mut c_upper, mut c_lower, mut contradiction) = (None, None, None);
            if matrix.len() <= PROJECTION_ROW_LIMIT {
                let p = project_onto(&matrix, &rhs, d);
                c_upper = p.tightest_upper().cloned();
                c_lower = p.tightest_lower().cloned();
                contradiction = p.contradictions.first().cloned();
            }
            Ok(SandwichOutcome::Infeasible(SandwichCertificate {
                rows: labels,
                matrix,
                rhs,
                farkas,
                c_upper,
                c_lower,
                contradiction,
            }))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KaufmanOutcome {
    Witness(AdditiveWitness),
    /// Farkas multipliers over the window rows; this does not refute the
    /// theorem, which quantifies over the whole carrier.
    InfeasibleWithinWindow { farkas: Vec<Rational> },
}

/// An additive `a` with `g <= a <= f` on the window, for subadditive `f`
/// and superadditive `g`.
pub fn kaufman_witness<S: Structure>(f: &FunctionTable<S>, g: &FunctionTable<S>) -> Result<KaufmanOutcome> {
    if !f.shares_window(g) {
        return Err(Error::WindowMismatch);
    }
    if !check_subadditive(f).holds() || !check_subadditive(&g.negated()).holds() {
        return Err(Error::PreconditionFailed("f and -g must be subadditive".into()));
    }
    let s = f.instance();
    let d = dual_dimension(s)?;
    let mut matrix = Vec::new();
    let mut rhs = Vec::new();
    for (x, fx) in f.values() {
        let gx = g.eval(x)?;
        if gx > *fx {
            return Err(Error::PreconditionFailed(format!("g > f at {}", s.encode(x))));
        }
        let coords = dual_coordinates(s, x)?;
        if let ExtendedScalar::Finite(q) = fx {
            matrix.push(coords.clone());
            rhs.push(q.clone());
        }
        if let ExtendedScalar::Finite(q) = &gx {
            matrix.push(coords.iter().map(|v| -v).collect());
            rhs.push(-q);
        }
        if fx.is_minus_infinity() || gx.is_plus_infinity() {
            return Err(Error::PreconditionFailed(format!("infinite value at {}", s.encode(x))));
        }
    }
    Ok(match solve_system(&matrix, &rhs, d, d) {
        Ok(a) => KaufmanOutcome::Witness(AdditiveWitness::new(a)),
        Err(farkas) => KaufmanOutcome::InfeasibleWithinWindow { farkas },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionOutcome {
    Extension(AdditiveWitness),
    InfeasibleWithinWindow { farkas: Vec<Rational> },
}

/// Extends `h`, given on independent generators of a subgroup, to an
/// additive `a <= f` on the window.
pub fn hahn_banach_extend<S: Structure>(
    f: &FunctionTable<S>,
    generators: &[(S::Elem, Rational)],
    m_max: u64,
) -> Result<ExtensionOutcome> {
    let s = f.instance();
    let d = dual_dimension(s)?;
    if !check_n_sublinear(f, m_max).holds() {
        return Err(Error::PreconditionFailed("f is not N-sublinear on the window".into()));
    }
    let gens: Vec<Vec<Rational>> =
        generators.iter().map(|(g, _)| dual_coordinates(s, g)).collect::<Result<_>>()?;
    if d > 0 && rank(&gens) < gens.len() {
        return Err(Error::PreconditionFailed("subgroup generators must be independent".into()));
    }
    if d == 0 && generators.iter().any(|(_, v)| !v.is_zero()) {
        return Err(Error::PreconditionFailed("only the zero map is additive here".into()));
    }
    // columns are generators
    let columns: Vec<Vec<Rational>> = (0..d).map(|r| gens.iter().map(|g| g[r].clone()).collect()).collect();
    let mut matrix = Vec::new();
    let mut rhs = Vec::new();
    for ((_, v), row) in generators.iter().zip(&gens) {
        matrix.push(row.clone());
        rhs.push(v.clone());
        matrix.push(row.iter().map(|c| -c).collect());
        rhs.push(-v);
    }
    for (x, fx) in f.values() {
        let coords = dual_coordinates(s, x)?;
        if d > 0 && !gens.is_empty() {
            if let Some(lambda) = solve(&columns, &coords) {
                if lambda.iter().all(|l| l.is_integer()) {
                    let hx: Rational = lambda.iter().zip(generators).map(|(l, (_, v))| l * v).sum();
                    if ExtendedScalar::Finite(hx.clone()) > *fx {
                        return Err(Error::PreconditionFailed(format!("h = {hx} exceeds f at {}", s.encode(x))));
                    }
                }
            }
        }
        match fx {
            ExtendedScalar::Finite(q) => {
                matrix.push(coords);
                rhs.push(q.clone());
            }
            ExtendedScalar::MinusInfinity => {
                return Err(Error::PreconditionFailed(format!("f = -inf at {}", s.encode(x))));
            }
            ExtendedScalar::PlusInfinity => {}
        }
    }
    Ok(match solve_system(&matrix, &rhs, d, d) {
        Ok(a) => ExtensionOutcome::Extension(AdditiveWitness::new(a)),
        Err(farkas) => ExtensionOutcome::InfeasibleWithinWindow { farkas },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationSide {
    /// Raise the concave minorant `g` to pass above `r` at `x0`.
    Lower,
    /// Lower the convex majorant `f` to pass below `r` at `x0`.
    Upper,
}

/// One refinement of the pair `g <= f` at `x0` through the level `r`,
/// enumerating defining relations within `bounds`.
pub fn interpolation_refine_step<S: Structure>(
    f: &FunctionTable<S>,
    g: &FunctionTable<S>,
    x0: &S::Elem,
    r: &ExtendedScalar,
    side: InterpolationSide,
    bounds: Bounds,
) -> Result<FunctionTable<S>> {
    if !f.shares_window(g) {
        return Err(Error::WindowMismatch);
    }
    if f.values() == g.values() {
        return Ok(match side {
            InterpolationSide::Lower => g.clone(),
            InterpolationSide::Upper => f.clone(),
        });
    }
    let s = f.instance();
    let x0 = f.locate(x0).ok_or(Error::OutsideWindow)?;
    let ExtendedScalar::Finite(rq) = r else {
        return Err(Error::PreconditionFailed("r must be finite".into()));
    };
    if !(g.eval(&x0)? < *r && *r < f.eval(&x0)?) {
        return Err(Error::PreconditionFailed("need g(x0) < r < f(x0)".into()));
    }
    if semidivisibility_prime(s).is_none() {
        return Err(Error::PreconditionFailed("instance is not declared semidivisible".into()));
    }
    if !check_convex(f, bounds, None).holds() || !check_convex(&g.negated(), bounds, None).holds() {
        return Err(Error::PreconditionFailed("f and -g must be convex".into()));
    }
    if bounds.max_terms == 0 || bounds.max_coeff == 0 {
        return Err(Error::BoundsExhausted);
    }
    let cap = bounds.max_coeff;
    let r_ext = ExtendedScalar::Finite(rq.clone());
    let mut hits = 0usize;
    let refined = match side {
        InterpolationSide::Lower => {
            let support: Vec<S::Elem> = g.values().iter().filter(|(_, v)| !v.is_minus_infinity()).map(|(x, _)| x.clone()).collect();
            let mut h: BTreeMap<S::Elem, ExtendedScalar> =
                g.elements().map(|x| (x.clone(), ExtendedScalar::MinusInfinity)).collect();
            let mut visit = |k0: u64, terms: &[(u64, S::Elem)]| -> Result<()> {
                let mut sum = nth_multiple(s, &x0, k0);
                let mut value = r_ext.scale(k0);
                let mut k = k0;
                for (c, y) in terms {
                    sum = s.add(&sum, &nth_multiple(s, y, *c));
                    value = value.add_concave(&g.eval(y)?.scale(*c));
                    k += c;
                }
                let value = value.div_int(k);
                for x in s.divide(&sum, k) {
                    if let Some(slot) = f.locate(&x).and_then(|c| h.get_mut(&c)) {
                        hits += 1;
                        if value > *slot {
                            *slot = value.clone();
                        }
                    }
                }
                Ok(())
            };
            for k0 in 1..=cap {
                visit(k0, &[])?;
            }
            for comb in enumerate_combinations(&support, bounds.max_terms, cap) {
                for k0 in 0..=cap {
                    visit(k0, comb.terms())?;
                }
            }
            h
        }
        InterpolationSide::Upper => {
            let support = f.effective_domain();
            let mut h: BTreeMap<S::Elem, ExtendedScalar> =
                f.elements().map(|x| (x.clone(), ExtendedScalar::PlusInfinity)).collect();
            for k in 1..=cap {
                for k0 in 0..=k {
                    let rest = k - k0;
                    let tails: Vec<Option<&S::Elem>> =
                        if rest == 0 { vec![None] } else { support.iter().map(Some).collect() };
                    for y in tails {
                        let mut sum = nth_multiple(s, &x0, k0);
                        let mut value = r_ext.scale(k0);
                        if let Some(y) = y {
                            sum = s.add(&sum, &nth_multiple(s, y, rest));
                            value = value.add_convex(&f.eval(y)?.scale(rest));
                        }
                        let value = value.div_int(k);
                        for x in s.divide(&sum, k) {
                            if let Some(slot) = f.locate(&x).and_then(|c| h.get_mut(&c)) {
                                hits += 1;
                                if value < *slot {
                                    *slot = value.clone();
                                }
                            }
                        }
                    }
                }
            }
            h
        }
    };
    if hits == 0 {
        return Err(Error::BoundsExhausted);
    }
    let template = match side {
        InterpolationSide::Lower => g,
        InterpolationSide::Upper => f,
    };
    let h = FunctionTable::new(f.instance_arc().clone(), f.window().clone(), refined, template.outside_policy())?;
    for x in h.elements() {
        let v = h.eval(x)?;
        if v < g.eval(x)? || v > f.eval(x)? {
            return Err(Error::PreconditionFailed(format!(
                "refined function leaves [g, f] at {}; the other side applies",
                s.encode(x)
            )));
        }
    }
    let at_x0 = h.eval(&x0)?;
    let reaches = match side {
        InterpolationSide::Lower => at_x0 >= r_ext,
        InterpolationSide::Upper => at_x0 <= r_ext,
    };
    if !reaches {
        return Err(Error::BoundsExhausted);
    }
    Ok(h)
}

/// `C = {a < 0}` and `D = {a >= 0}` over the window, accepted when they
/// separate `A` from `B` in either order.
pub fn stone_partition<S: Structure>(
    s: &S,
    window: &S::Window,
    witness: &GeneralizedAffineWitness<S::Elem>,
    a_set: &[S::Elem],
    b_set: &[S::Elem],
) -> Result<(Vec<S::Elem>, Vec<S::Elem>)> {
    let mut c = Vec::new();
    let mut d = Vec::new();
    for x in s.enumerate(window) {
        if witness.eval(s, &x)? < ExtendedScalar::zero() {
            c.push(x);
        } else {
            d.push(x);
        }
    }
    let inside = |set: &[S::Elem], part: &[S::Elem]| set.iter().all(|x| part.iter().any(|y| s.same(x, y)));
    if (inside(a_set, &c) && inside(b_set, &d)) || (inside(a_set, &d) && inside(b_set, &c)) {
        Ok((c, d))
    } else {
        Err(Error::NotSeparating("the sign classes do not split A from B".into()))
    }
}

/// Separates disjoint `A` and `B` by sandwiching `0` on `B` below `-1` on
/// `A`, then splits the window by sign.
#[allow(clippy::type_complexity)]
pub fn separate_sets<S: Structure>(
    s: Arc<S>,
    window: S::Window,
    a_set: &[S::Elem],
    b_set: &[S::Elem],
) -> Result<(GeneralizedAffineWitness<S::Elem>, Vec<S::Elem>, Vec<S::Elem>)> {
    let member = |set: &[S::Elem], x: &S::Elem| set.iter().any(|y| s.same(x, y));
    if a_set.iter().any(|x| member(b_set, x)) {
        return Err(Error::NotSeparating("A and B intersect".into()));
    }
    let upper = FunctionTable::from_fn(s.clone(), window.clone(), OutsidePolicy::PlusInfinity, |x| {
        if member(a_set, x) { ExtendedScalar::int(-1) } else { ExtendedScalar::PlusInfinity }
    });
    let lower = FunctionTable::from_fn(s.clone(), window.clone(), OutsidePolicy::PlusInfinity, |x| {
        if member(b_set, x) { ExtendedScalar::zero() } else { ExtendedScalar::MinusInfinity }
    });
    match sandwich_witness(&upper, &lower, &AdditiveMap::identity())? {
        SandwichOutcome::Witness { linear, offset } => {
            let w = GeneralizedAffineWitness::affine(linear, offset);
            let (c, d) = stone_partition(s.as_ref(), &window, &w, a_set, b_set)?;
            Ok((w, c, d))
        }
        _ => Err(Error::NotSeparating("no affine map separates A from B on the window".into())),
    }
}
