//! The local boundedness bound, the three-slope lemma and monotone composition.

use std::collections::BTreeSet;

use num_traits::Signed;

use super::{check_convex, check_n_sublinear, ClassVerdict, FunctionTable, OutsidePolicy};
use crate::algebra::{nth_multiple, Bounds, Structure};
use crate::error::{Error, Result};
use crate::scalar::{rat, ExtendedScalar, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalBoundVerdict<E> {
    /// `|f(x0 + y) - f(x0)| <= M / m` for every checked `y`.
    Holds { bound: Rational, checked: usize },
    Fails { y: E, deviation: ExtendedScalar, bound: Rational },
}

fn abs(v: &ExtendedScalar) -> ExtendedScalar {
    match v {
        ExtendedScalar::Finite(q) => ExtendedScalar::Finite(q.abs()),
        _ => ExtendedScalar::PlusInfinity,
    }
}

/// Given symmetric `B` with `f <= f(x0) + M` on `x0 + B`, checks
/// `|f(x0 + y) - f(x0)| <= M / m` for every window `y` with `m y ∈ B`.
pub fn local_boundedness_bound<S: Structure>(
    f: &FunctionTable<S>,
    x0: &S::Elem,
    b: &[S::Elem],
    big_m: &Rational,
    m: u64,
) -> Result<LocalBoundVerdict<S::Elem>> {
    let s = f.instance();
    if m == 0 {
        return Err(Error::PreconditionFailed("m must be positive".into()));
    }
    let set: BTreeSet<&S::Elem> = b.iter().collect();
    for u in b {
        let neg = s
            .negate(u)
            .ok_or_else(|| Error::PreconditionFailed("symmetric sets need a group".into()))?;
        if !set.contains(&neg) {
            return Err(Error::PreconditionFailed(format!("B is not symmetric: {} has no negative", s.encode(u))));
        }
    }
    let f0 = f.eval(x0)?;
    let Some(f0q) = f0.finite().cloned() else {
        return Err(Error::PreconditionFailed("f(x0) is not finite".into()));
    };
    let cap = ExtendedScalar::Finite(&f0q + big_m);
    for u in b {
        if f.eval(&s.add(x0, u))? > cap {
            return Err(Error::PreconditionFailed(format!(
                "f(x0 + {}) exceeds f(x0) + M",
                s.encode(u)
            )));
        }
    }
    let bound = big_m / rat(m as i64);
    let mut checked = 0;
    for y in f.elements() {
        if !set.contains(&nth_multiple(s, y, m)) {
            continue;
        }
        checked += 1;
        let dev = abs(&(&f.eval(&s.add(x0, y))? - &f0));
        if dev > ExtendedScalar::Finite(bound.clone()) {
            return Ok(LocalBoundVerdict::Fails { y: y.clone(), deviation: dev, bound });
        }
    }
    Ok(LocalBoundVerdict::Holds { bound, checked })
}

/// The three quantities of the three-slope lemma.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeSlopeReport {
    /// `(f(x) - f(x1)) / m2`.
    pub left: ExtendedScalar,
    /// `(f(x2) - f(x1)) / (m1 + m2)`.
    pub middle: ExtendedScalar,
    /// `(f(x2) - f(x1)) / m1`.
    pub right: ExtendedScalar,
    /// `(f(x2) - f(x)) / m1`, the third slope of the classical lemma.
    pub right_classical: ExtendedScalar,
    pub left_holds: bool,
    pub right_holds: bool,
    /// `middle <= right_classical`.
    pub classical_holds: bool,
}

impl ThreeSlopeReport {
    /// Both inequalities as stated with `f(x1)` in the last numerator. The
    /// second one needs `f(x2) >= f(x1)` and can fail for convex `f`.
    pub fn holds(&self) -> bool {
        self.left_holds && self.right_holds
    }

    /// `left <= middle <= right_classical`, which convexity guarantees.
    pub fn holds_classical(&self) -> bool {
        self.left_holds && self.classical_holds
    }
}

/// Checks both inequalities for `(m1 + m2) x = m1 x1 + m2 x2`.
pub fn three_slope_check<S: Structure>(
    f: &FunctionTable<S>,
    x: &S::Elem,
    x1: &S::Elem,
    x2: &S::Elem,
    m1: u64,
    m2: u64,
) -> Result<ThreeSlopeReport> {
    let s = f.instance();
    if m1 == 0 || m2 == 0 {
        return Err(Error::RelationDoesNotHold("coefficients must be positive".into()));
    }
    let lhs = nth_multiple(s, x, m1 + m2);
    let rhs = s.add(&nth_multiple(s, x1, m1), &nth_multiple(s, x2, m2));
    if !s.same(&lhs, &rhs) {
        return Err(Error::RelationDoesNotHold(format!(
            "{}·{} != {}·{} + {}·{}",
            m1 + m2,
            s.encode(x),
            m1,
            s.encode(x1),
            m2,
            s.encode(x2)
        )));
    }
    let (fx, f1, f2) = (f.eval(x)?, f.eval(x1)?, f.eval(x2)?);
    let rise = &f2 - &f1;
    let left = (&fx - &f1).div_int(m2);
    let middle = rise.div_int(m1 + m2);
    let right = rise.div_int(m1);
    let right_classical = (&f2 - &fx).div_int(m1);
    Ok(ThreeSlopeReport {
        left_holds: left <= middle,
        right_holds: middle <= right,
        classical_holds: middle <= right_classical,
        left,
        middle,
        right,
        right_classical,
    })
}

/// Outcome of [`monotone_composition_check`].
#[derive(Clone, Debug)]
pub struct CompositionReport<S: Structure> {
    pub composed: FunctionTable<S>,
    pub verdict: ClassVerdict<S::Elem>,
    /// Whether the inner function is non-decreasing along a one-dimensional
    /// coordinate; `None` when the instance has no such coordinate. The
    /// convexity argument does not use it, so it is reported, not enforced.
    pub inner_non_decreasing: Option<bool>,
}

fn one_coordinate<S: Structure>(s: &S, x: &S::Elem) -> Option<Rational> {
    s.coordinates(x).filter(|c| c.len() == 1).map(|mut c| c.remove(0))
}

fn non_decreasing<S: Structure>(f: &FunctionTable<S>) -> Option<bool> {
    let s = f.instance();
    let mut pts: Vec<(Rational, &ExtendedScalar)> =
        f.values().iter().map(|(x, v)| one_coordinate(s, x).map(|t| (t, v))).collect::<Option<_>>()?;
    pts.sort_by(|a, b| a.0.cmp(&b.0));
    Some(pts.windows(2).all(|w| w[0].1 <= w[1].1))
}

/// Verifies that `outer` is `N`-sublinear and non-decreasing on its window and
/// `inner` is convex with finite values, then checks convexity of `outer ∘ inner`.
pub fn monotone_composition_check<O: Structure, I: Structure>(
    outer: &FunctionTable<O>,
    inner: &FunctionTable<I>,
    bounds: Bounds,
    m_max: u64,
) -> Result<CompositionReport<I>> {
    let os = outer.instance();
    match non_decreasing(outer) {
        None => return Err(Error::PreconditionFailed("outer instance is not one-dimensional".into())),
        Some(false) => return Err(Error::PreconditionFailed("outer function is not non-decreasing".into())),
        Some(true) => {}
    }
    if !check_n_sublinear(outer, m_max).holds() {
        return Err(Error::PreconditionFailed("outer function is not N-sublinear".into()));
    }
    if inner.values().values().any(|v| !v.is_finite()) {
        return Err(Error::PreconditionFailed("inner function takes an infinite value".into()));
    }
    if !check_convex(inner, bounds, None).holds() {
        return Err(Error::PreconditionFailed("inner function is not convex".into()));
    }
    let mut composed = Vec::with_capacity(inner.len());
    for (x, v) in inner.values() {
        let t = v.finite().expect("checked finite");
        let y = os
            .from_coordinates(std::slice::from_ref(t))
            .ok_or_else(|| Error::PreconditionFailed(format!("inner value {v} is not in the outer carrier")))?;
        composed.push((x.clone(), outer.eval(&y)?));
    }
    let composed = FunctionTable { values: composed.into_iter().collect(), outside: OutsidePolicy::PlusInfinity, ..inner.clone() };
    let verdict = check_convex(&composed, bounds, None);
    Ok(CompositionReport { inner_non_decreasing: non_decreasing(inner), composed, verdict })
}
