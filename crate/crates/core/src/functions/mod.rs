//! Extended-scalar functions on instance windows, function-class predicates,
//! minorant constructions and the quantitative slope and boundedness lemmas.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{enumerate_combinations, nth_multiple, relation_holds, weighted_sum, Bounds, NCombination, Structure};
use crate::error::{Error, Result};
use crate::scalar::ExtendedScalar;

mod lemmas;
mod minorants;

pub use lemmas::{
    local_boundedness_bound, monotone_composition_check, three_slope_check, CompositionReport, LocalBoundVerdict,
    ThreeSlopeReport,
};
pub use minorants::{homogenized_minorant_po, pointwise_max, subadditive_minorant_p, wedge_minorant, HomogenizedMinorant};

/// Evaluation rule for elements outside the table's window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutsidePolicy {
    /// The window is the effective domain; everything else is `+inf`.
    PlusInfinity,
    /// Off-window queries are errors.
    Undefined,
}

/// A function `X -> [-inf, +inf]` tabulated on a finite window.
pub struct FunctionTable<S: Structure> {
    instance: Arc<S>,
    window: S::Window,
    values: BTreeMap<S::Elem, ExtendedScalar>,
    outside: OutsidePolicy,
}

impl<S: Structure> Clone for FunctionTable<S> {
    fn clone(&self) -> Self {
        Self {
            instance: Arc::clone(&self.instance),
            window: self.window.clone(),
            values: self.values.clone(),
            outside: self.outside,
        }
    }
}

impl<S: Structure> fmt::Debug for FunctionTable<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionTable")
            .field("instance", &self.instance.name())
            .field("window", &self.window)
            .field("values", &self.values)
            .field("outside", &self.outside)
            .finish()
    }
}

impl<S: Structure> FunctionTable<S> {
    /// Validates that `values` covers exactly the window.
    pub fn new(
        instance: Arc<S>,
        window: S::Window,
        values: BTreeMap<S::Elem, ExtendedScalar>,
        outside: OutsidePolicy,
    ) -> Result<Self> {
        let elems = instance.enumerate(&window);
        let mut canonical = BTreeMap::new();
        for (x, v) in values {
            let c = instance.canonicalize_in(&window, &x).ok_or(Error::OutsideWindow)?;
            canonical.insert(c, v);
        }
        if let Some(missing) = elems.iter().find(|x| !canonical.contains_key(*x)) {
            return Err(Error::MissingValue(format!("{}", instance.encode(missing))));
        }
        Ok(Self { instance, window, values: canonical, outside })
    }

    pub fn from_fn(
        instance: Arc<S>,
        window: S::Window,
        outside: OutsidePolicy,
        f: impl Fn(&S::Elem) -> ExtendedScalar,
    ) -> Self {
        let values = instance.enumerate(&window).into_iter().map(|x| {
            let v = f(&x);
            (x, v)
        });
        let values = values.collect();
        Self { instance, window, values, outside }
    }

    pub fn instance(&self) -> &S {
        &self.instance
    }

    pub fn instance_arc(&self) -> &Arc<S> {
        &self.instance
    }

    pub fn window(&self) -> &S::Window {
        &self.window
    }

    pub fn outside_policy(&self) -> OutsidePolicy {
        self.outside
    }

    pub fn values(&self) -> &BTreeMap<S::Elem, ExtendedScalar> {
        &self.values
    }

    pub fn elements(&self) -> impl Iterator<Item = &S::Elem> {
        self.values.keys()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The window element equal to `x`, if any.
    pub fn locate(&self, x: &S::Elem) -> Option<S::Elem> {
        self.instance.canonicalize_in(&self.window, x)
    }

    /// Value at a window element.
    pub fn value(&self, x: &S::Elem) -> Option<&ExtendedScalar> {
        self.values.get(x).or_else(|| self.locate(x).and_then(|c| self.values.get(&c)))
    }

    /// Value anywhere, following the outside policy off the window.
    pub fn eval(&self, x: &S::Elem) -> Result<ExtendedScalar> {
        match self.value(x) {
            Some(v) => Ok(v.clone()),
            None => match self.outside {
                OutsidePolicy::PlusInfinity => Ok(ExtendedScalar::PlusInfinity),
                OutsidePolicy::Undefined => Err(Error::OutsideWindow),
            },
        }
    }

    pub fn map(&self, g: impl Fn(&S::Elem, &ExtendedScalar) -> ExtendedScalar) -> Self {
        let values = self.values.iter().map(|(x, v)| (x.clone(), g(x, v))).collect();
        Self { values, ..self.clone() }
    }

    /// `-f` on the window; the outside policy is kept.
    pub fn negated(&self) -> Self {
        self.map(|_, v| -v)
    }

    pub fn with_outside_policy(mut self, outside: OutsidePolicy) -> Self {
        self.outside = outside;
        self
    }

    /// Window elements where `f < +inf`, in window order.
    pub fn effective_domain(&self) -> Vec<S::Elem> {
        self.values.iter().filter(|(_, v)| !v.is_plus_infinity()).map(|(x, _)| x.clone()).collect()
    }

    /// Same instance (by name) and same window.
    pub fn shares_window(&self, other: &Self) -> bool {
        self.instance.name() == other.instance.name()
            && serde_json::to_value(&self.window).ok() == serde_json::to_value(&other.window).ok()
    }

    /// Whether the window covers a finite carrier completely.
    pub fn covers_carrier(&self) -> bool {
        self.instance
            .full_window()
            .map(|w| self.instance.enumerate(&w).len() == self.values.len())
            .unwrap_or(false)
    }
}

/// A violated inequality, stated with the values it was evaluated at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation<E> {
    /// `m f(residual) > Σ m_i f(x_i)` for the relation `m residual = Σ m_i x_i`.
    Combination { combination: NCombination<E>, residual: E, lhs: ExtendedScalar, rhs: ExtendedScalar },
    /// `f(x + y) > f(x) + f(y)`.
    Subadditivity { x: E, y: E, sum: E, lhs: ExtendedScalar, rhs: ExtendedScalar },
    /// `f(m x) != m f(x)`.
    Homogeneity { x: E, m: u64, multiple: E, lhs: ExtendedScalar, rhs: ExtendedScalar },
}

impl<E: Clone + Ord> Violation<E> {
    /// Recomputes the violation from table lookups.
    pub fn replay<S: Structure<Elem = E>>(&self, f: &FunctionTable<S>) -> bool {
        let s = f.instance();
        let ev = |x: &E| f.eval(x).ok();
        match self {
            Self::Combination { combination, residual, lhs, rhs } => {
                let Some(fx) = ev(residual) else { return false };
                let Some(vals) = combination.terms().iter().map(|(_, x)| ev(x)).collect::<Option<Vec<_>>>() else {
                    return false;
                };
                let l = fx.scale(combination.lhs());
                let r = ExtendedScalar::weighted_sum_convex(combination.terms().iter().map(|(m, _)| *m).zip(&vals));
                relation_holds(s, combination, residual) && &l == lhs && &r == rhs && l > r
            }
            Self::Subadditivity { x, y, sum, lhs, rhs } => {
                let (Some(a), Some(b), Some(c)) = (ev(x), ev(y), ev(sum)) else { return false };
                let r = a.add_convex(&b);
                s.same(&s.add(x, y), sum) && &c == lhs && &r == rhs && c > r
            }
            Self::Homogeneity { x, m, multiple, lhs, rhs } => {
                let (Some(a), Some(b)) = (ev(x), ev(multiple)) else { return false };
                let r = a.scale(*m);
                s.same(&nth_multiple(s, x, *m), multiple) && &b == lhs && &r == rhs && b != r
            }
        }
    }
}

/// Result of a function-class check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassVerdict<E> {
    HoldsWithinBounds { bounds: Option<Bounds>, checks: usize, off_window_skipped: usize },
    Fails { certificate: Violation<E>, bounds: Option<Bounds> },
}

impl<E> ClassVerdict<E> {
    pub fn holds(&self) -> bool {
        matches!(self, Self::HoldsWithinBounds { .. })
    }

    pub fn certificate(&self) -> Option<&Violation<E>> {
        match self {
            Self::Fails { certificate, .. } => Some(certificate),
            Self::HoldsWithinBounds { .. } => None,
        }
    }
}

fn is_power_of(mut m: u64, p: u64) -> bool {
    if p < 2 {
        return m == 1;
    }
    while m.is_multiple_of(p) {
        m /= p;
    }
    m == 1
}

/// Checks `m f(x) <= Σ m_i f(x_i)` over every bounded combination of the
/// effective domain. With `use_p_power` the left coefficient is restricted to
/// powers of that prime.
pub fn check_convex<S: Structure>(
    f: &FunctionTable<S>,
    bounds: Bounds,
    use_p_power: Option<u64>,
) -> ClassVerdict<S::Elem> {
    let s = f.instance();
    let dom = f.effective_domain();
    let mut checks = 0;
    let mut skipped = 0;
    for c in enumerate_combinations(&dom, bounds.max_terms, bounds.max_coeff) {
        let m = c.lhs();
        if let Some(p) = use_p_power {
            if !is_power_of(m, p) {
                continue;
            }
        }
        checks += 1;
        let rhs = ExtendedScalar::weighted_sum_convex(c.terms().iter().map(|(mi, x)| (*mi, &f.values[x])));
        let sum = weighted_sum(s, c.terms().iter().map(|(mi, x)| (*mi, x)));
        for x in s.divide(&sum, m) {
            let Some(x) = f.locate(&x) else {
                skipped += 1;
                continue;
            };
            let lhs = f.values[&x].scale(m);
            if lhs > rhs {
                return ClassVerdict::Fails {
                    certificate: Violation::Combination { combination: c, residual: x, lhs, rhs },
                    bounds: Some(bounds),
                };
            }
        }
    }
    ClassVerdict::HoldsWithinBounds { bounds: Some(bounds), checks, off_window_skipped: skipped }
}

/// Checks `f(x + y) <= f(x) + f(y)` for all window pairs with in-window sum.
pub fn check_subadditive<S: Structure>(f: &FunctionTable<S>) -> ClassVerdict<S::Elem> {
    let s = f.instance();
    let dom = f.effective_domain();
    let mut checks = 0;
    let mut skipped = 0;
    for (i, x) in dom.iter().enumerate() {
        for y in &dom[i..] {
            let Some(sum) = f.locate(&s.add(x, y)) else {
                skipped += 1;
                continue;
            };
            checks += 1;
            let lhs = f.values[&sum].clone();
            let rhs = f.values[x].add_convex(&f.values[y]);
            if lhs > rhs {
                return ClassVerdict::Fails {
                    certificate: Violation::Subadditivity { x: x.clone(), y: y.clone(), sum, lhs, rhs },
                    bounds: None,
                };
            }
        }
    }
    ClassVerdict::HoldsWithinBounds { bounds: None, checks, off_window_skipped: skipped }
}

/// Checks `f(m x) = m f(x)` for the given multipliers wherever `m x` is in the window.
pub fn check_homogeneity<S: Structure>(
    f: &FunctionTable<S>,
    multipliers: impl IntoIterator<Item = u64>,
) -> ClassVerdict<S::Elem> {
    let s = f.instance();
    let mut checks = 0;
    let mut skipped = 0;
    for m in multipliers {
        for (x, v) in f.values() {
            let Some(mx) = f.locate(&nth_multiple(s, x, m)) else {
                skipped += 1;
                continue;
            };
            checks += 1;
            let lhs = f.values[&mx].clone();
            let rhs = v.scale(m);
            if lhs != rhs {
                return ClassVerdict::Fails {
                    certificate: Violation::Homogeneity { x: x.clone(), m, multiple: mx, lhs, rhs },
                    bounds: None,
                };
            }
        }
    }
    ClassVerdict::HoldsWithinBounds { bounds: None, checks, off_window_skipped: skipped }
}

/// Subadditivity plus `f(m x) = m f(x)` for `2 <= m <= m_max`.
pub fn check_n_sublinear<S: Structure>(f: &FunctionTable<S>, m_max: u64) -> ClassVerdict<S::Elem> {
    let sub = check_subadditive(f);
    if !sub.holds() {
        return sub;
    }
    check_homogeneity(f, 2..=m_max)
}

/// Runs [`check_n_sublinear`] on `f` and on `-f`; both hold iff `f` is
/// generalised `N`-linear within the window.
pub fn check_generalised_n_linear<S: Structure>(
    f: &FunctionTable<S>,
    m_max: u64,
) -> (ClassVerdict<S::Elem>, ClassVerdict<S::Elem>) {
    (check_n_sublinear(f, m_max), check_n_sublinear(&f.negated(), m_max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplicationStatus {
    /// Hypotheses and conclusion all hold.
    Confirmed,
    /// A hypothesis fails, so nothing is claimed.
    Vacuous,
    /// Hypotheses hold but the conclusion fails.
    Refuted,
}

/// Outcome of [`check_p_homogeneous_implies_convex`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PSufficiencyReport<E> {
    pub p: u64,
    pub subadditive: ClassVerdict<E>,
    pub p_homogeneous: ClassVerdict<E>,
    pub convex: ClassVerdict<E>,
    /// `f(m x) = m f(x)` for `m <= m_max`; checked on groups only.
    pub n_homogeneous: Option<ClassVerdict<E>>,
    pub status: ImplicationStatus,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// On a `p`-semidivisible instance, subadditive and `p`-homogeneous should
/// imply convex, and on groups also `N`-sublinear.
pub fn check_p_homogeneous_implies_convex<S: Structure>(
    f: &FunctionTable<S>,
    p: u64,
    bounds: Bounds,
    m_max: u64,
) -> Result<PSufficiencyReport<S::Elem>> {
    if !is_prime(p) {
        return Err(Error::PreconditionFailed(format!("{p} is not prime")));
    }
    let s = f.instance();
    if s.declared_divisibility(p) != crate::algebra::Divisibility::Divisible {
        return Err(Error::PreconditionFailed(format!("{} is not declared {p}-divisible", s.name())));
    }
    let subadditive = check_subadditive(f);
    let p_homogeneous = check_homogeneity(f, [p]);
    let convex = check_convex(f, bounds, None);
    let n_homogeneous = s.is_group().then(|| check_homogeneity(f, 2..=m_max));
    let status = if !(subadditive.holds() && p_homogeneous.holds()) {
        ImplicationStatus::Vacuous
    } else if convex.holds() && n_homogeneous.as_ref().is_none_or(ClassVerdict::holds) {
        ImplicationStatus::Confirmed
    } else {
        ImplicationStatus::Refuted
    };
    Ok(PSufficiencyReport { p, subadditive, p_homogeneous, convex, n_homogeneous, status })
}

/// The shapes a generalised affine function can take on a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AffineClass {
    EverywhereFinite,
    PlusInfinity,
    MinusInfinity,
    BothInfinities,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AffineClassification<E> {
    NotGeneralisedAffine { convex: ClassVerdict<E>, concave: ClassVerdict<E> },
    Class(AffineClass),
    /// Finite somewhere and a single infinity elsewhere: impossible for a
    /// truly generalised affine function, so the bounded checks missed a violation.
    TrichotomyViolated { finite_at: E, infinite_at: E },
}

/// Classifies a table that is both convex and concave within bounds.
pub fn classify_generalised_affine<S: Structure>(
    f: &FunctionTable<S>,
    bounds: Bounds,
) -> Result<AffineClassification<S::Elem>> {
    if !f.instance().is_group() {
        return Err(Error::PreconditionFailed("the affine trichotomy needs a group".into()));
    }
    let convex = check_convex(f, bounds, None);
    let concave = check_convex(&f.negated(), bounds, None);
    if !(convex.holds() && concave.holds()) {
        return Ok(AffineClassification::NotGeneralisedAffine { convex, concave });
    }
    let find = |pred: fn(&ExtendedScalar) -> bool| f.values().iter().find(|(_, v)| pred(v)).map(|(x, _)| x.clone());
    let finite = find(ExtendedScalar::is_finite);
    let plus = find(ExtendedScalar::is_plus_infinity);
    let minus = find(ExtendedScalar::is_minus_infinity);
    Ok(match (finite, plus, minus) {
        (_, Some(_), Some(_)) => AffineClassification::Class(AffineClass::BothInfinities),
        (Some(_), None, None) => AffineClassification::Class(AffineClass::EverywhereFinite),
        (None, Some(_), None) => AffineClassification::Class(AffineClass::PlusInfinity),
        (None, None, Some(_)) => AffineClassification::Class(AffineClass::MinusInfinity),
        (Some(x), Some(y), None) | (Some(x), None, Some(y)) => {
            AffineClassification::TrichotomyViolated { finite_at: x, infinite_at: y }
        }
        (None, None, None) => AffineClassification::Class(AffineClass::EverywhereFinite),
    })
}

/// Core-of-domain probe: for each direction `h`, the first `(n, g)` in
/// schedule order with `n g = h` and `f(x + g) < +inf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainCoreQuery<E> {
    pub x: E,
    pub directions: Vec<(E, Option<(u64, E)>)>,
}

impl<E: Clone + Ord> DomainCoreQuery<E> {
    pub fn in_core(&self) -> bool {
        self.directions.iter().all(|(_, r)| r.is_some())
    }

    /// Rechecks every recorded `(n, g)`.
    pub fn verify<S: Structure<Elem = E>>(&self, f: &FunctionTable<S>) -> bool {
        let s = f.instance();
        self.directions.iter().all(|(h, r)| match r {
            None => true,
            Some((n, g)) => {
                s.same(&nth_multiple(s, g, *n), h)
                    && f.eval(&s.add(&self.x, g)).map(|v| !v.is_plus_infinity()).unwrap_or(false)
            }
        })
    }
}

pub fn probe_core<S: Structure>(
    f: &FunctionTable<S>,
    x: &S::Elem,
    directions: &[S::Elem],
    schedule: &[u64],
) -> DomainCoreQuery<S::Elem> {
    let s = f.instance();
    let finite_at = |y: &S::Elem| f.eval(y).map(|v| !v.is_plus_infinity()).unwrap_or(false);
    let directions = directions
        .iter()
        .map(|h| {
            let hit = schedule.iter().find_map(|&n| {
                s.divide(h, n).into_iter().find(|g| finite_at(&s.add(x, g))).map(|g| (n, g))
            });
            (h.clone(), hit)
        })
        .collect();
    DomainCoreQuery { x: x.clone(), directions }
}
