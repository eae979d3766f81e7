//! Convex-set predicates and convex hulls.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::algebra::{
    any_subset, combine_residual, enumerate_combinations, relation_holds, Bounds, DualKind, NCombination, Structure,
};
use crate::error::{Error, Result};
use crate::instances::BoxWindow;
use crate::linear::simplex::{solve_standard, StandardOutcome};
use crate::scalar::{rat, Rational};

/// A set either listed explicitly or described by a predicate.
#[derive(Clone)]
pub enum ConvexSetRep<E> {
    ExplicitFinite(BTreeSet<E>),
    MembershipOracle { name: String, predicate: Arc<dyn Fn(&E) -> bool + Send + Sync> },
}

impl<E: Ord + Clone> ConvexSetRep<E> {
    pub fn explicit(xs: impl IntoIterator<Item = E>) -> Self {
        Self::ExplicitFinite(xs.into_iter().collect())
    }

    pub fn oracle(name: impl Into<String>, predicate: impl Fn(&E) -> bool + Send + Sync + 'static) -> Self {
        Self::MembershipOracle { name: name.into(), predicate: Arc::new(predicate) }
    }

    pub fn contains(&self, x: &E) -> bool {
        match self {
            Self::ExplicitFinite(s) => s.contains(x),
            Self::MembershipOracle { predicate, .. } => predicate(x),
        }
    }

    /// Elements inside the window, sorted.
    pub fn elements_in<S: Structure<Elem = E> + ?Sized>(&self, s: &S, window: &S::Window) -> Vec<E> {
        match self {
            Self::ExplicitFinite(set) => set.iter().filter(|x| s.window_contains(window, x)).cloned().collect(),
            Self::MembershipOracle { predicate, .. } => {
                let mut v: Vec<E> = s.enumerate(window).into_iter().filter(|x| predicate(x)).collect();
                v.sort();
                v
            }
        }
    }
}

impl<E: fmt::Debug> fmt::Debug for ConvexSetRep<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExplicitFinite(s) => f.debug_tuple("ExplicitFinite").field(s).finish(),
            Self::MembershipOracle { name, .. } => f.debug_tuple("MembershipOracle").field(name).finish(),
        }
    }
}

/// Outcome of [`is_convex`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConvexityVerdict<E> {
    ConvexWithinBounds { bounds: Bounds, combinations_checked: usize, off_window_skipped: usize },
    NotConvex { combination: NCombination<E>, violating: E, bounds: Bounds },
}

impl<E> ConvexityVerdict<E> {
    pub fn is_convex(&self) -> bool {
        matches!(self, Self::ConvexWithinBounds { .. })
    }
}

/// Searches every combination over `A ∩ window` within `bounds` for a residual
/// that lies in the window but not in `A`. With `cone` set the left
/// coefficient ranges over `1..=max_coeff` independently of the term sum.
pub fn is_convex<S: Structure + ?Sized>(
    s: &S,
    a: &ConvexSetRep<S::Elem>,
    bounds: Bounds,
    window: &S::Window,
    cone: bool,
) -> ConvexityVerdict<S::Elem> {
    let gens = a.elements_in(s, window);
    let mut checked = 0;
    let mut skipped = 0;
    for c in enumerate_combinations(&gens, bounds.max_terms, bounds.max_coeff) {
        let relations: Vec<NCombination<S::Elem>> = if cone {
            (1..=bounds.max_coeff)
                .map(|m| NCombination::cone(m, c.terms().to_vec()).expect("terms are valid"))
                .collect()
        } else {
            vec![c]
        };
        for rel in relations {
            checked += 1;
            for x in combine_residual(s, &rel) {
                match s.canonicalize_in(window, &x) {
                    None => skipped += 1,
                    Some(x) if !a.contains(&x) => {
                        return ConvexityVerdict::NotConvex { combination: rel, violating: x, bounds };
                    }
                    Some(_) => {}
                }
            }
        }
    }
    ConvexityVerdict::ConvexWithinBounds { bounds, combinations_checked: checked, off_window_skipped: skipped }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HullStrategy {
    Auto,
    Finite,
    Lattice,
    Fixpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HullMethod {
    FiniteGroupTheorem,
    LatticeIntersection,
    BoundedFixpoint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullReport<E> {
    pub hull: BTreeSet<E>,
    pub method: HullMethod,
    /// Bounds that limited the search; `None` for exact methods.
    pub truncation: Option<Bounds>,
    pub certified: bool,
}

fn resolve_strategy<S: Structure + ?Sized>(s: &S, strategy: HullStrategy) -> HullStrategy {
    match strategy {
        HullStrategy::Auto if s.is_group() && s.exponent().is_some() && s.full_window().is_some() => {
            HullStrategy::Finite
        }
        HullStrategy::Auto if s.lattice_coordinates(&s.zero()).is_some() => HullStrategy::Lattice,
        HullStrategy::Auto => HullStrategy::Fixpoint,
        other => other,
    }
}

/// The convex hull of a finite set.
///
/// `bounds` and `window` are only consulted by the fixpoint strategy.
pub fn hull<S: Structure + ?Sized>(
    s: &S,
    a: &[S::Elem],
    strategy: HullStrategy,
    bounds: Bounds,
    window: &S::Window,
) -> Result<HullReport<S::Elem>> {
    let strategy = resolve_strategy(s, strategy);
    if a.is_empty() {
        let method = match strategy {
            HullStrategy::Finite => HullMethod::FiniteGroupTheorem,
            HullStrategy::Lattice => HullMethod::LatticeIntersection,
            _ => HullMethod::BoundedFixpoint,
        };
        return Ok(HullReport { hull: BTreeSet::new(), method, truncation: None, certified: true });
    }
    match strategy {
        HullStrategy::Finite => finite_group_hull(s),
        HullStrategy::Lattice => lattice_hull(s, a),
        _ => Ok(fixpoint_hull(s, a, bounds, window)),
    }
}

/// In a finite group every nonempty convex set is the whole carrier:
/// `e x = e a` for the exponent `e`.
fn finite_group_hull<S: Structure + ?Sized>(s: &S) -> Result<HullReport<S::Elem>> {
    let (Some(_), Some(w), true) = (s.exponent(), s.full_window(), s.is_group()) else {
        return Err(Error::StrategyUnavailable("finite".into()));
    };
    Ok(HullReport {
        hull: s.enumerate(&w).into_iter().collect(),
        method: HullMethod::FiniteGroupTheorem,
        truncation: None,
        certified: true,
    })
}

fn lattice_points<S: Structure + ?Sized>(s: &S, a: &[S::Elem]) -> Result<Vec<Vec<i64>>> {
    a.iter()
        .map(|x| {
            s.lattice_coordinates(x).ok_or_else(|| match s.dual_kind() {
                DualKind::CoefficientVector(_) => Error::UnboundedHull,
                _ => Error::StrategyUnavailable("lattice".into()),
            })
        })
        .collect()
}

/// `conv_R(A) ∩ Z^k`, enumerated inside the bounding box.
fn lattice_hull<S: Structure + ?Sized>(s: &S, a: &[S::Elem]) -> Result<HullReport<S::Elem>> {
    let pts = lattice_points(s, a)?;
    let rational: Vec<Vec<Rational>> = pts.iter().map(|p| p.iter().map(|v| rat(*v)).collect()).collect();
    let given: BTreeSet<&Vec<i64>> = pts.iter().collect();
    let mut hull = BTreeSet::new();
    for cand in BoxWindow::bounding(&pts).points() {
        let inside = given.contains(&cand) || {
            let x: Vec<Rational> = cand.iter().map(|v| rat(*v)).collect();
            convex_weights(&x, &rational).is_some()
        };
        if inside {
            hull.insert(s.from_lattice_coordinates(&cand).expect("lattice point"));
        }
    }
    Ok(HullReport { hull, method: HullMethod::LatticeIntersection, truncation: None, certified: true })
}

/// Semi-naive closure: each round only considers term sets that use at least
/// one element discovered in the previous round.
fn fixpoint_hull<S: Structure + ?Sized>(
    s: &S,
    a: &[S::Elem],
    bounds: Bounds,
    window: &S::Window,
) -> HullReport<S::Elem> {
    let certify = |set: &BTreeSet<S::Elem>| s.full_window().is_some_and(|w| s.enumerate(&w).len() == set.len());
    if let Some(set) = s.bounded_closure(a, bounds, window) {
        let certified = certify(&set);
        return HullReport { hull: set, method: HullMethod::BoundedFixpoint, truncation: Some(bounds), certified };
    }
    let mut set: BTreeSet<S::Elem> = a.iter().cloned().collect();
    let mut cur: Vec<S::Elem> = set.iter().cloned().collect();
    let mut frontier = 0;
    loop {
        let mut found: BTreeSet<S::Elem> = BTreeSet::new();
        for size in 1..=bounds.max_terms.min(cur.len()) {
            any_subset(cur.len(), size, frontier, &mut |idx| {
                let terms: Vec<S::Elem> = idx.iter().map(|i| cur[*i].clone()).collect();
                for x in s.bounded_residuals(&terms, bounds.max_coeff, window) {
                    if !set.contains(&x) {
                        found.insert(x);
                    }
                }
                false
            });
        }
        if found.is_empty() {
            break;
        }
        frontier = cur.len();
        set.extend(found.iter().cloned());
        cur.extend(found);
    }
    let certified = certify(&set);
    HullReport { hull: set, method: HullMethod::BoundedFixpoint, truncation: Some(bounds), certified }
}

/// Outcome of [`member`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MembershipVerdict<E> {
    /// The relation's terms are elements of `A` or, for the fixpoint path,
    /// of the computed hull.
    Member(NCombination<E>),
    NonMemberCertified,
    UnknownWithinBounds,
}

pub fn member<S: Structure + ?Sized>(
    s: &S,
    x: &S::Elem,
    a: &[S::Elem],
    strategy: HullStrategy,
    bounds: Bounds,
    window: &S::Window,
) -> Result<MembershipVerdict<S::Elem>> {
    if a.is_empty() {
        return Ok(MembershipVerdict::NonMemberCertified);
    }
    match resolve_strategy(s, strategy) {
        HullStrategy::Finite => {
            finite_group_hull(s)?;
            let e = s.exponent().expect("finite group");
            let c = NCombination::new(vec![(e, a[0].clone())])?;
            debug_assert!(relation_holds(s, &c, x));
            Ok(MembershipVerdict::Member(c))
        }
        HullStrategy::Lattice => {
            let pts = lattice_points(s, a)?;
            let xp = s.lattice_coordinates(x).ok_or(Error::UnboundedHull)?;
            let rational: Vec<Vec<Rational>> = pts.iter().map(|p| p.iter().map(|v| rat(*v)).collect()).collect();
            let xr: Vec<Rational> = xp.iter().map(|v| rat(*v)).collect();
            Ok(match convex_weights(&xr, &rational) {
                Some(lambda) => MembershipVerdict::Member(combination_from_weights(&lambda, a)),
                None => MembershipVerdict::NonMemberCertified,
            })
        }
        _ => {
            if let Some(c) = search_relation(s, x, a, bounds) {
                return Ok(MembershipVerdict::Member(c));
            }
            let report = fixpoint_hull(s, a, bounds, window);
            let Some(xc) = s.canonicalize_in(window, x) else {
                return Ok(MembershipVerdict::UnknownWithinBounds);
            };
            if report.hull.contains(&xc) {
                let hull: Vec<S::Elem> = report.hull.iter().cloned().collect();
                if let Some(c) = search_relation(s, x, &hull, bounds) {
                    return Ok(MembershipVerdict::Member(c));
                }
            }
            Ok(if report.certified && !report.hull.contains(&xc) {
                MembershipVerdict::NonMemberCertified
            } else {
                MembershipVerdict::UnknownWithinBounds
            })
        }
    }
}

fn search_relation<S: Structure + ?Sized>(
    s: &S,
    x: &S::Elem,
    gens: &[S::Elem],
    bounds: Bounds,
) -> Option<NCombination<S::Elem>> {
    enumerate_combinations(gens, bounds.max_terms, bounds.max_coeff).find(|c| relation_holds(s, c, x))
}

/// Turns convex weights into `L x = Σ (L λ_i) a_i` with `L` the common denominator.
fn combination_from_weights<E: Clone + Eq>(lambda: &[Rational], a: &[E]) -> NCombination<E> {
    let l = lambda.iter().fold(BigInt::from(1), |acc, q| acc.lcm(q.denom()));
    let terms = lambda
        .iter()
        .zip(a)
        .filter(|(q, _)| !q.is_zero())
        .map(|(q, e)| {
            let m = (q * Rational::from_integer(l.clone())).to_integer();
            (m.to_u64().expect("coefficient fits"), e.clone())
        })
        .collect();
    NCombination::new(terms).expect("weights sum to one")
}

/// Weights `λ >= 0`, `Σ λ = 1`, `Σ λ_i a_i = x`, if any exist.
pub fn convex_weights(x: &[Rational], a: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    match convex_feasibility(x, a) {
        StandardOutcome::Optimal { y, .. } => Some(y),
        _ => None,
    }
}

fn convex_feasibility(x: &[Rational], a: &[Vec<Rational>]) -> StandardOutcome {
    let d = x.len();
    let mut rows: Vec<Vec<Rational>> = (0..d).map(|r| a.iter().map(|p| p[r].clone()).collect()).collect();
    rows.push(vec![rat(1); a.len()]);
    let mut rhs = x.to_vec();
    rhs.push(rat(1));
    solve_standard(&rows, &rhs, &vec![Rational::zero(); a.len()])
}

pub const MAX_HULL_DIMENSION: usize = 6;

/// Outcome of [`rational_hull_membership`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RationalHullMembership {
    Inside { weights: Vec<Rational> },
    /// `a · x > b` and `a · p <= b` for every `p` in the set.
    Outside { a: Vec<Rational>, b: Rational },
}

/// Exact membership of `x` in the real convex hull of `points`.
pub fn rational_hull_membership(x: &[Rational], points: &[Vec<Rational>]) -> Result<RationalHullMembership> {
    let d = x.len();
    if d > MAX_HULL_DIMENSION {
        return Err(Error::DimensionTooLarge(d, MAX_HULL_DIMENSION));
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::PreconditionFailed("points differ in dimension".into()));
    }
    if points.is_empty() {
        // the zero functional with b = -1 separates everything from the empty set
        return Ok(RationalHullMembership::Outside { a: vec![Rational::zero(); d], b: rat(-1) });
    }
    Ok(match convex_feasibility(x, points) {
        StandardOutcome::Optimal { y, .. } => RationalHullMembership::Inside { weights: y },
        StandardOutcome::Infeasible { farkas } => RationalHullMembership::Outside {
            a: farkas[..d].to_vec(),
            b: -farkas[d].clone(),
        },
        StandardOutcome::Unbounded { .. } => unreachable!("zero objective is bounded"),
    })
}

/// Spot-checks `T(0) = 0` and `T(x + y) = T(x) + T(y)` on a sample.
pub fn check_additive<A: Structure + ?Sized, B: Structure + ?Sized>(
    src: &A,
    dst: &B,
    map: &dyn Fn(&A::Elem) -> B::Elem,
    sample: &[A::Elem],
) -> Result<()> {
    if !dst.same(&map(&src.zero()), &dst.zero()) {
        return Err(Error::NotAdditive("T(0) != 0".into()));
    }
    for x in sample {
        for y in sample {
            let lhs = map(&src.add(x, y));
            let rhs = dst.add(&map(x), &map(y));
            if !dst.same(&lhs, &rhs) {
                return Err(Error::NotAdditive(format!("T({x:?} + {y:?}) != T({x:?}) + T({y:?})")));
            }
        }
    }
    Ok(())
}

const ADDITIVITY_SAMPLE: usize = 40;

fn sample_of<A: Structure + ?Sized>(src: &A, window: &A::Window) -> Vec<A::Elem> {
    let all = src.enumerate(window);
    let step = (all.len() / ADDITIVITY_SAMPLE).max(1);
    all.into_iter().step_by(step).collect()
}

/// Forward image: `T(A)` is checked for convexity in the target.
///
/// The map must be bijective or the source divisible in every `n` up to
/// `bounds.max_coeff`, otherwise images of convex sets need not be convex.
#[allow(clippy::too_many_arguments)]
pub fn check_image_convexity<A: Structure + ?Sized, B: Structure + ?Sized>(
    src: &A,
    dst: &B,
    map: &dyn Fn(&A::Elem) -> B::Elem,
    bijective: bool,
    set: &[A::Elem],
    bounds: Bounds,
    src_window: &A::Window,
    dst_window: &B::Window,
) -> Result<ConvexityVerdict<B::Elem>> {
    check_additive(src, dst, map, &sample_of(src, src_window))?;
    let divisible = (2..=bounds.max_coeff.max(2))
        .all(|n| src.declared_divisibility(n) == crate::algebra::Divisibility::Divisible);
    if !bijective && !divisible {
        return Err(Error::PreconditionFailed(
            "forward images need a bijective map or a divisible source".into(),
        ));
    }
    let image = ConvexSetRep::explicit(set.iter().map(map));
    Ok(is_convex(dst, &image, bounds, dst_window, false))
}

/// Inverse image: `T⁻¹(A) ∩ src_window` is checked for convexity in the source.
pub fn check_preimage_convexity<A: Structure + ?Sized, B: Structure + ?Sized>(
    src: &A,
    dst: &B,
    map: &dyn Fn(&A::Elem) -> B::Elem,
    set: &[B::Elem],
    bounds: Bounds,
    src_window: &A::Window,
) -> Result<ConvexityVerdict<A::Elem>> {
    check_additive(src, dst, map, &sample_of(src, src_window))?;
    let target: Vec<B::Elem> = set.to_vec();
    let pre = ConvexSetRep::explicit(
        src.enumerate(src_window)
            .into_iter()
            .filter(|x| {
                let y = map(x);
                target.iter().any(|t| dst.same(t, &y))
            }),
    );
    Ok(is_convex(src, &pre, bounds, src_window, false))
}
