//! Directional derivatives, subdifferentials, the max formula and the sum rule.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use super::{core_of_difference, AdditiveMap, AdditiveWitness};
use crate::algebra::{nth_multiple, semidivisibility_prime, DualKind, Structure};
use crate::error::{Error, Result};
use crate::functions::{check_homogeneity, check_n_sublinear, check_subadditive, FunctionTable, OutsidePolicy};
use crate::hull::{rational_hull_membership, RationalHullMembership};
use crate::linear::matrix::{dot, rank, solve};
use crate::linear::simplex::{maximize, satisfies, LpOutcome};
use crate::scalar::{ExtendedScalar, Rational};

/// Samples of `n (f(x + g) - f(x))` over `n g = h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionalDerivativeReport<E> {
    pub x: E,
    pub h: E,
    pub samples: Vec<(u64, E, ExtendedScalar)>,
    pub infimum: ExtendedScalar,
    /// The last three per-`n` minima agree.
    pub stabilized: bool,
}

impl<E: Clone> DirectionalDerivativeReport<E> {
    /// Minimum sample for each `n`, in schedule order.
    pub fn per_n(&self) -> Vec<(u64, ExtendedScalar)> {
        let mut out: Vec<(u64, ExtendedScalar)> = Vec::new();
        for (n, _, v) in &self.samples {
            match out.last_mut() {
                Some((m, best)) if m == n => {
                    if v < best {
                        *best = v.clone();
                    }
                }
                _ => out.push((*n, v.clone())),
            }
        }
        out
    }

    /// Along every step `n -> n'` of the schedule with `n | n'`, the value does not increase.
    pub fn is_non_increasing(&self) -> bool {
        self.per_n().windows(2).all(|w| w[1].0 % w[0].0 != 0 || w[1].1 <= w[0].1)
    }
}

fn stabilized(per_n: &[(u64, ExtendedScalar)]) -> bool {
    per_n.len() >= 3 && per_n[per_n.len() - 3..].windows(2).all(|w| w[0].1 == w[1].1)
}

fn finite_at<S: Structure>(f: &FunctionTable<S>, x: &S::Elem) -> Result<Rational> {
    match f.eval(x)? {
        ExtendedScalar::Finite(q) => Ok(q),
        _ => Err(Error::PreconditionFailed(format!("f is not finite at {}", f.instance().encode(x)))),
    }
}

fn report<E: Clone>(x: &E, h: &E, samples: Vec<(u64, E, ExtendedScalar)>) -> Result<DirectionalDerivativeReport<E>> {
    if !samples.iter().any(|(_, _, v)| !v.is_plus_infinity()) {
        return Err(Error::CorePrereqFailed);
    }
    let infimum = samples.iter().map(|(_, _, v)| v.clone()).min().expect("nonempty");
    let mut r = DirectionalDerivativeReport { x: x.clone(), h: h.clone(), samples, infimum, stabilized: false };
    r.stabilized = stabilized(&r.per_n());
    Ok(r)
}

/// `f_x(h) = inf n (f(x + g) - f(x))` over `n` in the schedule and `n g = h`.
pub fn directional_derivative<S: Structure>(
    f: &FunctionTable<S>,
    x: &S::Elem,
    h: &S::Elem,
    schedule: &[u64],
) -> Result<DirectionalDerivativeReport<S::Elem>> {
    let s = f.instance();
    let fx = ExtendedScalar::Finite(finite_at(f, x)?);
    let mut samples = Vec::new();
    for &n in schedule {
        for g in s.divide(h, n) {
            let v = (f.eval(&s.add(x, &g))? - fx.clone()).scale(n);
            samples.push((n, g, v));
        }
    }
    report(x, h, samples)
}

/// The form `f(n x + h) - n f(x)` valid for `N`-sublinear `f`; the middle
/// entry of each sample is `n x + h`.
pub fn directional_derivative_sublinear<S: Structure>(
    f: &FunctionTable<S>,
    x: &S::Elem,
    h: &S::Elem,
    schedule: &[u64],
) -> Result<DirectionalDerivativeReport<S::Elem>> {
    let m_max = schedule.iter().copied().max().unwrap_or(1);
    if !check_n_sublinear(f, m_max).holds() {
        return Err(Error::PreconditionFailed("f is not N-sublinear on the window".into()));
    }
    let s = f.instance();
    let fx = ExtendedScalar::Finite(finite_at(f, x)?);
    let samples = schedule
        .iter()
        .map(|&n| {
            let y = s.add(&nth_multiple(s, x, n), h);
            let v = f.eval(&y)? - fx.scale(n);
            Ok((n, y, v))
        })
        .collect::<Result<Vec<_>>>()?;
    report(x, h, samples)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivativeLawsReport<E> {
    /// `(h, f_x(h), f(h), f_x(h) <= f(h))` for stabilized probes.
    pub bounded_by_f: Vec<(E, ExtendedScalar, ExtendedScalar, bool)>,
    pub unstabilized: Vec<E>,
    /// `(f_x(x), f_x(-x), sum <= 0)` when both sides stabilized.
    pub antisymmetry: Option<(ExtendedScalar, ExtendedScalar, bool)>,
}

impl<E> DerivativeLawsReport<E> {
    pub fn holds(&self) -> bool {
        self.bounded_by_f.iter().all(|r| r.3) && self.antisymmetry.as_ref().is_none_or(|a| a.2)
    }
}

/// `f_x <= f` on the probes and `f_x(x) + f_x(-x) <= 0`.
pub fn derivative_laws_check<S: Structure>(
    f: &FunctionTable<S>,
    x: &S::Elem,
    probes: &[S::Elem],
    schedule: &[u64],
) -> Result<DerivativeLawsReport<S::Elem>> {
    let s = f.instance();
    let p = semidivisibility_prime(s)
        .ok_or_else(|| Error::PreconditionFailed("instance is not declared semidivisible".into()))?;
    if !check_subadditive(f).holds() || !check_homogeneity(f, [p]).holds() {
        return Err(Error::PreconditionFailed(format!("f is not subadditive with f(px) = pf(x) for p = {p}")));
    }
    let mut bounded_by_f = Vec::new();
    let mut unstabilized = Vec::new();
    for h in probes {
        let r = directional_derivative(f, x, h, schedule)?;
        if r.stabilized {
            let fh = f.eval(h)?;
            let ok = r.infimum <= fh;
            bounded_by_f.push((h.clone(), r.infimum, fh, ok));
        } else {
            unstabilized.push(h.clone());
        }
    }
    let antisymmetry = match s.negate(x) {
        Some(minus_x) => {
            let a = directional_derivative(f, x, x, schedule)?;
            let b = directional_derivative(f, x, &minus_x, schedule)?;
            (a.stabilized && b.stabilized).then(|| {
                let ok = a.infimum.add_convex(&b.infimum) <= ExtendedScalar::zero();
                (a.infimum, b.infimum, ok)
            })
        }
        None => None,
    };
    Ok(DerivativeLawsReport { bounded_by_f, unstabilized, antisymmetry })
}

/// `a(h) <= rhs`, from `f(x0) + a(h) <= f(x0 + h)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgradientConstraint<E> {
    pub h: E,
    pub row: Vec<Rational>,
    pub rhs: Rational,
}

/// The subdifferential at `x0` cut out by finitely many probe directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdifferentialRep<E> {
    pub x0: E,
    pub dim: usize,
    pub constraints: Vec<SubgradientConstraint<E>>,
    /// A probe with `f(x0 + h) = -inf`, which empties the set.
    pub forced_empty: Option<E>,
}

impl<E: Clone> SubdifferentialRep<E> {
    pub fn system(&self) -> (Vec<Vec<Rational>>, Vec<Rational>) {
        (self.constraints.iter().map(|c| c.row.clone()).collect(), self.constraints.iter().map(|c| c.rhs.clone()).collect())
    }

    pub fn contains(&self, a: &[Rational]) -> bool {
        self.forced_empty.is_none()
            && a.len() == self.dim
            && self.constraints.iter().all(|c| dot(&c.row, a) <= c.rhs)
    }

    /// `max { a · dir : a in the set }`; `-inf` for the empty set.
    pub fn support(&self, dir: &[Rational]) -> ExtendedScalar {
        if self.forced_empty.is_some() {
            return ExtendedScalar::MinusInfinity;
        }
        if self.constraints.is_empty() {
            return if dir.iter().all(Zero::is_zero) { ExtendedScalar::zero() } else { ExtendedScalar::PlusInfinity };
        }
        let (a, b) = self.system();
        match maximize(&a, &b, dir) {
            LpOutcome::Optimal { value, .. } => ExtendedScalar::Finite(value),
            LpOutcome::Unbounded { .. } => ExtendedScalar::PlusInfinity,
            LpOutcome::Infeasible { .. } => ExtendedScalar::MinusInfinity,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.support(&vec![Rational::zero(); self.dim]).is_minus_infinity()
    }

    fn unit(&self, i: usize, sign: i64) -> Vec<Rational> {
        let mut e = vec![Rational::zero(); self.dim];
        e[i] = Rational::from_integer(sign.into());
        e
    }

    pub fn is_bounded(&self) -> bool {
        (0..self.dim).all(|i| [1, -1].iter().all(|&sg| !self.support(&self.unit(i, sg)).is_plus_infinity()))
    }

    /// `[lo, hi]` in dimension one, `None` ends for unbounded sides; `None` when empty.
    pub fn interval(&self) -> Option<(Option<Rational>, Option<Rational>)> {
        assert_eq!(self.dim, 1, "interval needs a one-dimensional dual");
        if self.is_empty() {
            return None;
        }
        let hi = self.support(&self.unit(0, 1)).finite().cloned();
        let lo = self.support(&self.unit(0, -1)).finite().map(|v| -v);
        Some((lo, hi))
    }

    /// `other ⊆ self`, decided by one support computation per constraint of `self`.
    pub fn contains_set(&self, other: &Self) -> bool {
        if other.is_empty() {
            return true;
        }
        self.forced_empty.is_none()
            && self.constraints.iter().all(|c| other.support(&c.row) <= ExtendedScalar::Finite(c.rhs.clone()))
    }

    /// Vertices of the polyhedron, for duals of dimension at most three.
    pub fn vertices(&self) -> Result<Vec<Vec<Rational>>> {
        if self.dim > 3 {
            return Err(Error::DimensionTooLarge(self.dim, 3));
        }
        if self.forced_empty.is_some() {
            return Ok(Vec::new());
        }
        let (a, b) = reduced_system(&self.constraints);
        let mut found = BTreeSet::new();
        let mut pick = Vec::with_capacity(self.dim);
        subsets(a.len(), self.dim, 0, &mut pick, &mut |idx| {
            let rows: Vec<Vec<Rational>> = idx.iter().map(|&i| a[i].clone()).collect();
            if rank(&rows) < self.dim {
                return;
            }
            let rhs: Vec<Rational> = idx.iter().map(|&i| b[i].clone()).collect();
            if let Some(v) = solve(&rows, &rhs) {
                if satisfies(&a, &b, &v) {
                    found.insert(v);
                }
            }
        });
        Ok(found.into_iter().collect())
    }

    /// Vertices of a bounded, nonempty set.
    pub fn polytope_vertices(&self) -> Result<Vec<Vec<Rational>>> {
        if !self.is_bounded() {
            return Err(Error::PreconditionFailed("subdifferential is unbounded on these probes".into()));
        }
        self.vertices()
    }
}

/// Rows scaled so the first nonzero entry is `±1`, keeping the tightest right-hand side.
fn reduced_system<E>(constraints: &[SubgradientConstraint<E>]) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let mut best: std::collections::BTreeMap<Vec<Rational>, Rational> = std::collections::BTreeMap::new();
    for c in constraints {
        let Some(lead) = c.row.iter().find(|v| !v.is_zero()) else { continue };
        let scale = lead.abs();
        let row: Vec<Rational> = c.row.iter().map(|v| v / &scale).collect();
        let rhs = &c.rhs / &scale;
        best.entry(row).and_modify(|r| {
            if rhs < *r {
                *r = rhs.clone();
            }
        })
        .or_insert(rhs);
    }
    best.into_iter().unzip()
}

fn subsets(n: usize, k: usize, start: usize, pick: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if pick.len() == k {
        visit(pick);
        return;
    }
    for i in start..n {
        pick.push(i);
        subsets(n, k, i + 1, pick, visit);
        pick.pop();
    }
}

/// `{ a : f(x0) + a(h) <= f(x0 + h) for every probe h }`.
pub fn subdifferential<S: Structure>(
    f: &FunctionTable<S>,
    x0: &S::Elem,
    probes: &[S::Elem],
) -> Result<SubdifferentialRep<S::Elem>> {
    let s = f.instance();
    let DualKind::CoefficientVector(dim) = s.dual_kind() else {
        return Err(Error::UnsupportedDual);
    };
    if probes.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    let fx0 = finite_at(f, x0)?;
    let mut rep = SubdifferentialRep { x0: x0.clone(), dim, constraints: Vec::new(), forced_empty: None };
    for h in probes {
        match f.eval(&s.add(x0, h))? {
            ExtendedScalar::PlusInfinity => {}
            ExtendedScalar::MinusInfinity => {
                rep.forced_empty.get_or_insert_with(|| h.clone());
            }
            ExtendedScalar::Finite(v) => rep.constraints.push(SubgradientConstraint {
                h: h.clone(),
                row: s.coordinates(h).ok_or(Error::UnsupportedDual)?,
                rhs: v - &fx0,
            }),
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxFormulaReport<E> {
    /// `f_{x0}(x0) + f_{x0}(-x0)`.
    pub hypothesis_sum: ExtendedScalar,
    pub lhs: DirectionalDerivativeReport<E>,
    /// `max { a(h) : a in the probed subdifferential }`.
    pub rhs: ExtendedScalar,
    pub nonempty: bool,
    pub subdifferential: SubdifferentialRep<E>,
}

impl<E> MaxFormulaReport<E> {
    pub fn holds(&self) -> bool {
        self.nonempty && self.lhs.infimum == self.rhs
    }
}

/// `f_{x0}(h) = max { a(h) : a in ∂f(x0) }`, both sides computed exactly.
pub fn max_formula_check<S: Structure>(
    f: &FunctionTable<S>,
    x0: &S::Elem,
    h: &S::Elem,
    probes: &[S::Elem],
    schedule: &[u64],
) -> Result<MaxFormulaReport<S::Elem>> {
    let s = f.instance();
    if !matches!(s.dual_kind(), DualKind::CoefficientVector(_)) {
        return Err(Error::UnsupportedDual);
    }
    if semidivisibility_prime(s).is_none() {
        return Err(Error::PreconditionFailed("instance is not declared semidivisible".into()));
    }
    let minus_x0 = s.negate(x0).ok_or_else(|| Error::PreconditionFailed("needs a group".into()))?;
    let forward = directional_derivative(f, x0, x0, schedule)?;
    let backward = directional_derivative(f, x0, &minus_x0, schedule)?;
    if !forward.stabilized || !backward.stabilized {
        return Err(Error::NotStabilized);
    }
    let hypothesis_sum = forward.infimum.add_convex(&backward.infimum);
    if hypothesis_sum > ExtendedScalar::zero() {
        return Err(Error::HypothesisFailed(format!("f_x0(x0) + f_x0(-x0) = {hypothesis_sum}")));
    }
    let lhs = directional_derivative(f, x0, h, schedule)?;
    if !lhs.stabilized {
        return Err(Error::NotStabilized);
    }
    let rep = subdifferential(f, x0, probes)?;
    let dir = s.coordinates(h).ok_or(Error::UnsupportedDual)?;
    let rhs = rep.support(&dir);
    Ok(MaxFormulaReport { hypothesis_sum, lhs, rhs, nonempty: !rep.is_empty(), subdifferential: rep })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumRuleReport<E> {
    pub composite: SubdifferentialRep<E>,
    pub f_part: SubdifferentialRep<E>,
    /// Vertices of `T*∂g(Tx0)`, pulled back by composition.
    pub pulled_back_g_vertices: Vec<Vec<Rational>>,
    /// `∂f(x0) + T*∂g(Tx0) ⊆ ∂(f + g∘T)(x0)`; `None` when either part is unbounded.
    pub inclusion: Option<bool>,
    pub core_verified: bool,
    /// Equality of both sides, checked for duals of dimension at most two
    /// under semidivisibility and the core condition.
    pub equality: Option<bool>,
}

impl<E> SumRuleReport<E> {
    pub fn holds(&self) -> bool {
        self.inclusion != Some(false) && self.equality != Some(false)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn sum_rule_check<A: Structure, B: Structure>(
    f: &FunctionTable<A>,
    g: &FunctionTable<B>,
    t: &AdditiveMap<A, B>,
    x0: &A::Elem,
    probes_f: &[A::Elem],
    probes_g: &[B::Elem],
    core_directions: &[B::Elem],
    schedule: &[u64],
) -> Result<SumRuleReport<A::Elem>> {
    if g.outside_policy() != OutsidePolicy::PlusInfinity {
        return Err(Error::PreconditionFailed("g must be +inf off its window".into()));
    }
    let (sa, sb) = (f.instance(), g.instance());
    t.spot_check(sa, sb, &f.elements().take(12).cloned().collect::<Vec<_>>())?;
    let composite_table = FunctionTable::from_fn(f.instance_arc().clone(), f.window().clone(), OutsidePolicy::PlusInfinity, |x| {
        f.eval(x)
            .unwrap_or(ExtendedScalar::PlusInfinity)
            .add_convex(&g.eval(&t.apply(x)).unwrap_or(ExtendedScalar::PlusInfinity))
    });
    let composite = subdifferential(&composite_table, x0, probes_f)?;
    let f_part = subdifferential(f, x0, probes_f)?;
    let g_part = subdifferential(g, &t.apply(x0), probes_g)?;

    let polytopes = (f_part.is_bounded() && g_part.is_bounded())
        .then(|| -> Result<_> { Ok((f_part.vertices()?, g_part.vertices()?)) })
        .transpose()?;
    let mut pulled_back_g_vertices = Vec::new();
    let mut sums = Vec::new();
    if let Some((fv, gv)) = &polytopes {
        for v in gv {
            pulled_back_g_vertices.push(t.pullback(sa, sb, &AdditiveWitness::new(v.clone()))?.coefficients);
        }
        for u in fv {
            for w in &pulled_back_g_vertices {
                sums.push(u.iter().zip(w).map(|(a, b)| a + b).collect::<Vec<Rational>>());
            }
        }
    }
    let inclusion = polytopes.as_ref().map(|_| sums.iter().all(|v| composite.contains(v)));

    let core_verified = core_of_difference(f, g, t, core_directions, schedule);
    let semidivisible = semidivisibility_prime(sa).is_some() && semidivisibility_prime(sb).is_some();
    let equality = if core_verified && semidivisible && composite.dim <= 2 && polytopes.is_some() && composite.is_bounded() {
        let mut covered = true;
        for v in composite.vertices()? {
            if !matches!(rational_hull_membership(&v, &sums)?, RationalHullMembership::Inside { .. }) {
                covered = false;
                break;
            }
        }
        Some(inclusion == Some(true) && covered)
    } else {
        None
    };
    Ok(SumRuleReport { composite, f_part, pulled_back_g_vertices, inclusion, core_verified, equality })
}
