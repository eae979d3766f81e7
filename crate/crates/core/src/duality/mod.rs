//! Additive duals, conjugates, subdifferentials, directional derivatives and
//! the separation machinery, all through exact linear feasibility.

mod derivative;
mod separation;

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{DualKind, Structure};
use crate::error::{Error, Result};
use crate::functions::FunctionTable;
use crate::linear::matrix::dot;
use crate::linear::simplex::{maximize, LpOutcome};
use crate::scalar::{ExtendedScalar, Rational};

pub use derivative::{
    derivative_laws_check, directional_derivative, directional_derivative_sublinear, max_formula_check,
    subdifferential, sum_rule_check, DerivativeLawsReport, DirectionalDerivativeReport, MaxFormulaReport,
    SubdifferentialRep, SubgradientConstraint, SumRuleReport,
};
pub use separation::{
    hahn_banach_extend, interpolation_refine_step, kaufman_witness, sandwich_witness, separate_sets,
    stone_partition, ExtensionOutcome, InterpolationSide, KaufmanOutcome, SandwichCertificate, SandwichOutcome,
};

/// The additive dual of an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualSpaceDescriptor {
    pub instance: String,
    pub representation: DualKind,
}

pub fn dual_space<S: Structure + ?Sized>(s: &S) -> Result<DualSpaceDescriptor> {
    match s.dual_kind() {
        DualKind::Unsupported => Err(Error::UnsupportedDual),
        representation => Ok(DualSpaceDescriptor { instance: s.name(), representation }),
    }
}

/// An additive map `X -> R`: a dot product with the coordinates, or zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditiveWitness {
    #[serde(with = "crate::scalar::serde_rational_vec")]
    pub coefficients: Vec<Rational>,
}

impl AdditiveWitness {
    pub fn new(coefficients: Vec<Rational>) -> Self {
        Self { coefficients }
    }

    /// The zero functional of the given dual.
    pub fn zero(kind: DualKind) -> Self {
        match kind {
            DualKind::CoefficientVector(d) => Self::new(vec![Rational::zero(); d]),
            _ => Self::new(Vec::new()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(Zero::is_zero)
    }

    /// Fails with [`Error::UnsupportedDual`] when the witness does not fit the instance.
    pub fn eval<S: Structure + ?Sized>(&self, s: &S, x: &S::Elem) -> Result<Rational> {
        match s.dual_kind() {
            DualKind::CoefficientVector(d) if d == self.coefficients.len() => {
                let c = s.coordinates(x).ok_or(Error::UnsupportedDual)?;
                Ok(dot(&self.coefficients, &c))
            }
            DualKind::TriviallyZero if self.is_zero() => Ok(Rational::zero()),
            _ => Err(Error::UnsupportedDual),
        }
    }

    /// Spot-checks `w(x + y) = w(x) + w(y)` on all pairs of `elems`.
    pub fn check_additive<S: Structure + ?Sized>(&self, s: &S, elems: &[S::Elem]) -> Result<()> {
        for (i, x) in elems.iter().enumerate() {
            for y in &elems[i..] {
                if self.eval(s, &s.add(x, y))? != self.eval(s, x)? + self.eval(s, y)? {
                    return Err(Error::NotAdditive(format!("{} + {}", s.encode(x), s.encode(y))));
                }
            }
        }
        Ok(())
    }
}

/// `x ↦ +inf` on `plus_region`, `-inf` on `minus_region`, `a(x) + c` elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedAffineWitness<E> {
    pub linear: AdditiveWitness,
    pub offset: Rational,
    pub plus_region: Vec<E>,
    pub minus_region: Vec<E>,
}

impl<E: Clone + Ord> GeneralizedAffineWitness<E> {
    pub fn affine(linear: AdditiveWitness, offset: Rational) -> Self {
        Self { linear, offset, plus_region: Vec::new(), minus_region: Vec::new() }
    }

    pub fn with_regions(linear: AdditiveWitness, offset: Rational, plus: Vec<E>, minus: Vec<E>) -> Result<Self> {
        if plus.iter().any(|x| minus.contains(x)) {
            return Err(Error::PreconditionFailed("infinite regions overlap".into()));
        }
        Ok(Self { linear, offset, plus_region: plus, minus_region: minus })
    }

    pub fn eval<S: Structure<Elem = E> + ?Sized>(&self, s: &S, x: &E) -> Result<ExtendedScalar> {
        if self.plus_region.iter().any(|p| s.same(p, x)) {
            return Ok(ExtendedScalar::PlusInfinity);
        }
        if self.minus_region.iter().any(|p| s.same(p, x)) {
            return Ok(ExtendedScalar::MinusInfinity);
        }
        Ok(ExtendedScalar::Finite(self.linear.eval(s, x)? + &self.offset))
    }
}

/// An additive map `T: A -> B`, applied by composition.
pub struct AdditiveMap<A: Structure, B: Structure> {
    label: String,
    map: Arc<dyn Fn(&A::Elem) -> B::Elem + Send + Sync>,
}

impl<A: Structure, B: Structure> Clone for AdditiveMap<A, B> {
    fn clone(&self) -> Self {
        Self { label: self.label.clone(), map: Arc::clone(&self.map) }
    }
}

impl<A: Structure, B: Structure> fmt::Debug for AdditiveMap<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AdditiveMap({})", self.label)
    }
}

impl<A: Structure, B: Structure> AdditiveMap<A, B> {
    pub fn new(label: impl Into<String>, map: impl Fn(&A::Elem) -> B::Elem + Send + Sync + 'static) -> Self {
        Self { label: label.into(), map: Arc::new(map) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, x: &A::Elem) -> B::Elem {
        (self.map)(x)
    }

    /// Checks `T(0) = 0` and `T(x + y) = T(x) + T(y)` on all pairs of `elems`.
    pub fn spot_check(&self, a: &A, b: &B, elems: &[A::Elem]) -> Result<()> {
        if !b.same(&self.apply(&a.zero()), &b.zero()) {
            return Err(Error::NotAdditive("T(0) != 0".into()));
        }
        for (i, x) in elems.iter().enumerate() {
            for y in &elems[i..] {
                if !b.same(&self.apply(&a.add(x, y)), &b.add(&self.apply(x), &self.apply(y))) {
                    return Err(Error::NotAdditive(format!("T({} + {})", a.encode(x), a.encode(y))));
                }
            }
        }
        Ok(())
    }

    /// `T*φ = φ ∘ T`, read off on the unit coordinate vectors of `A`.
    pub fn pullback(&self, a: &A, b: &B, phi: &AdditiveWitness) -> Result<AdditiveWitness> {
        match a.dual_kind() {
            DualKind::CoefficientVector(d) => {
                let mut coefficients = Vec::with_capacity(d);
                for j in 0..d {
                    let mut e = vec![Rational::zero(); d];
                    e[j] = Rational::from_integer(1.into());
                    let x = a.from_coordinates(&e).ok_or(Error::UnsupportedDual)?;
                    coefficients.push(phi.eval(b, &self.apply(&x))?);
                }
                Ok(AdditiveWitness::new(coefficients))
            }
            DualKind::TriviallyZero => Ok(AdditiveWitness::zero(DualKind::TriviallyZero)),
            DualKind::Unsupported => Err(Error::UnsupportedDual),
        }
    }
}

impl<A: Structure> AdditiveMap<A, A> {
    pub fn identity() -> Self {
        Self::new("identity", |x: &A::Elem| x.clone())
    }
}

fn require_plus_infinity<S: Structure>(f: &FunctionTable<S>) -> Result<()> {
    match f.outside_policy() {
        crate::functions::OutsidePolicy::PlusInfinity => Ok(()),
        _ => Err(Error::PreconditionFailed("table must be +inf off its window".into())),
    }
}

/// `f*(φ) = sup_x φ(x) - f(x)`, taken over the window.
pub fn conjugate<S: Structure>(f: &FunctionTable<S>, phi: &AdditiveWitness) -> Result<ExtendedScalar> {
    Ok(conjugate_with_argmax(f, phi)?.0)
}

/// The conjugate together with a window point attaining it, when finite.
pub fn conjugate_with_argmax<S: Structure>(
    f: &FunctionTable<S>,
    phi: &AdditiveWitness,
) -> Result<(ExtendedScalar, Option<S::Elem>)> {
    require_plus_infinity(f)?;
    let s = f.instance();
    let mut best = (ExtendedScalar::MinusInfinity, None);
    for (x, v) in f.values() {
        let term = match v {
            ExtendedScalar::PlusInfinity => continue,
            ExtendedScalar::MinusInfinity => return Ok((ExtendedScalar::PlusInfinity, Some(x.clone()))),
            ExtendedScalar::Finite(q) => ExtendedScalar::Finite(phi.eval(s, x)? - q),
        };
        if best.1.is_none() || term > best.0 {
            best = (term, Some(x.clone()));
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FenchelYoungReport {
    pub lhs: ExtendedScalar,
    pub rhs: Rational,
    pub inequality_holds: bool,
    pub equality: bool,
    /// `f(x) + φ(y - x) <= f(y)` for every window `y`.
    pub subgradient: bool,
}

impl FenchelYoungReport {
    /// The inequality, and equality exactly when `φ` is a subgradient.
    pub fn holds(&self) -> bool {
        self.inequality_holds && self.equality == self.subgradient
    }
}

/// `f(x) + f*(φ) >= φ(x)` with the equality case matched against the
/// subgradient inequality at `x`.
pub fn fenchel_young_check<S: Structure>(
    f: &FunctionTable<S>,
    phi: &AdditiveWitness,
    x: &S::Elem,
) -> Result<FenchelYoungReport> {
    let s = f.instance();
    let fx = f.eval(x)?;
    let lhs = fx.add_convex(&conjugate(f, phi)?);
    let rhs = phi.eval(s, x)?;
    let rhs_ext = ExtendedScalar::Finite(rhs.clone());
    let subgradient = match &fx {
        ExtendedScalar::Finite(q) => {
            let mut ok = true;
            for (y, fy) in f.values() {
                let shifted = ExtendedScalar::Finite(q + phi.eval(s, y)? - &rhs);
                if shifted > *fy {
                    ok = false;
                    break;
                }
            }
            ok
        }
        _ => false,
    };
    Ok(FenchelYoungReport { inequality_holds: lhs >= rhs_ext, equality: lhs == rhs_ext, lhs, rhs, subgradient })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FenchelDualityReport<E> {
    pub primal: ExtendedScalar,
    pub primal_argmin: Option<E>,
    pub dual: ExtendedScalar,
    /// Optimal `φ` on the codomain's dual, when the supremum is attained.
    pub witness: Option<AdditiveWitness>,
    /// `P - D`; `None` when both sides are the same infinity.
    pub gap: Option<ExtendedScalar>,
    pub weak_duality: bool,
    /// Every supplied direction resolved in `dom g - T dom f`.
    pub core_verified: bool,
    pub semidivisible: bool,
    /// Zero gap, checked only when the core condition and semidivisibility hold.
    pub strong_duality: Option<bool>,
}

/// `P = min f(x) + g(Tx)` against `D = sup -f*(T*φ) - g*(-φ)`, the dual
/// solved exactly as a linear program over the window constraints.
pub fn fenchel_duality<A: Structure, B: Structure>(
    f: &FunctionTable<A>,
    g: &FunctionTable<B>,
    t: &AdditiveMap<A, B>,
    core_directions: &[B::Elem],
    schedule: &[u64],
) -> Result<FenchelDualityReport<A::Elem>> {
    require_plus_infinity(f)?;
    require_plus_infinity(g)?;
    let (sa, sb) = (f.instance(), g.instance());
    t.spot_check(sa, sb, &f.elements().take(12).cloned().collect::<Vec<_>>())?;

    let mut primal = ExtendedScalar::PlusInfinity;
    let mut primal_argmin = None;
    for (x, fx) in f.values() {
        let v = fx.add_convex(&g.eval(&t.apply(x))?);
        if primal_argmin.is_none() || v < primal {
            primal = v;
            primal_argmin = Some(x.clone());
        }
    }

    let (dual, witness) = match sb.dual_kind() {
        DualKind::Unsupported => return Err(Error::UnsupportedDual),
        DualKind::TriviallyZero => {
            let zero = AdditiveWitness::zero(DualKind::TriviallyZero);
            let d = (-conjugate(f, &zero)?).add_concave(&-conjugate(g, &zero)?);
            (d, Some(zero))
        }
        DualKind::CoefficientVector(d) => dual_lp(f, g, t, d)?,
    };

    let gap = match (&primal, &dual) {
        (ExtendedScalar::PlusInfinity, ExtendedScalar::PlusInfinity)
        | (ExtendedScalar::MinusInfinity, ExtendedScalar::MinusInfinity) => None,
        _ => Some(primal.clone() - dual.clone()),
    };
    let weak_duality = primal >= dual;

    let core_verified = core_of_difference(f, g, t, core_directions, schedule);
    let semidivisible = crate::algebra::semidivisibility_prime(sa).is_some()
        && crate::algebra::semidivisibility_prime(sb).is_some();
    let strong_duality =
        (core_verified && semidivisible).then(|| gap.as_ref().is_some_and(|v| *v == ExtendedScalar::zero()));

    Ok(FenchelDualityReport {
        primal,
        primal_argmin,
        dual,
        witness,
        gap,
        weak_duality,
        core_verified,
        semidivisible,
        strong_duality,
    })
}

/// `max s + t` over `(φ, s, t)` with `s + φ(Tx) <= f(x)` and `t - φ(y) <= g(y)`.
fn dual_lp<A: Structure, B: Structure>(
    f: &FunctionTable<A>,
    g: &FunctionTable<B>,
    t: &AdditiveMap<A, B>,
    d: usize,
) -> Result<(ExtendedScalar, Option<AdditiveWitness>)> {
    let sb = g.instance();
    let one = Rational::from_integer(1.into());
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (x, fx) in f.values() {
        match fx {
            ExtendedScalar::PlusInfinity => continue,
            ExtendedScalar::MinusInfinity => return Ok((ExtendedScalar::MinusInfinity, None)),
            ExtendedScalar::Finite(q) => {
                let mut row = sb.coordinates(&t.apply(x)).ok_or(Error::UnsupportedDual)?;
                row.push(one.clone());
                row.push(Rational::zero());
                rows.push(row);
                rhs.push(q.clone());
            }
        }
    }
    for (y, gy) in g.values() {
        match gy {
            ExtendedScalar::PlusInfinity => continue,
            ExtendedScalar::MinusInfinity => return Ok((ExtendedScalar::MinusInfinity, None)),
            ExtendedScalar::Finite(q) => {
                let mut row: Vec<Rational> = sb.coordinates(y).ok_or(Error::UnsupportedDual)?.iter().map(|c| -c).collect();
                row.push(Rational::zero());
                row.push(one.clone());
                rows.push(row);
                rhs.push(q.clone());
            }
        }
    }
    let mut objective = vec![Rational::zero(); d];
    objective.push(one.clone());
    objective.push(one);
    if rows.is_empty() {
        return Ok((ExtendedScalar::PlusInfinity, None));
    }
    Ok(match maximize(&rows, &rhs, &objective) {
        LpOutcome::Optimal { x, value, .. } => {
            (ExtendedScalar::Finite(value), Some(AdditiveWitness::new(x[..d].to_vec())))
        }
        LpOutcome::Unbounded { .. } => (ExtendedScalar::PlusInfinity, None),
        LpOutcome::Infeasible { .. } => (ExtendedScalar::MinusInfinity, None),
    })
}

/// Probes `0 ∈ core(dom g - T dom f)` on the supplied directions: each must
/// have some `n` in the schedule and `z` with `n z = h` inside the difference set.
pub(crate) fn core_of_difference<A: Structure, B: Structure>(
    f: &FunctionTable<A>,
    g: &FunctionTable<B>,
    t: &AdditiveMap<A, B>,
    directions: &[B::Elem],
    schedule: &[u64],
) -> bool {
    let sb = g.instance();
    let dom_g = g.effective_domain();
    let mut differences = std::collections::BTreeSet::new();
    for x in f.effective_domain() {
        if let Some(m) = sb.negate(&t.apply(&x)) {
            for y in &dom_g {
                differences.insert(sb.add(y, &m));
            }
        }
    }
    !directions.is_empty()
        && directions
            .iter()
            .all(|h| schedule.iter().any(|&n| sb.divide(h, n).iter().any(|z| differences.contains(z))))
}
