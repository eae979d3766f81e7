//! Value functions of constrained problems, Lagrangian bounds and the
//! subdifferential of a pointwise maximum.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::algebra::{semidivisibility_prime, Divisibility, DualKind, Structure};
use crate::duality::{subdifferential, SubdifferentialRep};
use crate::error::{Error, Result};
use crate::functions::{check_homogeneity, check_subadditive, pointwise_max, probe_core, FunctionTable};
use crate::hull::{rational_hull_membership, RationalHullMembership};
use crate::scalar::{ExtendedScalar, Rational};

/// `inf f(x)` subject to `g_i(x) <= b_i`, over a shared window.
#[derive(Clone, Debug)]
pub struct ConstrainedProblem<S: Structure> {
    objective: FunctionTable<S>,
    constraints: Vec<FunctionTable<S>>,
}

impl<S: Structure> ConstrainedProblem<S> {
    pub fn new(objective: FunctionTable<S>, constraints: Vec<FunctionTable<S>>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::PreconditionFailed("at least one constraint is required".into()));
        }
        if constraints.iter().any(|g| !g.shares_window(&objective)) {
            return Err(Error::WindowMismatch);
        }
        Ok(Self { objective, constraints })
    }

    pub fn objective(&self) -> &FunctionTable<S> {
        &self.objective
    }

    pub fn constraints(&self) -> &[FunctionTable<S>] {
        &self.constraints
    }

    pub fn arity(&self) -> usize {
        self.constraints.len()
    }

    fn check_rhs(&self, b: &[Rational]) -> Result<()> {
        if b.len() == self.arity() {
            Ok(())
        } else {
            Err(Error::PreconditionFailed(format!("rhs has {} entries, expected {}", b.len(), self.arity())))
        }
    }

    pub fn is_feasible(&self, x: &S::Elem, b: &[Rational]) -> bool {
        self.constraints
            .iter()
            .zip(b)
            .all(|(g, bi)| g.value(x).is_some_and(|v| *v <= ExtendedScalar::Finite(bi.clone())))
    }

    /// `v(b)` with a minimiser, by enumeration of the window.
    pub fn value_at(&self, b: &[Rational]) -> Result<ValueEntry<S::Elem>> {
        self.check_rhs(b)?;
        let mut best: Option<(ExtendedScalar, S::Elem)> = None;
        for (x, fx) in self.objective.values() {
            if self.is_feasible(x, b) && best.as_ref().is_none_or(|(v, _)| fx < v) {
                best = Some((fx.clone(), x.clone()));
            }
        }
        let feasible = best.is_some();
        let (value, argmin) = match best {
            Some((v, x)) => (v, Some(x)),
            None => (ExtendedScalar::PlusInfinity, None),
        };
        Ok(ValueEntry { rhs: b.to_vec(), value, feasible, argmin })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueEntry<E> {
    #[serde(with = "crate::scalar::serde_rational_vec")]
    pub rhs: Vec<Rational>,
    pub value: ExtendedScalar,
    pub feasible: bool,
    pub argmin: Option<E>,
}

/// `b ↦ v(b)` on a grid of right-hand sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueFunctionTable<E> {
    pub entries: Vec<ValueEntry<E>>,
    /// The window does not cover the carrier, so values are infima over the
    /// window only and may differ from the true value function.
    pub window_relative: bool,
}

impl<E: Clone> ValueFunctionTable<E> {
    pub fn get(&self, b: &[Rational]) -> Option<&ExtendedScalar> {
        self.entries.iter().find(|e| e.rhs == b).map(|e| &e.value)
    }

    /// `b <= b'` componentwise implies `v(b') <= v(b)`.
    pub fn is_monotone(&self) -> bool {
        self.entries.iter().all(|e| {
            self.entries
                .iter()
                .filter(|o| o.rhs.iter().zip(&e.rhs).all(|(a, b)| a >= b))
                .all(|o| o.value <= e.value)
        })
    }
}

pub fn value_function<S: Structure>(p: &ConstrainedProblem<S>, grid: &[Vec<Rational>]) -> Result<ValueFunctionTable<S::Elem>> {
    let entries = grid.iter().map(|b| p.value_at(b)).collect::<Result<_>>()?;
    Ok(ValueFunctionTable { entries, window_relative: !p.objective.covers_carrier() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ValueViolation {
    Subadditivity {
        #[serde(with = "crate::scalar::serde_rational_vec")]
        b: Vec<Rational>,
        #[serde(with = "crate::scalar::serde_rational_vec")]
        c: Vec<Rational>,
        lhs: ExtendedScalar,
        rhs: ExtendedScalar,
    },
    Homogeneity {
        #[serde(with = "crate::scalar::serde_rational_vec")]
        b: Vec<Rational>,
        p: u64,
        lhs: ExtendedScalar,
        rhs: ExtendedScalar,
    },
}

/// One law: whether its hypotheses held, and what was observed on the grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawVerdict {
    /// `None` when the hypotheses were verified, else the failed hypothesis.
    pub hypothesis_failure: Option<String>,
    pub checks: usize,
    pub violation: Option<ValueViolation>,
}

impl LawVerdict {
    pub fn observed_holds(&self) -> bool {
        self.violation.is_none()
    }

    /// A violation under verified hypotheses would contradict the law.
    pub fn consistent(&self) -> bool {
        self.hypothesis_failure.is_some() || self.violation.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueLawsReport {
    pub subadditivity: LawVerdict,
    pub homogeneity: Option<LawVerdict>,
}

fn add_vec(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Subadditivity of `v` on grid pairs and, given `p`, `v(p b) = p v(b)`.
pub fn value_function_laws<S: Structure>(
    problem: &ConstrainedProblem<S>,
    grid: &[Vec<Rational>],
    p: Option<u64>,
) -> Result<ValueLawsReport> {
    let table = value_function(problem, grid)?;
    let index: BTreeMap<&Vec<Rational>, &ExtendedScalar> = table.entries.iter().map(|e| (&e.rhs, &e.value)).collect();
    let tables = || std::iter::once(&problem.objective).chain(&problem.constraints);

    let sub_hyp = tables()
        .all(|t| check_subadditive(t).holds())
        .then_some(())
        .map_or(Some("objective and constraints must be subadditive".to_string()), |_| None);
    let mut checks = 0;
    let mut violation = None;
    'outer: for (i, b) in grid.iter().enumerate() {
        for c in &grid[i..] {
            let Some(lhs) = index.get(&add_vec(b, c)) else { continue };
            checks += 1;
            let rhs = index[b].add_convex(index[c]);
            if **lhs > rhs {
                violation = Some(ValueViolation::Subadditivity { b: b.clone(), c: c.clone(), lhs: (*lhs).clone(), rhs });
                break 'outer;
            }
        }
    }
    let subadditivity = LawVerdict { hypothesis_failure: sub_hyp, checks, violation };

    let homogeneity = p.map(|p| {
        let s = problem.objective.instance();
        let hyp = if s.declared_divisibility(p) != Divisibility::Divisible {
            Some(format!("the instance is not declared {p}-divisible"))
        } else if !tables().all(|t| check_homogeneity(t, [p]).holds()) {
            Some(format!("objective and constraints must satisfy h(px) = p h(x) for p = {p}"))
        } else {
            None
        };
        let scale = Rational::from_integer((p as i64).into());
        let mut checks = 0;
        let mut violation = None;
        for b in grid {
            let pb: Vec<Rational> = b.iter().map(|v| v * &scale).collect();
            let Some(lhs) = index.get(&pb) else { continue };
            checks += 1;
            let rhs = index[b].scale(p);
            if **lhs != rhs {
                violation = Some(ValueViolation::Homogeneity { b: b.clone(), p, lhs: (*lhs).clone(), rhs });
                break;
            }
        }
        LawVerdict { hypothesis_failure: hyp, checks, violation }
    });
    Ok(ValueLawsReport { subadditivity, homogeneity })
}

/// `L(x, λ) = f(x) + λ · (g(x) - b)`.
pub fn lagrangian<S: Structure>(
    problem: &ConstrainedProblem<S>,
    b: &[Rational],
    x: &S::Elem,
    lambda: &[Rational],
) -> Result<ExtendedScalar> {
    problem.check_rhs(b)?;
    if lambda.len() != problem.arity() {
        return Err(Error::PreconditionFailed("multiplier length differs from the number of constraints".into()));
    }
    if lambda.iter().any(Signed::is_negative) {
        return Err(Error::NegativeMultiplier);
    }
    let mut total = problem.objective.eval(x)?;
    for ((g, bi), l) in problem.constraints.iter().zip(b).zip(lambda) {
        let slack = g.eval(x)? - ExtendedScalar::Finite(bi.clone());
        let term = if l.is_zero() { slack.scale(0) } else { slack.scale_rational(l) };
        total = total.add_convex(&term);
    }
    Ok(total)
}

/// `inf_x L(x, λ)` for one multiplier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScannedMultiplier {
    #[serde(with = "crate::scalar::serde_rational_vec")]
    pub lambda: Vec<Rational>,
    pub bound: ExtendedScalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LagrangianReport {
    #[serde(with = "crate::scalar::serde_rational_vec")]
    pub lambda: Vec<Rational>,
    /// `inf_x L(x, λ)` over the window for the best multiplier.
    pub bound: ExtendedScalar,
    pub primal: ExtendedScalar,
    /// `v(b0) - bound`; `None` when both are the same infinity.
    pub gap: Option<ExtendedScalar>,
    pub exact: bool,
    pub scanned: Vec<ScannedMultiplier>,
    pub window_relative: bool,
}

/// Scans the multiplier grid for the best Lagrangian lower bound on `v(b0)`.
pub fn find_multiplier<S: Structure>(
    problem: &ConstrainedProblem<S>,
    b0: &[Rational],
    lambda_grid: &[Vec<Rational>],
) -> Result<LagrangianReport> {
    if lambda_grid.is_empty() {
        return Err(Error::PreconditionFailed("empty multiplier grid".into()));
    }
    let primal = problem.value_at(b0)?.value;
    let mut scanned = Vec::with_capacity(lambda_grid.len());
    for lambda in lambda_grid {
        let mut inf = ExtendedScalar::PlusInfinity;
        for x in problem.objective.elements() {
            inf = inf.min(lagrangian(problem, b0, x, lambda)?);
        }
        scanned.push(ScannedMultiplier { lambda: lambda.clone(), bound: inf });
    }
    let best = scanned
        .iter()
        .fold(None::<&ScannedMultiplier>, |best, cur| match best {
            Some(b) if b.bound >= cur.bound => Some(b),
            _ => Some(cur),
        })
        .expect("nonempty grid");
    let (lambda, bound) = (best.lambda.clone(), best.bound.clone());
    let gap = match (&primal, &bound) {
        (ExtendedScalar::PlusInfinity, ExtendedScalar::PlusInfinity)
        | (ExtendedScalar::MinusInfinity, ExtendedScalar::MinusInfinity) => None,
        _ => Some(primal.clone() - bound.clone()),
    };
    let exact = gap.as_ref().is_some_and(|g| *g == ExtendedScalar::zero());
    Ok(LagrangianReport { lambda, bound, primal, gap, exact, scanned, window_relative: !problem.objective.covers_carrier() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdiffMaxReport<E> {
    /// Indices with `f_i(x0) = max_j f_j(x0)`.
    pub active: Vec<usize>,
    pub of_max: SubdifferentialRep<E>,
    pub parts: Vec<SubdifferentialRep<E>>,
    /// Every vertex of every active part lies in the subdifferential of the max.
    pub parts_inside: Option<bool>,
    /// Every vertex of the max's subdifferential lies in the hull of the parts.
    pub covered_by_hull: Option<bool>,
}

impl<E> SubdiffMaxReport<E> {
    /// Exact equality, when it could be decided.
    pub fn equality(&self) -> Option<bool> {
        Some(self.parts_inside? && self.covered_by_hull?)
    }
}

/// `∂(max f_i)(x0) = conv ⋃_{i active} ∂f_i(x0)`, compared exactly through
/// vertex enumeration and rational hull membership.
pub fn subdiff_of_max_check<S: Structure>(
    fs: &[FunctionTable<S>],
    x0: &S::Elem,
    probes: &[S::Elem],
    schedule: &[u64],
) -> Result<SubdiffMaxReport<S::Elem>> {
    let max = pointwise_max(fs)?;
    let s = max.instance();
    let DualKind::CoefficientVector(dim) = s.dual_kind() else {
        return Err(Error::UnsupportedDual);
    };
    if semidivisibility_prime(s).is_none() {
        return Err(Error::PreconditionFailed("instance is not declared semidivisible".into()));
    }
    let top = max.eval(x0)?;
    if !top.is_finite() {
        return Err(Error::PreconditionFailed("max is not finite at x0".into()));
    }
    let active: Vec<usize> = (0..fs.len()).filter(|&i| fs[i].eval(x0).is_ok_and(|v| v == top)).collect();
    for &i in &active {
        if !probe_core(&fs[i], x0, probes, schedule).in_core() {
            return Err(Error::PreconditionFailed(format!("x0 is not in the probed core of the domain of f_{i}")));
        }
    }
    let of_max = subdifferential(&max, x0, probes)?;
    let parts = active.iter().map(|&i| subdifferential(&fs[i], x0, probes)).collect::<Result<Vec<_>>>()?;

    let decidable = dim <= 3 && of_max.is_bounded() && parts.iter().all(SubdifferentialRep::is_bounded);
    let (parts_inside, covered_by_hull) = if decidable {
        let mut part_vertices = Vec::new();
        for p in &parts {
            part_vertices.extend(p.vertices()?);
        }
        let inside = part_vertices.iter().all(|v| of_max.contains(v));
        let mut covered = true;
        for v in of_max.vertices()? {
            if !matches!(rational_hull_membership(&v, &part_vertices)?, RationalHullMembership::Inside { .. }) {
                covered = false;
                break;
            }
        }
        (Some(inside), Some(covered))
    } else {
        (None, None)
    };
    Ok(SubdiffMaxReport { active, of_max, parts, parts_inside, covered_by_hull })
}
