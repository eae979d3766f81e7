//! One runner per command, generic over the instance.
//!
//! Each runner returns the report body and, when a stored report is given,
//! the results of replaying that report's certificates against the inputs.

use std::iter;

use serde_json::{json, Value};

use monoconv::duality::{
    conjugate, conjugate_with_argmax, directional_derivative, directional_derivative_sublinear, fenchel_duality,
    fenchel_young_check, hahn_banach_extend, sandwich_witness, subdifferential, AdditiveMap, AdditiveWitness,
    ExtensionOutcome, SandwichOutcome, SubdifferentialRep,
};
use monoconv::functions::{
    check_convex, check_homogeneity, check_n_sublinear, check_subadditive, classify_generalised_affine,
    AffineClassification, ClassVerdict, FunctionTable,
};
use monoconv::hull::{self, HullStrategy, MembershipVerdict};
use monoconv::io::parse_window;
use monoconv::linear::simplex::verify_infeasibility;
use monoconv::optimize::{self, ConstrainedProblem};
use monoconv::{nth_multiple, Bounds, DivisibilityProbe, DualKind, Error, ExtendedScalar, Rational, Structure};

use crate::encode::*;
use crate::report::{usage, CliResult};

pub struct Outcome {
    pub verdict: Value,
    pub certificates: Value,
    pub truncation: Value,
    pub replay: Vec<(String, bool)>,
}

impl Outcome {
    fn new(verdict: Value, certificates: Value, truncation: Value) -> Self {
        Self { verdict, certificates, truncation, replay: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.replay.push((name.into(), ok));
    }

    /// Runs `f` on the stored certificates; a decoding failure counts as a failed check.
    fn replay_with(&mut self, stored: Option<&Value>, name: &str, f: impl FnOnce(&Value) -> monoconv::Result<bool>) {
        if let Some(c) = stored {
            let ok = f(c).unwrap_or(false);
            self.check(name, ok);
        }
    }
}

fn items(v: &Value) -> &[Value] {
    v.as_array().map_or(&[], Vec::as_slice)
}

fn resolve<S: Structure + ?Sized>(s: &S, strategy: HullStrategy) -> HullStrategy {
    match strategy {
        HullStrategy::Auto if s.is_group() && s.exponent().is_some() && s.full_window().is_some() => HullStrategy::Finite,
        HullStrategy::Auto if s.lattice_coordinates(&s.zero()).is_some() => HullStrategy::Lattice,
        HullStrategy::Auto => HullStrategy::Fixpoint,
        other => other,
    }
}

/// The window an exact strategy runs in when none is given: the whole
/// carrier for finite groups, the bounding box of the set for lattices.
fn window_for<S: Structure>(
    s: &S,
    strategy: HullStrategy,
    elems: &[S::Elem],
    window: Option<&Value>,
    bounds: Option<Bounds>,
) -> CliResult<(S::Window, Bounds)> {
    let resolved = resolve(s, strategy);
    if resolved == HullStrategy::Fixpoint && (window.is_none() || bounds.is_none()) {
        return usage("the fixpoint strategy needs --window, --bounds-terms and --bounds-coeff");
    }
    let bounds = bounds.unwrap_or(Bounds::new(0, 0));
    if let Some(w) = window {
        return Ok((parse_window::<S>(w)?, bounds));
    }
    let w = match resolved {
        HullStrategy::Finite => s.full_window(),
        _ => {
            let zero = s.zero();
            let pts: Option<Vec<Vec<i64>>> = elems.iter().chain(iter::once(&zero)).map(|x| s.lattice_coordinates(x)).collect();
            match pts {
                Some(pts) => {
                    let d = pts[0].len();
                    let lo: Vec<i64> = (0..d).map(|i| pts.iter().map(|p| p[i]).min().unwrap()).collect();
                    let hi: Vec<i64> = (0..d).map(|i| pts.iter().map(|p| p[i]).max().unwrap()).collect();
                    Some(parse_window::<S>(&json!({ "lo": lo, "hi": hi }))?)
                }
                None => None,
            }
        }
    };
    match w {
        Some(w) => Ok((w, bounds)),
        None => usage("this strategy needs --window"),
    }
}

pub fn hull<S: Structure>(
    s: &S,
    set: &[S::Elem],
    strategy: HullStrategy,
    window: Option<&Value>,
    bounds: Option<Bounds>,
) -> CliResult<Outcome> {
    let (window, bounds) = window_for(s, strategy, set, window, bounds)?;
    let r = hull::hull(s, set, strategy, bounds, &window)?;
    let verdict = json!({
        "hull": s.encode_all(&r.hull),
        "size": r.hull.len(),
        "method": r.method,
        "certified": r.certified,
    });
    Ok(Outcome::new(verdict, json!([]), json!(r.truncation)))
}

pub fn member<S: Structure>(
    s: &S,
    set: &[S::Elem],
    x: &S::Elem,
    strategy: HullStrategy,
    window: Option<&Value>,
    bounds: Option<Bounds>,
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let (window, bounds) = window_for(s, strategy, set, window, bounds)?;
    let resolved = resolve(s, strategy);
    let (verdict, certs) = match hull::member(s, x, set, strategy, bounds, &window)? {
        MembershipVerdict::Member(c) => ("member", json!([{ "kind": "relation", "residual": s.encode(x), "combination": comb(s, &c) }])),
        MembershipVerdict::NonMemberCertified => ("non_member_certified", json!([])),
        MembershipVerdict::UnknownWithinBounds => ("unknown_within_bounds", json!([])),
    };
    let truncation = if resolved == HullStrategy::Fixpoint { json!(bounds) } else { Value::Null };
    let mut out = Outcome::new(json!({ "point": s.encode(x), "verdict": verdict }), certs, truncation);
    out.replay_with(stored, "relation replays", |c| {
        for cert in items(c) {
            let combination = decode_comb(s, cert.get("combination").unwrap_or(&Value::Null))?;
            let residual = get_elem(s, cert, "residual")?;
            if !monoconv::algebra::relation_holds(s, &combination, &residual) || !s.same(&residual, x) {
                return Ok(false);
            }
        }
        Ok(true)
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FunctionClass {
    Convex,
    Subadditive,
    Homogeneous,
    Sublinear,
    Affine,
}

fn class_verdict<S: Structure>(s: &S, v: &ClassVerdict<S::Elem>, of: &str) -> (Value, Vec<Value>, Value) {
    match v {
        ClassVerdict::HoldsWithinBounds { bounds, checks, off_window_skipped } => (
            json!({ "holds": true, "checks": checks, "off_window_skipped": off_window_skipped }),
            vec![],
            json!(bounds),
        ),
        ClassVerdict::Fails { certificate, bounds } => {
            let mut cert = violation(s, certificate);
            cert["of"] = json!(of);
            (json!({ "holds": false }), vec![cert], json!(bounds))
        }
    }
}

pub fn check<S: Structure>(
    f: &FunctionTable<S>,
    class: FunctionClass,
    bounds: Option<Bounds>,
    ns: &[u64],
    p_power: Option<u64>,
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let s = f.instance();
    let need_bounds = || bounds.ok_or(()).or_else(|_| usage("this class needs --bounds-terms and --bounds-coeff"));
    let need_ns = || if ns.is_empty() { usage("this class needs --n") } else { Ok(()) };
    let (mut verdict, certs, truncation) = match class {
        FunctionClass::Convex => class_verdict(s, &check_convex(f, need_bounds()?, p_power), "f"),
        FunctionClass::Subadditive => class_verdict(s, &check_subadditive(f), "f"),
        FunctionClass::Homogeneous => {
            need_ns()?;
            class_verdict(s, &check_homogeneity(f, ns.iter().copied()), "f")
        }
        FunctionClass::Sublinear => {
            need_ns()?;
            class_verdict(s, &check_n_sublinear(f, ns.iter().copied().max().unwrap()), "f")
        }
        FunctionClass::Affine => {
            let b = need_bounds()?;
            match classify_generalised_affine(f, b)? {
                AffineClassification::Class(c) => (json!({ "holds": true, "classification": c }), vec![], json!(b)),
                AffineClassification::NotGeneralisedAffine { convex, concave } => {
                    let mut certs = class_verdict(s, &convex, "f").1;
                    certs.extend(class_verdict(s, &concave, "-f").1);
                    (json!({ "holds": false, "classification": "not_generalised_affine" }), certs, json!(b))
                }
                AffineClassification::TrichotomyViolated { finite_at, infinite_at } => (
                    json!({
                        "holds": false, "classification": "trichotomy_violated",
                        "finite_at": s.encode(&finite_at), "infinite_at": s.encode(&infinite_at),
                    }),
                    vec![],
                    json!(b),
                ),
            }
        }
    };
    verdict["class"] = serde_json::to_value(format!("{class:?}").to_lowercase()).unwrap();
    let mut out = Outcome::new(verdict, Value::Array(certs), truncation);
    out.replay_with(stored, "violations replay", |c| {
        for cert in items(c) {
            let v = decode_violation(s, cert)?;
            let table = if get_str(cert, "of")? == "-f" { f.negated() } else { f.clone() };
            if !v.replay(&table) {
                return Ok(false);
            }
        }
        Ok(true)
    });
    Ok(out)
}

pub fn probe<S: Structure>(s: &S, n: u64, window: &S::Window, stored: Option<&Value>) -> CliResult<Outcome> {
    if n == 0 {
        return usage("--n must be at least 1");
    }
    let declared = s.declared_divisibility(n);
    let (probe, certs) = match monoconv::probe_divisibility(s, n, window) {
        DivisibilityProbe::Divisible => ("divisible", json!([])),
        DivisibilityProbe::NotDivisible(y) => ("not_divisible", json!([{ "kind": "no_solution", "n": n, "y": s.encode(&y) }])),
        DivisibilityProbe::UnknownWithinWindow => ("unknown_within_window", json!([])),
    };
    let mut out = Outcome::new(json!({ "n": n, "declared": declared, "probe": probe }), certs, json!({ "sample": window }));
    out.replay_with(stored, "witnesses have no n-th part", |c| {
        for cert in items(c) {
            let y = get_elem(s, cert, "y")?;
            if get_u64(cert, "n")? != n || !s.window_contains(window, &y) || !s.divide(&y, n).is_empty() {
                return Ok(false);
            }
        }
        Ok(true)
    });
    Ok(out)
}

pub fn deriv<S: Structure>(
    f: &FunctionTable<S>,
    x: &S::Elem,
    h: &S::Elem,
    schedule: &[u64],
    sublinear: bool,
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let s = f.instance();
    let r = if sublinear {
        directional_derivative_sublinear(f, x, h, schedule)?
    } else {
        directional_derivative(f, x, h, schedule)?
    };
    let per_n: Vec<Value> = r.per_n().iter().map(|(n, v)| json!([n, ext(v)])).collect();
    let samples: Vec<Value> =
        r.samples.iter().map(|(n, g, v)| json!({ "n": n, "g": s.encode(g), "value": ext(v) })).collect();
    let verdict = json!({ "infimum": ext(&r.infimum), "stabilized": r.stabilized, "per_n": per_n });
    let mut out = Outcome::new(verdict, Value::Array(samples), json!({ "schedule": schedule }));
    out.replay_with(stored, "samples replay", |c| {
        let fx = f.eval(x)?;
        let mut min = ExtendedScalar::PlusInfinity;
        for cert in items(c) {
            let (n, g, v) = (get_u64(cert, "n")?, get_elem(s, cert, "g")?, get_ext(cert, "value")?);
            if !sublinear {
                let expect = (f.eval(&s.add(x, &g))? - fx.clone()).scale(n);
                if !s.same(&nth_multiple(s, &g, n), h) || expect != v {
                    return Ok(false);
                }
            }
            min = min.min(v);
        }
        Ok(min == r.infimum)
    });
    Ok(out)
}

fn vertices_json<E: Clone>(rep: &SubdifferentialRep<E>) -> monoconv::Result<Value> {
    if rep.is_empty() {
        return Ok(json!([]));
    }
    if rep.dim > 3 || !rep.is_bounded() {
        return Ok(Value::Null);
    }
    Ok(Value::Array(rep.vertices()?.iter().map(|v| qs(v)).collect()))
}

fn subdiff_json<S: Structure>(s: &S, rep: &SubdifferentialRep<S::Elem>) -> monoconv::Result<(Value, Value)> {
    let mut verdict = json!({
        "dim": rep.dim,
        "empty": rep.is_empty(),
        "bounded": rep.is_bounded(),
        "vertices": vertices_json(rep)?,
        "forced_empty": rep.forced_empty.as_ref().map(|x| s.encode(x)),
    });
    if rep.dim == 1 {
        let iv = rep.interval().map(|(lo, hi)| json!([lo.as_ref().map(q), hi.as_ref().map(q)]));
        verdict["interval"] = iv.unwrap_or(Value::Null);
    }
    let certs = rep
        .constraints
        .iter()
        .map(|c| json!({ "h": s.encode(&c.h), "row": qs(&c.row), "rhs": q(&c.rhs) }))
        .collect();
    Ok((verdict, Value::Array(certs)))
}

pub fn subdiff<S: Structure>(
    f: &FunctionTable<S>,
    x0: &S::Elem,
    probes: &[S::Elem],
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let s = f.instance();
    let rep = subdifferential(f, x0, probes)?;
    let (verdict, certs) = subdiff_json(s, &rep)?;
    let mut out = Outcome::new(verdict, certs, json!({ "probes": probes.len() }));
    out.replay_with(stored, "constraints replay", |c| {
        let fx = f.eval(x0)?;
        for cert in items(c) {
            let h = get_elem(s, cert, "h")?;
            let row = get_qs(cert, "row")?;
            let rhs = ExtendedScalar::Finite(get_q(cert, "rhs")?);
            if s.coordinates(&h) != Some(row) || f.eval(&s.add(x0, &h))? - fx.clone() != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    });
    Ok(out)
}

pub fn conjugate_cmd<S: Structure>(
    f: &FunctionTable<S>,
    phi: &AdditiveWitness,
    x: Option<&S::Elem>,
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let s = f.instance();
    let (value, argmax) = conjugate_with_argmax(f, phi)?;
    let mut verdict = json!({ "phi": qs(&phi.coefficients), "value": ext(&value) });
    if let Some(x) = x {
        let fy = fenchel_young_check(f, phi, x)?;
        verdict["fenchel_young"] = json!({
            "x": s.encode(x), "lhs": ext(&fy.lhs), "rhs": q(&fy.rhs),
            "inequality_holds": fy.inequality_holds, "equality": fy.equality, "subgradient": fy.subgradient,
        });
    }
    let certs = json!({ "argmax": argmax.as_ref().map(|a| s.encode(a)) });
    let mut out = Outcome::new(verdict, certs, json!({ "window_elements": f.len() }));
    out.replay_with(stored, "argmax attains the value", |c| match c.get("argmax") {
        Some(Value::Null) | None => Ok(value == ExtendedScalar::MinusInfinity),
        Some(a) => {
            let a = s.decode(a)?;
            let attained = match f.eval(&a)? {
                ExtendedScalar::MinusInfinity => ExtendedScalar::PlusInfinity,
                fa => ExtendedScalar::Finite(phi.eval(s, &a)?) - fa,
            };
            Ok(attained == value)
        }
    });
    Ok(out)
}

pub fn duality<A: Structure, B: Structure>(
    f: &FunctionTable<A>,
    g: &FunctionTable<B>,
    t: &AdditiveMap<A, B>,
    dirs: &[B::Elem],
    schedule: &[u64],
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let (sa, sb) = (f.instance(), g.instance());
    let r = fenchel_duality(f, g, t, dirs, schedule)?;
    let verdict = json!({
        "primal": ext(&r.primal),
        "dual": ext(&r.dual),
        "gap": opt_ext(&r.gap),
        "weak_duality": r.weak_duality,
        "core_verified": r.core_verified,
        "semidivisible": r.semidivisible,
        "strong_duality": r.strong_duality,
    });
    let certs = json!({
        "primal_argmin": r.primal_argmin.as_ref().map(|x| sa.encode(x)),
        "witness": r.witness.as_ref().map(|w| qs(&w.coefficients)),
    });
    let mut out = Outcome::new(verdict, certs, json!({ "schedule": schedule }));
    out.replay_with(stored, "primal argmin attains P", |c| match c.get("primal_argmin") {
        Some(Value::Null) | None => Ok(true),
        Some(x) => {
            let x = sa.decode(x)?;
            Ok(f.eval(&x)?.add_convex(&g.eval(&t.apply(&x))?) == r.primal)
        }
    });
    out.replay_with(stored, "witness attains D", |c| match c.get("witness") {
        Some(Value::Null) | None => Ok(true),
        Some(w) => {
            let phi = AdditiveWitness::new(as_qs(w)?);
            let neg = AdditiveWitness::new(phi.coefficients.iter().map(|v| -v).collect());
            let pulled = t.pullback(sa, sb, &phi)?;
            let d = (-conjugate(f, &pulled)?).add_concave(&-conjugate(g, &neg)?);
            Ok(d == r.dual)
        }
    });
    Ok(out)
}

fn dual_coords<S: Structure + ?Sized>(s: &S, x: &S::Elem) -> monoconv::Result<Vec<Rational>> {
    match s.dual_kind() {
        DualKind::CoefficientVector(_) => s.coordinates(x).ok_or(Error::UnsupportedDual),
        DualKind::TriviallyZero => Ok(vec![]),
        DualKind::Unsupported => Err(Error::UnsupportedDual),
    }
}

pub fn sandwich<A: Structure, B: Structure>(
    f: &FunctionTable<A>,
    g: &FunctionTable<B>,
    t: &AdditiveMap<A, B>,
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let sa = f.instance();
    let (verdict, certs) = match sandwich_witness(f, g, t)? {
        SandwichOutcome::Witness { linear, offset } => (
            json!({ "outcome": "witness", "linear": qs(&linear.coefficients), "offset": q(&offset) }),
            json!({ "linear": qs(&linear.coefficients), "offset": q(&offset) }),
        ),
        SandwichOutcome::Infeasible(cert) => {
            let bound = |b: &Option<(Rational, monoconv::linear::fourier_motzkin::DerivedRow)>| {
                b.as_ref().map(|(v, r)| json!({ "value": q(v), "row": row(r) }))
            };
            let rows: Vec<Value> = cert.rows.iter().map(|(x, up)| json!({ "x": sa.encode(x), "upper": up })).collect();
            (
                json!({
                    "outcome": "infeasible_certificate",
                    "c_upper": cert.c_upper.as_ref().map(|(v, _)| q(v)),
                    "c_lower": cert.c_lower.as_ref().map(|(v, _)| q(v)),
                }),
                json!({
                    "rows": rows,
                    "matrix": cert.matrix.iter().map(|r| qs(r)).collect::<Vec<_>>(),
                    "rhs": qs(&cert.rhs),
                    "farkas": qs(&cert.farkas),
                    "c_upper": bound(&cert.c_upper),
                    "c_lower": bound(&cert.c_lower),
                    "contradiction": cert.contradiction.as_ref().map(row),
                }),
            )
        }
        SandwichOutcome::InfiniteValue { x, upper } => (
            json!({ "outcome": "infinite_value", "x": sa.encode(&x), "upper": upper }),
            json!({ "x": sa.encode(&x), "upper": upper }),
        ),
    };
    let mut out = Outcome::new(verdict, certs, json!({ "window_elements": f.len() }));
    out.replay_with(stored, "certificate replays", |c| {
        if let Some(farkas) = c.get("farkas") {
            let (matrix, rhs, pi) = (get_matrix(c, "matrix")?, get_qs(c, "rhs")?, as_qs(farkas)?);
            let mut ok = verify_infeasibility(&matrix, &rhs, &pi) && items(&c["rows"]).len() == matrix.len();
            for (i, r) in items(&c["rows"]).iter().enumerate() {
                let x = get_elem(sa, r, "x")?;
                let upper = r.get("upper").and_then(Value::as_bool).unwrap_or(false);
                let mut expect = dual_coords(sa, &x)?;
                expect.push(Rational::from_integer(1.into()));
                let value = if upper { f.eval(&x)? } else { -g.eval(&t.apply(&x))? };
                if !upper {
                    expect.iter_mut().for_each(|v| *v = -v.clone());
                }
                ok &= ok && matrix[i] == expect && ExtendedScalar::Finite(rhs[i].clone()) == value;
            }
            for key in ["c_upper", "c_lower"] {
                if let Some(b) = c.get(key).filter(|b| !b.is_null()) {
                    ok &= get_row(&b["row"])?.replays(&matrix, &rhs);
                }
            }
            if let Some(r) = c.get("contradiction").filter(|r| !r.is_null()) {
                ok &= get_row(r)?.replays(&matrix, &rhs);
            }
            Ok(ok)
        } else if c.get("linear").is_some() {
            let a = AdditiveWitness::new(get_qs(c, "linear")?);
            let offset = ExtendedScalar::Finite(get_q(c, "offset")?);
            for (x, fx) in f.values() {
                let h = ExtendedScalar::Finite(a.eval(sa, x)?) + offset.clone();
                let below = g.value(&t.apply(x)).cloned().unwrap_or(ExtendedScalar::MinusInfinity);
                if h > *fx || below > h {
                    return Ok(false);
                }
            }
            Ok(true)
        } else {
            let x = get_elem(sa, c, "x")?;
            let upper = c.get("upper").and_then(Value::as_bool).unwrap_or(false);
            Ok(if upper { f.eval(&x)?.is_minus_infinity() } else { g.eval(&t.apply(&x))?.is_plus_infinity() })
        }
    });
    Ok(out)
}

pub fn extend<S: Structure>(
    f: &FunctionTable<S>,
    generators: &[(S::Elem, Rational)],
    m_max: u64,
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let s = f.instance();
    let (verdict, certs) = match hahn_banach_extend(f, generators, m_max)? {
        ExtensionOutcome::Extension(a) => (
            json!({ "outcome": "extension", "linear": qs(&a.coefficients) }),
            json!({ "linear": qs(&a.coefficients) }),
        ),
        ExtensionOutcome::InfeasibleWithinWindow { farkas } => {
            (json!({ "outcome": "infeasible_within_window" }), json!({ "farkas": qs(&farkas) }))
        }
    };
    let mut out = Outcome::new(verdict, certs, json!({ "max_coeff": m_max }));
    out.replay_with(stored, "extension is dominated and extends", |c| {
        let Some(lin) = c.get("linear") else { return Ok(true) };
        let a = AdditiveWitness::new(as_qs(lin)?);
        for (x, fx) in f.values() {
            if ExtendedScalar::Finite(a.eval(s, x)?) > *fx {
                return Ok(false);
            }
        }
        for (x, v) in generators {
            if a.eval(s, x)? != *v {
                return Ok(false);
            }
        }
        Ok(true)
    });
    Ok(out)
}

pub fn value<S: Structure>(
    p: &ConstrainedProblem<S>,
    grid: &[Vec<Rational>],
    prime: Option<u64>,
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    if grid.is_empty() {
        return usage("the problem file has an empty grid");
    }
    let s = p.objective().instance();
    let table = optimize::value_function(p, grid)?;
    let laws = optimize::value_function_laws(p, grid, prime)?;
    let entries: Vec<Value> = table
        .entries
        .iter()
        .map(|e| {
            json!({
                "rhs": qs(&e.rhs), "value": ext(&e.value), "feasible": e.feasible,
                "argmin": e.argmin.as_ref().map(|x| s.encode(x)),
            })
        })
        .collect();
    let verdict = json!({
        "window_relative": table.window_relative,
        "monotone": table.is_monotone(),
        "subadditivity": laws.subadditivity,
        "homogeneity": laws.homogeneity,
    });
    let mut out = Outcome::new(verdict, json!({ "entries": entries }), json!({ "window_elements": p.objective().len() }));
    out.replay_with(stored, "value table replays", |c| {
        for e in items(&c["entries"]) {
            let b = get_qs(e, "rhs")?;
            let v = get_ext(e, "value")?;
            match e.get("argmin").filter(|a| !a.is_null()) {
                Some(x) => {
                    let x = s.decode(x)?;
                    if !p.is_feasible(&x, &b) || p.objective().eval(&x)? != v {
                        return Ok(false);
                    }
                }
                None => {
                    if v != ExtendedScalar::PlusInfinity || p.objective().elements().any(|x| p.is_feasible(x, &b)) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    });
    Ok(out)
}

pub fn lagrange<S: Structure>(
    p: &ConstrainedProblem<S>,
    b0: &[Rational],
    lambdas: &[Vec<Rational>],
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let r = optimize::find_multiplier(p, b0, lambdas)?;
    let verdict = json!({
        "rhs": qs(b0),
        "lambda": qs(&r.lambda),
        "bound": ext(&r.bound),
        "primal": ext(&r.primal),
        "gap": opt_ext(&r.gap),
        "exact": r.exact,
        "window_relative": r.window_relative,
    });
    let scanned: Vec<Value> = r.scanned.iter().map(|m| json!({ "lambda": qs(&m.lambda), "bound": ext(&m.bound) })).collect();
    let mut out = Outcome::new(verdict, json!({ "scanned": scanned }), json!({ "multipliers": lambdas.len() }));
    out.replay_with(stored, "Lagrangian bounds replay", |c| {
        for m in items(&c["scanned"]) {
            let lambda = get_qs(m, "lambda")?;
            let mut inf = ExtendedScalar::PlusInfinity;
            for x in p.objective().elements() {
                inf = inf.min(optimize::lagrangian(p, b0, x, &lambda)?);
            }
            if inf != get_ext(m, "bound")? || inf > r.primal {
                return Ok(false);
            }
        }
        Ok(true)
    });
    Ok(out)
}

pub fn maxrule<S: Structure>(
    fs: &[FunctionTable<S>],
    x0: &S::Elem,
    probes: &[S::Elem],
    schedule: &[u64],
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let r = optimize::subdiff_of_max_check(fs, x0, probes, schedule)?;
    let parts: Vec<Value> = r.parts.iter().map(vertices_json).collect::<monoconv::Result<_>>()?;
    let of_max = vertices_json(&r.of_max)?;
    let verdict = json!({
        "active": r.active,
        "of_max": of_max,
        "parts": parts,
        "parts_inside": r.parts_inside,
        "covered_by_hull": r.covered_by_hull,
        "equality": r.equality(),
    });
    let mut out = Outcome::new(verdict, json!({ "of_max_vertices": of_max }), json!({ "probes": probes.len(), "schedule": schedule }));
    out.replay_with(stored, "vertices satisfy the probe constraints", |c| {
        for v in items(&c["of_max_vertices"]) {
            if !r.of_max.contains(&as_qs(v)?) {
                return Ok(false);
            }
        }
        Ok(true)
    });
    Ok(out)
}
