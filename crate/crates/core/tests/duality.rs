use std::sync::Arc;

use monoconv::duality::*;
use monoconv::functions::{FunctionTable, OutsidePolicy};
use monoconv::instances::{
    ArctanSemigroup, BoxWindow, Dyadic, DyadicRationals, DyadicWindow, FiniteCyclic, FullWindow, LatticeZd,
    MeetSemilattice,
};
use monoconv::linear::simplex::verify_infeasibility;
use monoconv::scalar::{rat, ratio};
use monoconv::{Bounds, DualKind, Error, ExtendedScalar, Rational, Structure};
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ExtendedScalar::{Finite, MinusInfinity, PlusInfinity};

const SCHEDULE: [u64; 5] = [2, 4, 8, 16, 32];

fn dq(dim: usize) -> Arc<DyadicRationals> {
    Arc::new(DyadicRationals::new(dim).unwrap())
}

fn coords(x: &[Dyadic]) -> Vec<Rational> {
    x.iter().map(Dyadic::to_rational).collect()
}

/// `[lo, hi]` on the dyadic line with step `2^-exp`.
fn line(exp: u32, lo: i64, hi: i64, f: impl Fn(&Rational) -> ExtendedScalar) -> FunctionTable<DyadicRationals> {
    FunctionTable::from_fn(dq(1), DyadicWindow::interval(exp, lo, hi), OutsidePolicy::PlusInfinity, |x| {
        f(&x[0].to_rational())
    })
}

fn plane(exp: u32, r: i64, f: impl Fn(&Rational, &Rational) -> ExtendedScalar) -> FunctionTable<DyadicRationals> {
    FunctionTable::from_fn(dq(2), DyadicWindow::cube(2, exp, r), OutsidePolicy::PlusInfinity, |x| {
        f(&x[0].to_rational(), &x[1].to_rational())
    })
}

fn pt(q: &DyadicRationals, c: &[(i64, u32)]) -> Vec<Dyadic> {
    q.elem(c)
}

fn z2_table(r: i64, f: impl Fn(i64, i64) -> ExtendedScalar) -> FunctionTable<LatticeZd> {
    FunctionTable::from_fn(Arc::new(LatticeZd::new(2).unwrap()), BoxWindow::cube(2, r), OutsidePolicy::PlusInfinity, |x| {
        f(x[0], x[1])
    })
}

fn z_table(r: i64, f: impl Fn(i64) -> ExtendedScalar) -> FunctionTable<LatticeZd> {
    FunctionTable::from_fn(Arc::new(LatticeZd::new(1).unwrap()), BoxWindow::cube(1, r), OutsidePolicy::PlusInfinity, |x| {
        f(x[0])
    })
}

fn abs(q: &Rational) -> ExtendedScalar {
    Finite(q.abs())
}

fn w(c: &[i64]) -> AdditiveWitness {
    AdditiveWitness::new(c.iter().map(|v| rat(*v)).collect())
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Brute-force `sup φ(x) - f(x)` over the window.
fn conjugate_oracle<S: Structure>(f: &FunctionTable<S>, val: impl Fn(&S::Elem) -> Rational) -> ExtendedScalar {
    let mut best = MinusInfinity;
    for (x, v) in f.values() {
        let t = match v {
            PlusInfinity => continue,
            MinusInfinity => PlusInfinity,
            Finite(q) => Finite(val(x) - q),
        };
        best = best.max(t);
    }
    best
}

#[test]
fn dual_space_classification() {
    let z3 = LatticeZd::new(3).unwrap();
    assert_eq!(dual_space(&z3).unwrap().representation, DualKind::CoefficientVector(3));
    let pts = z3.enumerate(&BoxWindow::cube(3, 1));
    w(&[2, -1, 5]).check_additive(&z3, &pts).unwrap();
    assert_eq!(dual_space(&FiniteCyclic::cyclic(6).unwrap()).unwrap().representation, DualKind::TriviallyZero);
    assert_eq!(dual_space(&MeetSemilattice::divisors(12).unwrap()).unwrap().representation, DualKind::TriviallyZero);
    assert_eq!(dual_space(&ArctanSemigroup).unwrap_err(), Error::UnsupportedDual);
}

#[test]
fn torsion_forces_the_zero_functional() {
    // 6 φ(x) = φ(6x) = φ(0) = 0 for every x of Z/6
    let z6 = FiniteCyclic::cyclic(6).unwrap();
    for x in z6.enumerate(&FullWindow) {
        assert_eq!(monoconv::nth_multiple(&z6, &x, 6), z6.zero());
    }
    assert_eq!(AdditiveWitness::new(vec![rat(1)]).eval(&z6, &z6.zero()).unwrap_err(), Error::UnsupportedDual);
    assert_eq!(AdditiveWitness::zero(DualKind::TriviallyZero).eval(&z6, &vec![4]).unwrap(), rat(0));
}

#[test]
fn directional_derivatives_of_abs() {
    let f = line(5, -2, 2, abs);
    let q = f.instance().clone();
    let one = q.ints(&[1]);
    let minus_one = q.ints(&[-1]);
    let r = directional_derivative(&f, &one, &one, &SCHEDULE).unwrap();
    assert!(r.samples.iter().all(|(_, _, v)| *v == ExtendedScalar::int(1)));
    assert_eq!(r.infimum, ExtendedScalar::int(1));
    assert!(r.stabilized);
    let r = directional_derivative(&f, &one, &minus_one, &SCHEDULE).unwrap();
    assert_eq!(r.infimum, ExtendedScalar::int(-1));
    let zero = q.ints(&[0]);
    for h in [&one, &minus_one] {
        assert_eq!(directional_derivative(&f, &zero, h, &SCHEDULE).unwrap().infimum, ExtendedScalar::int(1));
    }
    // the sublinear form f(n x + h) - n f(x) agrees where it stays on the window
    let r = directional_derivative_sublinear(&f, &zero, &one, &[1, 2, 4]).unwrap();
    assert_eq!(r.infimum, ExtendedScalar::int(1));
}

#[test]
fn directional_derivative_needs_a_resolvable_direction() {
    // finite only on [-1/4, 1/4]; the direction 4 cannot be divided into it with n <= 8
    let f = line(3, -2, 2, |q| if q.abs() <= ratio(1, 4) { abs(q) } else { PlusInfinity });
    let q = f.instance().clone();
    let err = directional_derivative(&f, &q.ints(&[0]), &q.ints(&[4]), &[2, 4, 8]).unwrap_err();
    assert_eq!(err, Error::CorePrereqFailed);
}

#[test]
fn derivative_laws() {
    let f = line(5, -2, 2, abs);
    let q = f.instance().clone();
    let one = q.ints(&[1]);
    let r = derivative_laws_check(&f, &one, &[q.ints(&[1]), q.ints(&[-1])], &SCHEDULE).unwrap();
    let (a, b, ok) = r.antisymmetry.clone().unwrap();
    assert_eq!(a.add_convex(&b), ExtendedScalar::zero());
    assert!(ok && r.holds());

    let f = line(5, -2, 2, |x| Finite(x * rat(3)));
    let r = derivative_laws_check(&f, &one, &[q.ints(&[1]), q.ints(&[-1])], &SCHEDULE).unwrap();
    for (h, fx_h, fh, _) in &r.bounded_by_f {
        assert_eq!(fx_h, fh, "additive f has f_x = f at {h:?}");
    }

    let f = line(5, -2, 2, |x| Finite(x.abs() * rat(2)));
    let probes: Vec<_> = [1, -1, 2, -2].iter().map(|v| q.ints(&[*v])).collect();
    let r = derivative_laws_check(&f, &one, &probes, &SCHEDULE).unwrap();
    assert_eq!(r.bounded_by_f.len(), 4);
    assert!(r.holds());
}

#[test]
fn subdifferential_examples() {
    let f = line(5, -2, 2, abs);
    let q = f.instance().clone();
    let dense: Vec<_> = (-64..=32).map(|k| pt(&q, &[(k, 5)])).collect();
    let rep = subdifferential(&f, &q.ints(&[1]), &dense).unwrap();
    assert_eq!(rep.interval(), Some((Some(rat(1)), Some(rat(1)))));
    assert_eq!(rep.vertices().unwrap(), vec![vec![rat(1)]]);

    let rep = subdifferential(&f, &q.ints(&[0]), &[q.ints(&[1]), q.ints(&[-1])]).unwrap();
    assert_eq!(rep.interval(), Some((Some(rat(-1)), Some(rat(1)))));
    assert!(rep.contains(&[ratio(1, 2)]) && !rep.contains(&[ratio(3, 2)]));

    let lin = line(5, -2, 2, |x| Finite(x * ratio(3, 2)));
    let rep = subdifferential(&lin, &q.ints(&[1]), &[q.ints(&[1]), q.ints(&[-1])]).unwrap();
    assert_eq!(rep.vertices().unwrap(), vec![vec![ratio(3, 2)]]);

    assert_eq!(subdifferential(&f, &q.ints(&[0]), &[]).unwrap_err(), Error::EmptyProbeSet);
    let z6 = FunctionTable::from_fn(Arc::new(FiniteCyclic::cyclic(6).unwrap()), FullWindow, OutsidePolicy::PlusInfinity, |_| {
        ExtendedScalar::zero()
    });
    assert_eq!(subdifferential(&z6, &vec![0], &[vec![1]]).unwrap_err(), Error::UnsupportedDual);
}

#[test]
fn subdifferential_of_the_l1_norm_in_the_plane() {
    let f = plane(2, 2, |a, b| Finite(a.abs() + b.abs()));
    let q = f.instance().clone();
    let probes: Vec<_> = [[1, 0], [-1, 0], [0, 1], [0, -1]].iter().map(|c| q.ints(c)).collect();
    let rep = subdifferential(&f, &q.ints(&[0, 0]), &probes).unwrap();
    let mut v = rep.vertices().unwrap();
    v.sort();
    let expect: Vec<Vec<Rational>> =
        [[-1, -1], [-1, 1], [1, -1], [1, 1]].iter().map(|c| c.iter().map(|x| rat(*x)).collect()).collect();
    assert_eq!(v, expect);
    assert!(rep.is_bounded());
}

#[test]
fn max_formula_examples() {
    let f = line(5, -2, 2, abs);
    let q = f.instance().clone();
    let probes: Vec<_> = (-8..=8).filter(|k| *k != 0).map(|k| pt(&q, &[(k, 3)])).collect();
    for (x0, h, value) in [(1, 1, 1), (0, 1, 1), (1, -1, -1), (0, -1, 1)] {
        let r = max_formula_check(&f, &q.ints(&[x0]), &q.ints(&[h]), &probes, &SCHEDULE).unwrap();
        assert!(r.holds(), "x0 = {x0}, h = {h}");
        assert_eq!(r.rhs, ExtendedScalar::int(value));
    }
    let lin = line(5, -2, 2, |x| Finite(-x * rat(2)));
    let r = max_formula_check(&lin, &q.ints(&[1]), &q.ints(&[1]), &probes, &SCHEDULE).unwrap();
    assert!(r.holds());
    assert_eq!(r.rhs, ExtendedScalar::int(-2));
}

#[test]
fn max_formula_hypothesis_and_stabilization() {
    // max(0, x - 1) at x0 = 1: f'(1; 1) + f'(1; -1) = 1 > 0
    let f = line(5, -2, 2, |x| Finite((x - rat(1)).max(rat(0))));
    let q = f.instance().clone();
    let probes = vec![q.ints(&[1]), q.ints(&[-1])];
    assert!(matches!(
        max_formula_check(&f, &q.ints(&[1]), &q.ints(&[1]), &probes, &SCHEDULE),
        Err(Error::HypothesisFailed(_))
    ));
    // x^2 never stabilizes: n((1 + 1/n)^2 - 1) = 2 + 1/n
    let g = line(5, -2, 2, |x| Finite(x * x));
    assert_eq!(
        max_formula_check(&g, &q.ints(&[0]), &q.ints(&[1]), &probes, &SCHEDULE).unwrap_err(),
        Error::NotStabilized
    );
}

#[test]
fn conjugate_examples() {
    let zero = z2_table(5, |_, _| ExtendedScalar::zero());
    assert_eq!(conjugate(&zero, &w(&[0, 0])).unwrap(), ExtendedScalar::zero());
    let l1 = z2_table(5, |a, b| ExtendedScalar::int(a.abs() + b.abs()));
    assert_eq!(conjugate(&l1, &w(&[1, 0])).unwrap(), ExtendedScalar::zero());
    let (v, at) = conjugate_with_argmax(&l1, &w(&[2, 0])).unwrap();
    assert_eq!(v, ExtendedScalar::int(5));
    assert_eq!(at, Some(vec![5, 0]));
    let undefined = l1.clone().with_outside_policy(OutsidePolicy::Undefined);
    assert!(matches!(conjugate(&undefined, &w(&[0, 0])), Err(Error::PreconditionFailed(_))));
}

#[test]
fn fenchel_young_examples() {
    let zero = line(1, -4, 4, |_| ExtendedScalar::zero());
    let q = zero.instance().clone();
    let r = fenchel_young_check(&zero, &w(&[0]), &q.ints(&[3])).unwrap();
    assert!(r.equality && r.subgradient && r.holds());

    let f = line(1, -4, 4, abs);
    let r = fenchel_young_check(&f, &w(&[1]), &q.ints(&[2])).unwrap();
    assert_eq!(r.lhs, ExtendedScalar::int(2));
    assert!(r.equality && r.subgradient);
    let r = fenchel_young_check(&f, &w(&[0]), &q.ints(&[2])).unwrap();
    assert!(r.inequality_holds && !r.equality && !r.subgradient);
}

#[test]
fn fenchel_duality_examples() {
    let q = dq(1);
    let f = line(2, -2, 2, abs);
    let g = line(2, -2, 2, abs);
    let dirs = vec![q.ints(&[1]), q.ints(&[-1])];
    let r = fenchel_duality(&f, &g, &AdditiveMap::identity(), &dirs, &[2, 4]).unwrap();
    assert_eq!((r.primal.clone(), r.dual.clone()), (ExtendedScalar::zero(), ExtendedScalar::zero()));
    let phi0 = w(&[0]);
    let d_at_zero = (-conjugate(&f, &phi0).unwrap()).add_concave(&-conjugate(&g, &phi0).unwrap());
    assert_eq!(d_at_zero, ExtendedScalar::zero());
    assert_eq!(r.strong_duality, Some(true));

    // |x - 1| on [-2, 2] against |y|: P = D = 1, attained at φ = -1
    let f = line(2, -2, 2, |x| abs(&(x - rat(1))));
    let r = fenchel_duality(&f, &g, &AdditiveMap::identity(), &dirs, &[2, 4]).unwrap();
    assert_eq!(r.primal, ExtendedScalar::int(1));
    assert_eq!(r.dual, ExtendedScalar::int(1));
    assert_eq!(r.gap, Some(ExtendedScalar::zero()));
    let phi = r.witness.clone().unwrap();
    let attained = (-conjugate(&f, &phi).unwrap())
        .add_concave(&-conjugate(&g, &AdditiveWitness::new(vec![-phi.coefficients[0].clone()])).unwrap());
    assert_eq!(attained, ExtendedScalar::int(1));
    assert_eq!(phi.coefficients, vec![rat(-1)]);
}

#[test]
fn fenchel_duality_on_a_meet_semilattice_is_inf_plus_inf() {
    let s = Arc::new(MeetSemilattice::divisors(12).unwrap());
    let label = |x: &usize| s.label(*x).parse::<i64>().unwrap();
    let f = FunctionTable::from_fn(s.clone(), FullWindow, OutsidePolicy::PlusInfinity, |x| ExtendedScalar::int(12 / label(x)));
    let g = FunctionTable::from_fn(s.clone(), FullWindow, OutsidePolicy::PlusInfinity, |x| ExtendedScalar::int(label(x) % 5));
    let r = fenchel_duality(&f, &g, &AdditiveMap::identity(), &[], &[2]).unwrap();
    let inf_f = f.values().values().min().unwrap().clone();
    let inf_g = g.values().values().min().unwrap().clone();
    assert_eq!(r.dual, inf_f.add_concave(&inf_g));
    assert!(r.primal >= r.dual && r.weak_duality);
    assert_eq!(r.strong_duality, None);
}

#[test]
fn non_separation_fixture_derives_contradictory_offsets() {
    let f = z2_table(2, |a, b| if [(0, 2), (1, 0)].contains(&(a, b)) { ExtendedScalar::int(-1) } else { PlusInfinity });
    let g = z2_table(2, |a, b| if [(0, 1), (2, 0)].contains(&(a, b)) { ExtendedScalar::int(1) } else { MinusInfinity });
    let SandwichOutcome::Infeasible(cert) = sandwich_witness(&f, &g, &AdditiveMap::identity()).unwrap() else {
        panic!("the fixture admits no affine separator");
    };
    assert!(verify_infeasibility(&cert.matrix, &cert.rhs, &cert.farkas));
    let (up, up_row) = cert.c_upper.clone().unwrap();
    let (lo, lo_row) = cert.c_lower.clone().unwrap();
    assert_eq!((up, lo), (rat(-3), rat(3)));
    assert!(up_row.replays(&cert.matrix, &cert.rhs) && lo_row.replays(&cert.matrix, &cert.rhs));
}

#[test]
fn sandwich_witnesses() {
    let f = line(2, -2, 2, |x| Finite(x * x));
    let g = line(2, -2, 2, |_| ExtendedScalar::int(-1));
    let SandwichOutcome::Witness { linear, offset } = sandwich_witness(&f, &g, &AdditiveMap::identity()).unwrap() else {
        panic!("constant separator exists");
    };
    assert!(linear.is_zero());
    assert!(offset >= rat(-1) && offset <= rat(0));

    // touching graphs along x2 = 0, 0 <= x1 <= 1
    let f = plane(1, 2, |a, b| Finite(a.abs() + b.abs()));
    let g = plane(1, 2, |a, b| Finite(rat(1) - (a - rat(1)).abs() - b.abs()));
    let SandwichOutcome::Witness { linear, offset } = sandwich_witness(&f, &g, &AdditiveMap::identity()).unwrap() else {
        panic!("the graphs touch but do not cross");
    };
    let s = f.instance();
    let mut contacts = 0;
    for (x, fx) in f.values() {
        let v = Finite(linear.eval(s, x).unwrap() + &offset);
        let gx = g.eval(x).unwrap();
        assert!(gx <= v && v <= *fx);
        if gx == *fx {
            contacts += 1;
            assert_eq!(v, *fx);
        }
    }
    assert_eq!(contacts, 3);

}

#[test]
fn sandwich_rejects_g_above_f() {
    let f = line(2, -2, 2, |_| ExtendedScalar::int(0));
    let g = line(2, -2, 2, |_| ExtendedScalar::int(1));
    assert!(matches!(sandwich_witness(&f, &g, &AdditiveMap::identity()), Err(Error::PreconditionFailed(_))));
}

#[test]
fn kaufman_examples() {
    let expect_zero = |f: FunctionTable<LatticeZd>, g: FunctionTable<LatticeZd>| {
        let KaufmanOutcome::Witness(a) = kaufman_witness(&f, &g).unwrap() else { panic!("witness expected") };
        assert!(a.is_zero());
    };
    expect_zero(z_table(6, |x| ExtendedScalar::int(x.abs())), z_table(6, |x| ExtendedScalar::int(-x.abs())));
    expect_zero(z_table(6, |x| ExtendedScalar::int(x.max(0))), z_table(6, |x| ExtendedScalar::int(x.min(0))));
    let root = |x: i64| Finite(Rational::from_float((x.abs() as f64).sqrt()).unwrap());
    expect_zero(z_table(9, root), z_table(9, |x| -root(x)));

    // every slope in [0, 1] fits between min(x, 0) and max(x, 0)
    for s in [0, 1] {
        let a = w(&[s]);
        let z = LatticeZd::new(1).unwrap();
        for x in -6..=6 {
            let v = a.eval(&z, &vec![x]).unwrap();
            assert!(rat(x.min(0)) <= v && v <= rat(x.max(0)));
        }
    }
    let sq = z_table(4, |x| ExtendedScalar::int(x * x));
    assert!(matches!(kaufman_witness(&sq, &sq.negated()), Err(Error::PreconditionFailed(_))));
}

#[test]
fn hahn_banach_examples() {
    let f = z2_table(3, |a, b| ExtendedScalar::int(a.abs() + b.abs()));
    let ExtensionOutcome::Extension(a) = hahn_banach_extend(&f, &[(vec![1, 0], rat(1))], 3).unwrap() else {
        panic!("extension exists");
    };
    assert_eq!(a.coefficients[0], rat(1));
    assert!(a.coefficients[1].abs() <= rat(1));
    let ExtensionOutcome::Extension(a) = hahn_banach_extend(&f, &[(vec![1, 0], rat(0))], 3).unwrap() else {
        panic!("extension exists");
    };
    assert!(a.is_zero());
    assert!(matches!(hahn_banach_extend(&f, &[(vec![1, 0], rat(2))], 3), Err(Error::PreconditionFailed(_))));
}

#[test]
fn interpolation_refine_examples() {
    let f = line(2, -2, 2, |x| Finite(x.abs() + rat(1)));
    let g = line(2, -2, 2, |x| Finite(-x.abs() - rat(1)));
    let q = f.instance().clone();
    let x0 = q.ints(&[0]);
    let bounds = Bounds::new(2, 3);
    let h = interpolation_refine_step(&f, &g, &x0, &ExtendedScalar::zero(), InterpolationSide::Lower, bounds).unwrap();
    assert!(h.eval(&x0).unwrap() >= ExtendedScalar::zero());
    for x in f.elements() {
        let v = h.eval(x).unwrap();
        assert!(g.eval(x).unwrap() <= v && v <= f.eval(x).unwrap());
    }
    assert!(h.values().iter().any(|(x, v)| *v > g.eval(x).unwrap()));

    let up = interpolation_refine_step(&f, &g, &x0, &ExtendedScalar::zero(), InterpolationSide::Upper, bounds).unwrap();
    assert!(up.eval(&x0).unwrap() <= ExtendedScalar::zero());
    for x in f.elements() {
        let v = up.eval(x).unwrap();
        assert!(g.eval(x).unwrap() <= v && v <= f.eval(x).unwrap());
    }

    let lin = line(2, -2, 2, |x| Finite(x.clone()));
    let same = interpolation_refine_step(&lin, &lin, &x0, &ExtendedScalar::zero(), InterpolationSide::Lower, bounds).unwrap();
    assert_eq!(same.values(), lin.values());

    assert!(matches!(
        interpolation_refine_step(&f, &g, &x0, &ExtendedScalar::int(5), InterpolationSide::Lower, bounds),
        Err(Error::PreconditionFailed(_))
    ));
}

#[test]
fn stone_partitions() {
    let z = LatticeZd::new(1).unwrap();
    let win = BoxWindow::cube(1, 5);
    let neg: Vec<Vec<i64>> = (-5..0).map(|x| vec![x]).collect();
    let nonneg: Vec<Vec<i64>> = (0..=5).map(|x| vec![x]).collect();
    let id = GeneralizedAffineWitness::affine(w(&[1]), rat(0));
    let (c, d) = stone_partition(&z, &win, &id, &neg, &nonneg).unwrap();
    assert_eq!((c, d), (neg.clone(), nonneg.clone()));

    let zero = GeneralizedAffineWitness::affine(w(&[0]), rat(0));
    let (c, d) = stone_partition(&z, &win, &zero, &[], &nonneg).unwrap();
    assert!(c.is_empty());
    assert_eq!(d, z.enumerate(&win));
    assert!(matches!(stone_partition(&z, &win, &zero, &neg, &nonneg), Err(Error::NotSeparating(_))));

    let q = dq(1);
    let qwin = DyadicWindow::interval(2, -2, 2);
    let a_set: Vec<_> = (-8..=-2).map(|k| pt(&q, &[(k, 2)])).collect();
    let b_set: Vec<_> = (2..=8).map(|k| pt(&q, &[(k, 2)])).collect();
    let (wit, c, d) = separate_sets(q.clone(), qwin.clone(), &a_set, &b_set).unwrap();
    for x in &a_set {
        assert!(c.contains(x) && wit.eval(q.as_ref(), x).unwrap() < ExtendedScalar::zero());
    }
    for x in &b_set {
        assert!(d.contains(x));
    }
    assert_eq!(c.len() + d.len(), q.enumerate(&qwin).len());
    assert!(c.iter().all(|x| !d.contains(x)));
}

#[test]
fn generalized_affine_regions() {
    let z = LatticeZd::new(1).unwrap();
    let w = GeneralizedAffineWitness::with_regions(w(&[1]), rat(0), vec![vec![3]], vec![vec![-3]]).unwrap();
    assert_eq!(w.eval(&z, &vec![3]).unwrap(), PlusInfinity);
    assert_eq!(w.eval(&z, &vec![-3]).unwrap(), MinusInfinity);
    assert_eq!(w.eval(&z, &vec![2]).unwrap(), ExtendedScalar::int(2));
    assert!(GeneralizedAffineWitness::with_regions(AdditiveWitness::new(vec![rat(1)]), rat(0), vec![vec![1]], vec![vec![1]]).is_err());
}

#[test]
fn sum_rule_examples() {
    let q = dq(1);
    let f = line(3, -2, 2, abs);
    let g = line(3, -2, 2, abs);
    let probes: Vec<_> = [1, -1, 2, -2, 8, -8].iter().map(|k| pt(&q, &[(*k, 3)])).collect();
    let dirs = vec![q.ints(&[1]), q.ints(&[-1])];
    let x0 = q.ints(&[0]);
    let r = sum_rule_check(&f, &g, &AdditiveMap::identity(), &x0, &probes, &probes, &dirs, &[2, 4, 8]).unwrap();
    assert_eq!(r.composite.interval(), Some((Some(rat(-2)), Some(rat(2)))));
    assert_eq!(r.inclusion, Some(true));
    assert_eq!(r.equality, Some(true));

    let zero = line(3, -2, 2, |_| ExtendedScalar::zero());
    let r = sum_rule_check(&f, &zero, &AdditiveMap::identity(), &x0, &probes, &probes, &dirs, &[2, 4, 8]).unwrap();
    assert_eq!(r.composite.interval(), r.f_part.interval());
    assert_eq!(r.equality, Some(true));

    let lf = line(3, -2, 2, |x| Finite(x * rat(2)));
    let lg = line(3, -2, 2, |x| Finite(-x * ratio(1, 2)));
    let r = sum_rule_check(&lf, &lg, &AdditiveMap::identity(), &x0, &probes, &probes, &dirs, &[2, 4, 8]).unwrap();
    assert_eq!(r.composite.vertices().unwrap(), vec![vec![ratio(3, 2)]]);
    assert_eq!(r.equality, Some(true));
}

#[test]
fn sum_rule_through_a_doubling_map() {
    // T(x) = 2x on the dyadic line, so T*φ = 2φ
    let q = dq(1);
    let f = line(3, -2, 2, abs);
    let g = line(3, -4, 4, abs);
    let t = AdditiveMap::new("double", |x: &Vec<Dyadic>| vec![x[0].add(&x[0])]);
    let probes: Vec<_> = [1, -1].iter().map(|k| pt(&q, &[(*k, 3)])).collect();
    let x0 = q.ints(&[0]);
    let dirs = vec![q.ints(&[1]), q.ints(&[-1])];
    let r = sum_rule_check(&f, &g, &t, &x0, &probes, &probes, &dirs, &[2, 4, 8]).unwrap();
    assert_eq!(r.composite.interval(), Some((Some(rat(-3)), Some(rat(3)))));
    assert_eq!(r.equality, Some(true));
    assert_eq!(t.pullback(q.as_ref(), q.as_ref(), &w(&[1])).unwrap().coefficients, vec![rat(2)]);
}

/// Random finite-or-infinite table on a small dyadic window of dimension one or two.
fn random_table(rng: &mut ChaCha8Rng, dim: usize) -> FunctionTable<DyadicRationals> {
    let win = if dim == 1 { DyadicWindow::interval(1, -2, 2) } else { DyadicWindow::cube(2, 1, 1) };
    let q = dq(dim);
    let pts = q.enumerate(&win);
    let vals = pts
        .into_iter()
        .map(|x| {
            let v = if rng.gen_ratio(1, 6) { PlusInfinity } else { ExtendedScalar::int(rng.gen_range(-3..=3)) };
            (x, v)
        })
        .collect();
    FunctionTable::new(q, win, vals, OutsidePolicy::PlusInfinity).unwrap()
}

#[test]
fn weak_duality_and_fenchel_young_on_random_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let dim = 1 + case % 2;
        let f = random_table(&mut rng, dim);
        let g = random_table(&mut rng, dim);
        let r = fenchel_duality(&f, &g, &AdditiveMap::identity(), &[], &[2]).unwrap();
        // independent primal and a coarse dual grid lower bound
        let p = f.values().iter().map(|(x, v)| v.add_convex(&g.eval(x).unwrap())).min().unwrap();
        assert_eq!(r.primal, p);
        assert!(r.weak_duality && r.primal >= r.dual, "case {case}");
        for a in -2..=2 {
            for b in -2..=2 {
                let phi: Vec<Rational> = [a, b][..dim].iter().map(|v| ratio(*v, 2)).collect();
                let fs = conjugate_oracle(&f, |x| dot(&phi, &coords(x)));
                let gs = conjugate_oracle(&g, |x| -dot(&phi, &coords(x)));
                assert!((-fs).add_concave(&-gs) <= r.dual, "case {case}");
            }
        }
        if let Some(phi) = &r.witness {
            let fs = conjugate_oracle(&f, |x| dot(&phi.coefficients, &coords(x)));
            let gs = conjugate_oracle(&g, |x| -dot(&phi.coefficients, &coords(x)));
            assert_eq!((-fs).add_concave(&-gs), r.dual);
        }
        // Fenchel–Young at random points and functionals
        let phi = AdditiveWitness::new((0..dim).map(|_| ratio(rng.gen_range(-4..=4), 2)).collect());
        for x in f.elements() {
            let fy = fenchel_young_check(&f, &phi, x).unwrap();
            assert!(fy.holds(), "case {case}");
            let value = dot(&phi.coefficients, &coords(x));
            let attains = f.eval(x).unwrap().is_finite()
                && conjugate_oracle(&f, |y| dot(&phi.coefficients, &coords(y)))
                    == Finite(value - f.eval(x).unwrap().finite().unwrap());
            assert_eq!(fy.subgradient, attains);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derivative_samples_decrease_along_powers_of_two(
        slopes in proptest::collection::vec(-3i64..=3, 1..4),
        offsets in proptest::collection::vec(-4i64..=4, 3),
        x0 in -4i64..=4,
        h in prop_oneof![Just(1i64), Just(-1), Just(2), Just(-2)],
    ) {
        let pieces: Vec<(i64, i64)> = slopes.iter().zip(offsets.iter().cycle()).map(|(a, b)| (*a, *b)).collect();
        let f = line(5, -3, 3, |x| {
            Finite(pieces.iter().map(|(a, b)| x * rat(*a) + rat(*b)).max().unwrap())
        });
        let q = f.instance().clone();
        let x = pt(&q, &[(x0, 2)]);
        let r = directional_derivative(&f, &x, &q.ints(&[h]), &SCHEDULE).unwrap();
        prop_assert!(r.is_non_increasing());
    }

    #[test]
    fn subdifferential_vertices_satisfy_every_constraint(
        a in -3i64..=3, b in -3i64..=3, c in -3i64..=3,
    ) {
        let f = plane(1, 2, |x, y| Finite((x * rat(a)).max(y * rat(b)).max(x * rat(c) + y.clone())));
        let q = f.instance().clone();
        let probes: Vec<_> = [[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]].iter().map(|v| q.ints(v)).collect();
        let rep = subdifferential(&f, &q.ints(&[0, 0]), &probes).unwrap();
        for v in rep.vertices().unwrap() {
            prop_assert!(rep.contains(&v));
        }
        prop_assert!(!rep.is_empty());
    }
}
