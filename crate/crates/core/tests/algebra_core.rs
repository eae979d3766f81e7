use std::collections::BTreeSet;

use monoconv::algebra::{combine_residual, enumerate_combinations, nth_multiple, probe_divisibility, DivisibilityProbe};
use monoconv::instances::{
    ArctanSemigroup, BoxWindow, DyadicRationals, DyadicWindow, FiniteCyclic, FullWindow, GeneralLattice, LatticeZd,
    MeetSemilattice, Mod1Window, PointWindow, RationalsMod1, SetAlgebraGroup, SubsetWindow,
};
use monoconv::scalar::{format_rational, parse_rational, rat, ratio};
use monoconv::{Divisibility, Error, ExtendedScalar, NCombination, Structure};
use proptest::prelude::*;

use ExtendedScalar::{Finite, MinusInfinity, PlusInfinity};

#[test]
fn extended_scalar_conventions() {
    // ∞ - ∞ = ∞ and 0·∞ = ∞ on the convex side
    assert_eq!(PlusInfinity.add_convex(&MinusInfinity), PlusInfinity);
    assert_eq!(PlusInfinity - PlusInfinity, PlusInfinity);
    assert_eq!(MinusInfinity.scale(0), PlusInfinity);
    assert_eq!(PlusInfinity.scale(0), PlusInfinity);
    assert_eq!(PlusInfinity.add_concave(&MinusInfinity), MinusInfinity);
    assert_eq!(Finite(ratio(1, 2)).add_convex(&Finite(ratio(1, 3))), Finite(ratio(5, 6)));
    assert_eq!(Finite(ratio(-3, 4)).scale(4), ExtendedScalar::int(-3));

    let mut xs = vec![PlusInfinity, Finite(rat(2)), MinusInfinity, Finite(ratio(-7, 3))];
    xs.sort();
    assert_eq!(xs, vec![MinusInfinity, Finite(ratio(-7, 3)), Finite(rat(2)), PlusInfinity]);
    assert_eq!(-PlusInfinity, MinusInfinity);
}

#[test]
fn rationals_are_canonical() {
    assert_eq!(ratio(6, -4), ratio(-3, 2));
    assert_eq!(format_rational(&ratio(6, -4)), "-3/2");
    assert_eq!(format_rational(&rat(5)), "5");
    assert_eq!(parse_rational("10/4").unwrap(), ratio(5, 2));
    assert_eq!(parse_rational("-7").unwrap(), rat(-7));
    assert!(parse_rational("1/0").is_err());
    assert!(parse_rational("x").is_err());
    for s in ["+inf", "-inf", "3/4"] {
        assert_eq!(s.parse::<ExtendedScalar>().unwrap().to_string(), s);
    }
}

#[test]
fn nth_multiple_examples() {
    let z2 = LatticeZd::new(2).unwrap();
    assert_eq!(nth_multiple(&z2, &vec![2, 3], 3), vec![6, 9]);
    let sigma = SetAlgebraGroup::new(4).unwrap();
    let a = sigma.set(&[0, 2]);
    assert_eq!(nth_multiple(&sigma, &a, 2), 0);
    let z6 = FiniteCyclic::cyclic(6).unwrap();
    assert_eq!(nth_multiple(&z6, &vec![4], 0), vec![0]);
    // doubling agrees with repeated addition
    let mut acc = vec![0];
    for n in 0..40u64 {
        assert_eq!(nth_multiple(&z6, &vec![5], n), acc);
        acc = z6.add(&acc, &vec![5]);
    }
}

#[test]
fn combine_residual_examples() {
    let z2 = LatticeZd::new(2).unwrap();
    let c = NCombination::new(vec![(1, vec![0, 0]), (1, vec![2, 2])]).unwrap();
    assert_eq!(combine_residual(&z2, &c), vec![vec![1, 1]]);

    let z = LatticeZd::new(1).unwrap();
    let c = NCombination::new(vec![(1, vec![0]), (1, vec![1])]).unwrap();
    assert!(combine_residual(&z, &c).is_empty());
    assert!((-20..=20).all(|x| 2 * x != 1));

    let z4 = FiniteCyclic::cyclic(4).unwrap();
    let c = NCombination::new(vec![(1, vec![0]), (1, vec![2])]).unwrap();
    let by_exhaustion: Vec<Vec<u64>> = (0..4).filter(|x| (2 * x) % 4 == 2).map(|x| vec![x]).collect();
    assert_eq!(combine_residual(&z4, &c), by_exhaustion);
    assert_eq!(by_exhaustion, vec![vec![1], vec![3]]);
}

#[test]
fn combinations_are_validated() {
    assert!(matches!(NCombination::<u32>::new(vec![]), Err(Error::MalformedCombination(_))));
    assert!(matches!(NCombination::new(vec![(0, 1u32)]), Err(Error::MalformedCombination(_))));
    assert!(matches!(NCombination::with_lhs(3, vec![(1, 1u32), (1, 2)]), Err(Error::MalformedCombination(_))));
    let c = NCombination::with_lhs(3, vec![(2, 1u32), (1, 2)]).unwrap();
    assert_eq!((c.lhs(), c.is_convex()), (3, true));
    let cone = NCombination::cone(1, vec![(2, 1u32)]).unwrap();
    assert!(!cone.is_convex());
}

#[test]
fn divisibility_probe_examples() {
    let q = DyadicRationals::new(1).unwrap();
    let w = DyadicWindow::interval(2, -2, 2);
    assert_eq!(probe_divisibility(&q, 2, &w), DivisibilityProbe::Divisible);
    assert_eq!(probe_divisibility(&q, 3, &DyadicWindow::interval(0, 1, 1)), DivisibilityProbe::NotDivisible(q.ints(&[1])));
    let arctan = PointWindow { points: vec![0.5, 2.0] };
    assert_eq!(probe_divisibility(&ArctanSemigroup, 2, &arctan), DivisibilityProbe::NotDivisible(2.0.into()));
    // Z is not 2-divisible, but a window of even numbers cannot show it
    let z = LatticeZd::new(1).unwrap();
    assert_eq!(probe_divisibility(&z, 2, &BoxWindow::new(vec![0], vec![0])), DivisibilityProbe::UnknownWithinWindow);
    assert_eq!(probe_divisibility(&z, 2, &BoxWindow::cube(1, 1)), DivisibilityProbe::NotDivisible(vec![-1]));
    // exhaustive over a finite carrier: 5 is coprime to 6
    let z6 = FiniteCyclic::cyclic(6).unwrap();
    assert_eq!(probe_divisibility(&z6, 5, &FullWindow), DivisibilityProbe::Divisible);
    assert!(matches!(probe_divisibility(&z6, 3, &FullWindow), DivisibilityProbe::NotDivisible(_)));
}

/// Verdicts from different windows never contradict each other.
fn certainty_is_monotone<S: Structure>(s: &S, windows: &[S::Window]) {
    for n in 1..=8 {
        let verdicts: BTreeSet<u8> = windows
            .iter()
            .map(|w| match probe_divisibility(s, n, w) {
                DivisibilityProbe::Divisible => 0,
                DivisibilityProbe::NotDivisible(_) => 1,
                DivisibilityProbe::UnknownWithinWindow => 2,
            })
            .collect();
        assert!(!(verdicts.contains(&0) && verdicts.contains(&1)), "{} with n = {n}", s.name());
    }
}

#[test]
fn probe_certainty_is_monotone() {
    certainty_is_monotone(
        &DyadicRationals::new(1).unwrap(),
        &[DyadicWindow::interval(0, 0, 0), DyadicWindow::interval(1, -2, 2), DyadicWindow::interval(3, -1, 1)],
    );
    certainty_is_monotone(&LatticeZd::new(1).unwrap(), &[BoxWindow::new(vec![0], vec![0]), BoxWindow::cube(1, 4)]);
    certainty_is_monotone(&SetAlgebraGroup::new(3).unwrap(), &[SubsetWindow { mask: 0 }, SubsetWindow { mask: 0b111 }]);
    certainty_is_monotone(&ArctanSemigroup, &[PointWindow { points: vec![0.0] }, PointWindow { points: vec![0.3, 1.0, 4.0] }]);
}

#[test]
fn enumerate_combinations_examples() {
    let one: Vec<_> = enumerate_combinations(&['a'], 1, 2).collect();
    assert_eq!(one, vec![NCombination::new(vec![(1, 'a')]).unwrap(), NCombination::new(vec![(2, 'a')]).unwrap()]);
    let two: Vec<_> = enumerate_combinations(&['a', 'b'], 2, 1).collect();
    assert!(two.contains(&NCombination::new(vec![(1, 'a'), (1, 'b')]).unwrap()));

    let all: Vec<_> = enumerate_combinations(&['a', 'b', 'c'], 3, 2).collect();
    // nonzero coefficient vectors in {0, 1, 2}^3
    let oracle = (0..27).filter(|k| *k != 0).count();
    assert_eq!((all.len(), oracle), (26, 26));
    let distinct: BTreeSet<String> = all.iter().map(|c| format!("{c:?}")).collect();
    assert_eq!(distinct.len(), 26);
    // bounded support: at most two nonzero coefficients
    assert_eq!(enumerate_combinations(&['a', 'b', 'c'], 2, 2).count(), 26 - 8);
}

/// Commutativity, associativity, neutrality and inverses, exhaustively on a window.
fn monoid_laws<S: Structure>(s: &S, window: &S::Window) {
    let xs = s.enumerate(window);
    let unique: BTreeSet<_> = xs.iter().collect();
    assert_eq!(unique.len(), xs.len(), "{}: duplicate window elements", s.name());
    let zero = s.zero();
    for a in &xs {
        assert!(s.same(&s.add(a, &zero), a), "{}", s.name());
        if let Some(na) = s.negate(a) {
            assert!(s.same(&s.add(a, &na), &zero), "{}", s.name());
        }
        for b in &xs {
            let ab = s.add(a, b);
            assert!(s.same(&ab, &s.add(b, a)), "{}", s.name());
            for c in &xs {
                assert!(s.same(&s.add(&ab, c), &s.add(a, &s.add(b, c))), "{}", s.name());
            }
        }
    }
}

/// Every division solution multiplies back, and `x` divides `n x`.
fn division_laws<S: Structure>(s: &S, window: &S::Window) {
    for x in s.enumerate(window) {
        for n in 1..=8 {
            let y = nth_multiple(s, &x, n);
            let xs = s.divide(&y, n);
            assert!(xs.iter().any(|z| s.same(z, &x)), "{}: {x:?} not among {n}-th roots of {y:?}", s.name());
            assert!(xs.iter().all(|z| s.same(&nth_multiple(s, z, n), &y)), "{}", s.name());
        }
    }
}

/// In a `p`-semidivisible instance every `y` has a `p^l`-th root for `l <= 3`.
fn semidivisibility_powers<S: Structure>(s: &S, window: &S::Window, p: u64) {
    assert_eq!(s.declared_divisibility(p), Divisibility::Divisible);
    for y in s.enumerate(window) {
        for l in 1..=3 {
            assert!(!s.divide(&y, p.pow(l)).is_empty(), "{}: {y:?} / {p}^{l}", s.name());
        }
    }
}

#[test]
fn built_in_instances_satisfy_the_laws() {
    let z2 = LatticeZd::new(2).unwrap();
    monoid_laws(&z2, &BoxWindow::cube(2, 1));
    division_laws(&z2, &BoxWindow::cube(2, 2));
    let gl = GeneralLattice::new(vec![vec![rat(2), rat(0)], vec![rat(1), rat(1)]]).unwrap();
    monoid_laws(&gl, &BoxWindow::cube(2, 1));
    division_laws(&gl, &BoxWindow::cube(2, 2));
    let q = DyadicRationals::new(1).unwrap();
    monoid_laws(&q, &DyadicWindow::interval(1, -2, 2));
    division_laws(&q, &DyadicWindow::interval(2, -2, 2));
    semidivisibility_powers(&q, &DyadicWindow::interval(2, -2, 2), 2);
    let g = FiniteCyclic::new(vec![2, 6]).unwrap();
    monoid_laws(&g, &FullWindow);
    division_laws(&g, &FullWindow);
    monoid_laws(&RationalsMod1, &Mod1Window { max_den: 5 });
    division_laws(&RationalsMod1, &Mod1Window { max_den: 6 });
    semidivisibility_powers(&RationalsMod1, &Mod1Window { max_den: 6 }, 2);
    let sigma = SetAlgebraGroup::new(3).unwrap();
    monoid_laws(&sigma, &SubsetWindow { mask: 0b111 });
    division_laws(&sigma, &SubsetWindow { mask: 0b111 });
    semidivisibility_powers(&sigma, &SubsetWindow { mask: 0b111 }, 3);
    let meet = MeetSemilattice::divisors(12).unwrap();
    monoid_laws(&meet, &FullWindow);
    division_laws(&meet, &FullWindow);
    semidivisibility_powers(&meet, &FullWindow, 2);
    let arctan = PointWindow { points: vec![0.0, 0.2, 0.5, 1.0, 3.0] };
    monoid_laws(&ArctanSemigroup, &arctan);
    division_laws(&ArctanSemigroup, &arctan);
    semidivisibility_powers(&ArctanSemigroup, &arctan, 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residuals_solve_their_relation(
        terms in prop::collection::vec((1u64..=4, prop::collection::vec(-6i64..=6, 2)), 1..=3),
    ) {
        let z2 = LatticeZd::new(2).unwrap();
        let c = NCombination::new(terms.clone()).unwrap();
        let rhs = terms.iter().fold(vec![0, 0], |acc, (m, x)| z2.add(&acc, &nth_multiple(&z2, x, *m)));
        let res = combine_residual(&z2, &c);
        for x in &res {
            prop_assert_eq!(nth_multiple(&z2, x, c.lhs()), rhs.clone());
        }
        // Z^2 is torsion-free: a solution exists iff m divides both coordinates
        let m = c.lhs() as i64;
        prop_assert_eq!(res.len(), usize::from(rhs.iter().all(|v| v % m == 0)));
    }

    #[test]
    fn cyclic_division_matches_exhaustion(n in 1u64..=12, y in 0u64..12, k in 1u64..=8) {
        let g = FiniteCyclic::cyclic(n).unwrap();
        let y = y % n;
        let expect: Vec<Vec<u64>> = (0..n).filter(|x| (x * k) % n == y).map(|x| vec![x]).collect();
        prop_assert_eq!(g.divide(&vec![y], k), expect);
    }

    #[test]
    fn dyadic_multiples_round_trip(num in -64i64..=64, exp in 0u32..=4, n in 1u64..=8) {
        let q = DyadicRationals::new(1).unwrap();
        let x = q.elem(&[(num, exp)]);
        let y = nth_multiple(&q, &x, n);
        prop_assert_eq!(y[0].to_rational(), x[0].to_rational() * rat(n as i64));
        prop_assert!(q.divide(&y, n).contains(&x));
    }
}
