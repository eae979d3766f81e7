//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use monoconv::functions::{FunctionTable, OutsidePolicy};
use monoconv::instances::{BoxWindow, Dyadic, DyadicRationals, DyadicWindow, FiniteCyclic, FullWindow, LatticeZd};
use monoconv::optimize::ConstrainedProblem;
use monoconv::scalar::rat;
use monoconv::ExtendedScalar;

/// Deterministic pseudo-random points in `[-r, r]^dim`.
pub fn scattered_points(dim: usize, count: usize, r: i64, seed: u64) -> Vec<Vec<i64>> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let span = (2 * r + 1) as u64;
    (0..count)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((state >> 33) % span) as i64 - r
                })
                .collect()
        })
        .collect()
}

/// `x -> (x * x) mod 7 + 1` on `Z/n`.
pub fn cyclic_table(n: u64) -> FunctionTable<FiniteCyclic> {
    let g = Arc::new(FiniteCyclic::cyclic(n).expect("n >= 1"));
    FunctionTable::from_fn(g, FullWindow, OutsidePolicy::PlusInfinity, |x| ExtendedScalar::int(((x[0] * x[0]) % 7 + 1) as i64))
}

/// `|x| + |y|` on the dyadic square of radius `r`.
pub fn l1_plane(exp: u32, r: i64) -> FunctionTable<DyadicRationals> {
    let q = Arc::new(DyadicRationals::new(2).expect("dimension 2"));
    FunctionTable::from_fn(q, DyadicWindow::cube(2, exp, r), OutsidePolicy::PlusInfinity, |x| {
        ExtendedScalar::Finite(x.iter().map(Dyadic::to_rational).map(|q| if q < rat(0) { -q } else { q }).sum())
    })
}

/// Nonzero vectors of `{-2..2}^2` scaled by `2^-exp`.
pub fn plane_probes(exp: u32) -> Vec<Vec<Dyadic>> {
    let q = DyadicRationals::new(2).expect("dimension 2");
    (-2..=2)
        .flat_map(|a| (-2..=2).map(move |b| (a, b)))
        .filter(|&(a, b)| (a, b) != (0, 0))
        .map(|(a, b)| q.elem(&[(a, exp), (b, exp)]))
        .collect()
}

/// `min -x` subject to `2x <= b` on `[-r, r]`.
pub fn ceiling_problem(r: i64) -> ConstrainedProblem<LatticeZd> {
    let z = Arc::new(LatticeZd::new(1).expect("dimension 1"));
    let table = |k: i64| {
        FunctionTable::from_fn(z.clone(), BoxWindow::cube(1, r), OutsidePolicy::PlusInfinity, move |x| {
            ExtendedScalar::int(k * x[0])
        })
    };
    ConstrainedProblem::new(table(-1), vec![table(2)]).expect("one constraint")
}

/// Four points of `Z^2` that no affine map separates.
pub fn non_separable_pair() -> (FunctionTable<LatticeZd>, FunctionTable<LatticeZd>) {
    let z = Arc::new(LatticeZd::new(2).expect("dimension 2"));
    let table = |pts: [(i64, i64); 2], v: ExtendedScalar, off: ExtendedScalar| {
        FunctionTable::from_fn(z.clone(), BoxWindow::cube(2, 2), OutsidePolicy::PlusInfinity, move |x| {
            if pts.contains(&(x[0], x[1])) { v.clone() } else { off.clone() }
        })
    };
    (
        table([(0, 2), (1, 0)], ExtendedScalar::int(-1), ExtendedScalar::PlusInfinity),
        table([(0, 1), (2, 0)], ExtendedScalar::int(1), ExtendedScalar::MinusInfinity),
    )
}
