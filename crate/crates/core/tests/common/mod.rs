//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use monoconv::functions::FunctionTable;
use monoconv::{ExtendedScalar, Structure};

/// Infimum of `Σ f(x_i)` over decompositions `x = x_1 + ... + x_k` with
/// `k <= max_leaves`, all `x_i` in the window, that can be bracketed so that
/// every partial sum stays in the window. Enumerates multisets directly.
pub fn decomposition_infimum<S: Structure>(
    f: &FunctionTable<S>,
    max_leaves: usize,
) -> BTreeMap<S::Elem, ExtendedScalar> {
    let s = f.instance();
    let elems: Vec<S::Elem> = f.elements().cloned().collect();
    let vals: Vec<ExtendedScalar> = elems.iter().map(|x| f.values()[x].clone()).collect();
    let mut best: BTreeMap<S::Elem, ExtendedScalar> =
        elems.iter().map(|x| (x.clone(), ExtendedScalar::PlusInfinity)).collect();
    let mut idx = Vec::with_capacity(max_leaves);
    fn rec<S: Structure>(
        s: &S,
        f: &FunctionTable<S>,
        elems: &[S::Elem],
        vals: &[ExtendedScalar],
        idx: &mut Vec<usize>,
        start: usize,
        max_leaves: usize,
        best: &mut BTreeMap<S::Elem, ExtendedScalar>,
    ) {
        if !idx.is_empty() {
            let cost = idx.iter().fold(ExtendedScalar::zero(), |acc, &i| acc.add_convex(&vals[i]));
            let total = idx[1..].iter().fold(elems[idx[0]].clone(), |acc, &i| s.add(&acc, &elems[i]));
            if let Some(x) = f.locate(&total) {
                if cost < best[&x] && bracketable(s, f, elems, idx) {
                    best.insert(x, cost);
                }
            }
        }
        if idx.len() == max_leaves {
            return;
        }
        for i in start..elems.len() {
            idx.push(i);
            rec(s, f, elems, vals, idx, i, max_leaves, best);
            idx.pop();
        }
    }
    rec(s, f, &elems, &vals, &mut idx, 0, max_leaves, &mut best);
    best
}

/// Can the multiset be split recursively into two nonempty parts whose sums
/// are window elements?
fn bracketable<S: Structure>(s: &S, f: &FunctionTable<S>, elems: &[S::Elem], idx: &[usize]) -> bool {
    let k = idx.len();
    let full = (1u32 << k) - 1;
    let mut memo: HashMap<u32, bool> = HashMap::new();
    fn sum_of<S: Structure>(s: &S, elems: &[S::Elem], idx: &[usize], mask: u32) -> S::Elem {
        let mut acc = s.zero();
        for (b, &i) in idx.iter().enumerate() {
            if mask & (1 << b) != 0 {
                acc = s.add(&acc, &elems[i]);
            }
        }
        acc
    }
    fn ok<S: Structure>(
        s: &S,
        f: &FunctionTable<S>,
        elems: &[S::Elem],
        idx: &[usize],
        mask: u32,
        memo: &mut HashMap<u32, bool>,
    ) -> bool {
        if mask.count_ones() == 1 {
            return true;
        }
        if let Some(&r) = memo.get(&mask) {
            return r;
        }
        let mut r = false;
        let mut sub = (mask - 1) & mask;
        while sub > 0 {
            let other = mask ^ sub;
            if sub < other
                && f.locate(&sum_of(s, elems, idx, sub)).is_some()
                && f.locate(&sum_of(s, elems, idx, other)).is_some()
                && ok(s, f, elems, idx, sub, memo)
                && ok(s, f, elems, idx, other, memo)
            {
                r = true;
                break;
            }
            sub = (sub - 1) & mask;
        }
        memo.insert(mask, r);
        r
    }
    ok(s, f, elems, idx, full, &mut memo)
}
