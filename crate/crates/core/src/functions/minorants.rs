//! Pointwise maxima and the minorants `p`, `po` and `f ∧ g`.

use std::collections::{BTreeMap, HashMap};

use super::{FunctionTable, OutsidePolicy};
use crate::algebra::{nth_multiple, weighted_sum, Structure};
use crate::error::{Error, Result};
use crate::scalar::ExtendedScalar;

/// Value-wise maximum of tables sharing an instance and window.
pub fn pointwise_max<S: Structure>(fs: &[FunctionTable<S>]) -> Result<FunctionTable<S>> {
    let (first, rest) = fs.split_first().ok_or_else(|| Error::PreconditionFailed("no tables given".into()))?;
    if rest.iter().any(|g| !first.shares_window(g)) {
        return Err(Error::WindowMismatch);
    }
    let outside = if fs.iter().all(|g| g.outside == OutsidePolicy::PlusInfinity) {
        OutsidePolicy::PlusInfinity
    } else {
        OutsidePolicy::Undefined
    };
    let values = first
        .values
        .iter()
        .map(|(x, v)| {
            let m = rest.iter().fold(v.clone(), |acc, g| ExtendedScalar::max_of(acc, g.values[x].clone()));
            (x.clone(), m)
        })
        .collect();
    Ok(FunctionTable { values, outside, ..first.clone() })
}

/// Largest `p <= f` with `p(x + y) <= p(x) + p(y)` whenever `x`, `y` and
/// `x + y` all lie in the window.
///
/// Synchronous relaxation over in-window splits. After `n` rounds (`n` the
/// window size) every tree of depth at most `n` has been seen; any value that
/// still drops during the next `n + 1` rounds lies on a pumpable decomposition
/// of negative cost and is set to `-inf`, which is then propagated.
pub fn subadditive_minorant_p<S: Structure>(f: &FunctionTable<S>) -> Result<FunctionTable<S>> {
    if f.outside != OutsidePolicy::PlusInfinity {
        return Err(Error::PreconditionFailed("the minorant needs +inf outside the window".into()));
    }
    let s = f.instance();
    let elems: Vec<S::Elem> = f.values.keys().cloned().collect();
    let index: HashMap<&S::Elem, usize> = elems.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let mut splits: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..elems.len() {
        for j in i..elems.len() {
            if let Some(k) = f.locate(&s.add(&elems[i], &elems[j])) {
                splits.push((i, j, index[&k]));
            }
        }
    }
    let n = elems.len();
    let mut p: Vec<ExtendedScalar> = elems.iter().map(|x| f.values[x].clone()).collect();
    let relax = |p: &[ExtendedScalar]| -> Vec<ExtendedScalar> {
        let mut next = p.to_vec();
        for &(i, j, k) in &splits {
            let c = p[i].add_convex(&p[j]);
            if c < next[k] {
                next[k] = c;
            }
        }
        next
    };
    let mut round = 0usize;
    let mut snapshot: Option<Vec<ExtendedScalar>> = None;
    loop {
        let next = relax(&p);
        if next == p {
            break;
        }
        p = next;
        round += 1;
        if round == n {
            snapshot = Some(p.clone());
        }
        if round == 2 * n + 1 {
            let snap = snapshot.take().expect("snapshot taken at round n");
            for (v, old) in p.iter_mut().zip(&snap) {
                if *v < *old {
                    *v = ExtendedScalar::MinusInfinity;
                }
            }
            propagate_minus_infinity(&mut p, &splits);
            round = 0;
        }
    }
    let values = elems.into_iter().zip(p).collect();
    Ok(FunctionTable { values, ..f.clone() })
}

fn propagate_minus_infinity(p: &mut [ExtendedScalar], splits: &[(usize, usize, usize)]) {
    let mut changed = true;
    while changed {
        changed = false;
        for &(i, j, k) in splits {
            if !p[k].is_minus_infinity() && p[i].add_convex(&p[j]).is_minus_infinity() {
                p[k] = ExtendedScalar::MinusInfinity;
                changed = true;
            }
        }
    }
}

/// `po` together with how it was obtained.
#[derive(Clone, Debug)]
pub struct HomogenizedMinorant<S: Structure> {
    pub table: FunctionTable<S>,
    /// Every value came from an exact orbit analysis.
    pub exact: bool,
    /// Multiplier cap used where the orbit analysis did not apply.
    pub truncated_at: Option<u64>,
}

/// `po(x) = inf_m p(m x) / m` for a table `p` (normally the output of
/// [`subadditive_minorant_p`]).
///
/// When the window covers a finite carrier the orbit `m x` is eventually
/// periodic and the infimum is exact: along a residue class with value `v`
/// it is `v / k` for negative `v` and the limit `0` otherwise. Elsewhere the
/// minimum over `m <= m_max` is taken and tagged.
pub fn homogenized_minorant_po<S: Structure>(p: &FunctionTable<S>, m_max: u64) -> Result<HomogenizedMinorant<S>> {
    if m_max == 0 {
        return Err(Error::PreconditionFailed("m_max must be positive".into()));
    }
    let exact = p.covers_carrier();
    let mut values = BTreeMap::new();
    for x in p.values.keys() {
        let v = if exact { orbit_infimum(p, x)? } else { truncated_infimum(p, x, m_max)? };
        values.insert(x.clone(), v);
    }
    Ok(HomogenizedMinorant {
        table: FunctionTable { values, outside: OutsidePolicy::PlusInfinity, ..p.clone() },
        exact,
        truncated_at: (!exact).then_some(m_max),
    })
}

fn orbit_infimum<S: Structure>(p: &FunctionTable<S>, x: &S::Elem) -> Result<ExtendedScalar> {
    let s = p.instance();
    let mut seen: HashMap<S::Elem, u64> = HashMap::new();
    let mut orbit: Vec<S::Elem> = Vec::new();
    let mut y = p.locate(x).ok_or(Error::OutsideWindow)?;
    let mut m = 1u64;
    let start = loop {
        if let Some(&first) = seen.get(&y) {
            break first;
        }
        seen.insert(y.clone(), m);
        orbit.push(y.clone());
        y = p.locate(&s.add(&y, x)).ok_or(Error::OutsideWindow)?;
        m += 1;
    };
    let mut best = ExtendedScalar::PlusInfinity;
    for (i, y) in orbit.iter().enumerate() {
        let k = i as u64 + 1;
        let v = &p.values[y];
        let cand = if k < start {
            v.div_int(k)
        } else {
            match v {
                ExtendedScalar::Finite(q) if !num_traits::Signed::is_negative(q) => ExtendedScalar::zero(),
                other => other.div_int(k),
            }
        };
        best = ExtendedScalar::min_of(best, cand);
    }
    Ok(best)
}

fn truncated_infimum<S: Structure>(p: &FunctionTable<S>, x: &S::Elem, m_max: u64) -> Result<ExtendedScalar> {
    let s = p.instance();
    let mut best = ExtendedScalar::PlusInfinity;
    for m in 1..=m_max {
        let v = p.eval(&nth_multiple(s, x, m))?;
        best = ExtendedScalar::min_of(best, v.div_int(m));
    }
    Ok(best)
}

/// Bounded `f ∧ g (x) = inf (n1 f(x1) + n2 g(x2)) / n` over relations
/// `n1 x1 + n2 x2 = n x` with every coefficient at most `max_coeff` and
/// `(n1, n2) != (0, 0)`. A zero coefficient drops its term.
pub fn wedge_minorant<S: Structure>(f: &FunctionTable<S>, g: &FunctionTable<S>, max_coeff: u64) -> Result<FunctionTable<S>> {
    if !f.shares_window(g) {
        return Err(Error::WindowMismatch);
    }
    let s = f.instance();
    let dom_f = f.effective_domain();
    let dom_g = g.effective_domain();
    let mut best: BTreeMap<S::Elem, ExtendedScalar> =
        f.values.keys().map(|x| (x.clone(), ExtendedScalar::PlusInfinity)).collect();
    let zero = s.zero();
    for n1 in 0..=max_coeff {
        for n2 in 0..=max_coeff {
            if n1 == 0 && n2 == 0 {
                continue;
            }
            let xs1: Vec<&S::Elem> = if n1 == 0 { vec![&zero] } else { dom_f.iter().collect() };
            let xs2: Vec<&S::Elem> = if n2 == 0 { vec![&zero] } else { dom_g.iter().collect() };
            for x1 in &xs1 {
                for x2 in &xs2 {
                    let mut cost = ExtendedScalar::zero();
                    if n1 > 0 {
                        cost = cost.add_convex(&f.values[*x1].scale(n1));
                    }
                    if n2 > 0 {
                        cost = cost.add_convex(&g.values[*x2].scale(n2));
                    }
                    let sum = weighted_sum(s, [(n1, *x1), (n2, *x2)]);
                    for n in 1..=max_coeff {
                        for x in s.divide(&sum, n) {
                            if let Some(x) = f.locate(&x) {
                                let v = cost.div_int(n);
                                let slot = best.get_mut(&x).expect("window element");
                                if v < *slot {
                                    *slot = v;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(FunctionTable { values: best, outside: OutsidePolicy::PlusInfinity, ..f.clone() })
}
