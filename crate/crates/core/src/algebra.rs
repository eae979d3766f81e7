//! The algebraic substrate: pluggable commutative monoids, `N`-combinations,
//! division and divisibility probing.

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::hash::Hash;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Declared answer to "is `nX = X`?".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Divisibility {
    Divisible,
    NotDivisible,
    Unknown,
}

/// How far [`Structure::divide`] can be trusted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DivisionContract {
    /// Every solution of `n x = y` in the carrier is returned.
    Exact,
    /// Solutions are computed in floating point and compared with a tolerance.
    Numeric { tolerance: f64 },
}

/// Shape of the additive dual `X* = { additive maps X -> R }`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "dimension")]
pub enum DualKind {
    /// Additive maps are dot products with a rational vector of this length.
    CoefficientVector(usize),
    /// Only the zero map is additive (torsion instances, idempotent monoids).
    TriviallyZero,
    Unsupported,
}

/// A commutative monoid together with the finite machinery needed to reason
/// about it at desk scale: an enumerable window, a division solver and
/// declared divisibility metadata.
pub trait Structure: Debug + Send + Sync {
    type Elem: Clone + Eq + Ord + Hash + Debug + Send + Sync;
    type Window: Clone + Debug + Send + Sync + Serialize + DeserializeOwned;

    fn name(&self) -> String;

    fn zero(&self) -> Self::Elem;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    /// Additive inverse; `None` for monoids without inverses.
    fn negate(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn is_group(&self) -> bool {
        self.negate(&self.zero()).is_some()
    }

    /// All `x` with `n x = y`, sorted and without duplicates. `n >= 1`.
    fn divide(&self, y: &Self::Elem, n: u64) -> Vec<Self::Elem>;

    fn division_contract(&self) -> DivisionContract {
        DivisionContract::Exact
    }

    /// Window elements, in a deterministic order and without duplicates.
    fn enumerate(&self, window: &Self::Window) -> Vec<Self::Elem>;

    fn window_contains(&self, window: &Self::Window, x: &Self::Elem) -> bool;

    /// The window element equal to `x`, if any. Numeric instances snap to a
    /// window point within tolerance.
    fn canonicalize_in(&self, window: &Self::Window, x: &Self::Elem) -> Option<Self::Elem> {
        self.window_contains(window, x).then(|| x.clone())
    }

    /// Equality of elements; numeric instances compare within tolerance.
    fn same(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a == b
    }

    /// Least `e` with `e x = 0` for all `x`, for finite groups.
    fn exponent(&self) -> Option<u64> {
        None
    }

    /// A window covering the whole carrier, for finite instances.
    fn full_window(&self) -> Option<Self::Window> {
        None
    }

    fn declared_divisibility(&self, n: u64) -> Divisibility;

    fn dual_kind(&self) -> DualKind {
        DualKind::Unsupported
    }

    /// Rational coordinates under which additive maps are dot products.
    fn coordinates(&self, _x: &Self::Elem) -> Option<Vec<Rational>> {
        None
    }

    /// Inverse of [`Structure::coordinates`] where the point lies in the carrier.
    fn from_coordinates(&self, _c: &[Rational]) -> Option<Self::Elem> {
        None
    }

    /// Integer coordinates for lattice instances, where
    /// `conv(A) = conv_R(A) ∩ Z^k` in these coordinates.
    fn lattice_coordinates(&self, _x: &Self::Elem) -> Option<Vec<i64>> {
        None
    }

    fn from_lattice_coordinates(&self, _v: &[i64]) -> Option<Self::Elem> {
        None
    }

    /// All window elements `x` such that `m x = Σ m_i t_i` with `m = Σ m_i`
    /// and every `m_i` in `1..=max_coeff` (every term is used).
    fn bounded_residuals(
        &self,
        terms: &[Self::Elem],
        max_coeff: u64,
        window: &Self::Window,
    ) -> Vec<Self::Elem> {
        brute_force_residuals(self, terms, max_coeff, window)
    }

    /// Closure of `a` under residuals of bounded combinations inside the
    /// window, when the instance has a faster route than the generic fixpoint.
    fn bounded_closure(
        &self,
        _a: &[Self::Elem],
        _bounds: Bounds,
        _window: &Self::Window,
    ) -> Option<BTreeSet<Self::Elem>> {
        None
    }

    fn encode(&self, x: &Self::Elem) -> Value;

    fn decode(&self, v: &Value) -> Result<Self::Elem>;

    fn encode_all<'a>(&self, xs: impl IntoIterator<Item = &'a Self::Elem>) -> Value
    where
        Self::Elem: 'a,
    {
        Value::Array(xs.into_iter().map(|x| self.encode(x)).collect())
    }
}

/// Default implementation of [`Structure::bounded_residuals`]: enumerate every
/// coefficient vector in `[1, max_coeff]^k` and divide.
pub fn brute_force_residuals<S: Structure + ?Sized>(
    s: &S,
    terms: &[S::Elem],
    max_coeff: u64,
    window: &S::Window,
) -> Vec<S::Elem> {
    let k = terms.len();
    if k == 0 || max_coeff == 0 {
        return Vec::new();
    }
    let mut out = BTreeSet::new();
    let mut coeffs = vec![1u64; k];
    loop {
        let lhs: u64 = coeffs.iter().sum();
        let sum = weighted_sum(s, coeffs.iter().copied().zip(terms.iter()));
        for x in s.divide(&sum, lhs) {
            if let Some(x) = s.canonicalize_in(window, &x) {
                out.insert(x);
            }
        }
        // odometer over [1, max_coeff]^k
        let mut i = k;
        loop {
            if i == 0 {
                return out.into_iter().collect();
            }
            i -= 1;
            if coeffs[i] < max_coeff {
                coeffs[i] += 1;
                for c in &mut coeffs[i + 1..] {
                    *c = 1;
                }
                break;
            }
        }
    }
}

/// Does `pred` hold for some index subset of `0..n` of the given size whose
/// largest index is at least `min_last`? Subsets are visited in lexicographic order.
pub fn any_subset(n: usize, size: usize, min_last: usize, pred: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(
        start: usize,
        n: usize,
        size: usize,
        min_last: usize,
        cur: &mut Vec<usize>,
        pred: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == size {
            return cur.last().is_some_and(|l| *l >= min_last) && pred(cur);
        }
        let remaining = size - cur.len();
        for i in start..=n - remaining {
            cur.push(i);
            let hit = rec(i + 1, n, size, min_last, cur, pred);
            cur.pop();
            if hit {
                return true;
            }
        }
        false
    }
    if size == 0 || size > n {
        return false;
    }
    rec(0, n, size, min_last, &mut Vec::with_capacity(size), pred)
}

/// `x` added to itself `n` times (`n = 0` gives zero), by doubling.
pub fn nth_multiple<S: Structure + ?Sized>(s: &S, x: &S::Elem, n: u64) -> S::Elem {
    let mut acc = s.zero();
    let mut base = x.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc = s.add(&acc, &base);
        }
        k >>= 1;
        if k > 0 {
            base = s.add(&base, &base);
        }
    }
    acc
}

/// `Σ m_i x_i`.
pub fn weighted_sum<'a, S: Structure + ?Sized>(
    s: &S,
    terms: impl IntoIterator<Item = (u64, &'a S::Elem)>,
) -> S::Elem
where
    S::Elem: 'a,
{
    terms
        .into_iter()
        .fold(s.zero(), |acc, (m, x)| s.add(&acc, &nth_multiple(s, x, m)))
}

/// A formal relation `m x = Σ m_i x_i` with positive coefficients.
///
/// Convex combinations additionally satisfy `m = Σ m_i`; relations built with
/// [`NCombination::cone`] drop that constraint.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NCombination<E> {
    lhs: u64,
    terms: Vec<(u64, E)>,
}

impl<E: Clone + Eq> NCombination<E> {
    /// A convex relation; `lhs` is the sum of the term coefficients.
    pub fn new(terms: Vec<(u64, E)>) -> Result<Self> {
        Self::check_terms(&terms)?;
        let lhs = terms.iter().map(|(m, _)| *m).sum();
        Ok(Self { lhs, terms })
    }

    /// A convex relation with an explicit left coefficient, validated.
    pub fn with_lhs(lhs: u64, terms: Vec<(u64, E)>) -> Result<Self> {
        let c = Self::new(terms)?;
        if c.lhs != lhs {
            return Err(Error::MalformedCombination(format!(
                "left coefficient {lhs} differs from the coefficient sum {}",
                c.lhs
            )));
        }
        Ok(c)
    }

    /// A cone relation `lhs x = Σ m_i x_i` without the sum constraint.
    pub fn cone(lhs: u64, terms: Vec<(u64, E)>) -> Result<Self> {
        Self::check_terms(&terms)?;
        if lhs == 0 {
            return Err(Error::MalformedCombination("left coefficient is zero".into()));
        }
        Ok(Self { lhs, terms })
    }

    fn check_terms(terms: &[(u64, E)]) -> Result<()> {
        if terms.is_empty() {
            return Err(Error::MalformedCombination("no terms".into()));
        }
        if terms.iter().any(|(m, _)| *m == 0) {
            return Err(Error::MalformedCombination("zero coefficient".into()));
        }
        Ok(())
    }

    pub fn lhs(&self) -> u64 {
        self.lhs
    }

    pub fn terms(&self) -> &[(u64, E)] {
        &self.terms
    }

    pub fn is_convex(&self) -> bool {
        self.lhs == self.terms.iter().map(|(m, _)| *m).sum::<u64>()
    }

    pub fn to_json<S: Structure<Elem = E> + ?Sized>(&self, s: &S) -> Value {
        serde_json::json!({
            "lhs": self.lhs,
            "terms": self
                .terms
                .iter()
                .map(|(m, x)| serde_json::json!({ "coeff": m, "element": s.encode(x) }))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json<S: Structure<Elem = E> + ?Sized>(s: &S, v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("combination: {m}"));
        let lhs = v.get("lhs").and_then(Value::as_u64).ok_or_else(|| bad("missing lhs"))?;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing terms"))?
            .iter()
            .map(|t| {
                let m = t.get("coeff").and_then(Value::as_u64).ok_or_else(|| bad("coeff"))?;
                let x = s.decode(t.get("element").ok_or_else(|| bad("element"))?)?;
                Ok((m, x))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::cone(lhs, terms)
    }
}

/// All `x` with `m x = Σ m_i x_i`; possibly empty or with several solutions.
pub fn combine_residual<S: Structure + ?Sized>(s: &S, c: &NCombination<S::Elem>) -> Vec<S::Elem> {
    let sum = weighted_sum(s, c.terms.iter().map(|(m, x)| (*m, x)));
    s.divide(&sum, c.lhs)
}

/// Checks `m x = Σ m_i x_i` for a specific `x`.
pub fn relation_holds<S: Structure + ?Sized>(s: &S, c: &NCombination<S::Elem>, x: &S::Elem) -> bool {
    let rhs = weighted_sum(s, c.terms.iter().map(|(m, x)| (*m, x)));
    s.same(&nth_multiple(s, x, c.lhs), &rhs)
}

/// Outcome of [`probe_divisibility`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DivisibilityProbe<E> {
    Divisible,
    /// `y` lies in the sample and `n x = y` has no solution.
    NotDivisible(E),
    UnknownWithinWindow,
}

/// Probes `nX = X` on a sample window.
///
/// `NotDivisible` always carries a witness. `Divisible` requires either the
/// instance's declaration or an exhaustive exact check over a finite carrier.
pub fn probe_divisibility<S: Structure + ?Sized>(
    s: &S,
    n: u64,
    sample: &S::Window,
) -> DivisibilityProbe<S::Elem> {
    assert!(n >= 1, "divisibility probe needs n >= 1");
    let elems = s.enumerate(sample);
    for y in &elems {
        if s.divide(y, n).is_empty() {
            return DivisibilityProbe::NotDivisible(y.clone());
        }
    }
    if s.declared_divisibility(n) == Divisibility::Divisible {
        return DivisibilityProbe::Divisible;
    }
    let covers_carrier = s
        .full_window()
        .map(|w| s.enumerate(&w).len() == elems.len())
        .unwrap_or(false);
    if covers_carrier && s.division_contract() == DivisionContract::Exact {
        DivisibilityProbe::Divisible
    } else {
        DivisibilityProbe::UnknownWithinWindow
    }
}

/// Smallest prime `p <= 13` with declared `pX = X`.
pub fn semidivisibility_prime<S: Structure + ?Sized>(s: &S) -> Option<u64> {
    [2u64, 3, 5, 7, 11, 13]
        .into_iter()
        .find(|&p| s.declared_divisibility(p) == Divisibility::Divisible)
}

/// Coefficient vectors in `[0, max_coeff]^k` with between one and
/// `max_terms` nonzero entries, in lexicographic order.
#[derive(Clone, Debug)]
pub struct CoefficientVectors {
    current: Vec<u64>,
    max_terms: usize,
    max_coeff: u64,
    done: bool,
}

impl CoefficientVectors {
    pub fn new(k: usize, max_terms: usize, max_coeff: u64) -> Self {
        Self {
            current: vec![0; k],
            max_terms,
            max_coeff,
            done: k == 0 || max_terms == 0 || max_coeff == 0,
        }
    }
}

impl Iterator for CoefficientVectors {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        let k = self.current.len();
        let prefix_support: Vec<usize> = self
            .current
            .iter()
            .scan(0usize, |acc, &c| {
                let before = *acc;
                *acc += usize::from(c > 0);
                Some(before)
            })
            .collect();
        for i in (0..k).rev() {
            let c = self.current[i];
            let room = c > 0 || prefix_support[i] < self.max_terms;
            if c < self.max_coeff && room {
                self.current[i] += 1;
                for v in &mut self.current[i + 1..] {
                    *v = 0;
                }
                return Some(self.current.clone());
            }
        }
        self.done = true;
        None
    }
}

/// Every convex `N`-combination over `generators` within the bounds, in
/// lexicographic order of the coefficient vector.
pub fn enumerate_combinations<E: Clone + Eq>(
    generators: &[E],
    max_terms: usize,
    max_coeff: u64,
) -> impl Iterator<Item = NCombination<E>> + '_ {
    CoefficientVectors::new(generators.len(), max_terms, max_coeff).map(move |coeffs| {
        let terms = coeffs
            .iter()
            .zip(generators)
            .filter(|(c, _)| **c > 0)
            .map(|(c, g)| (*c, g.clone()))
            .collect();
        NCombination::new(terms).expect("coefficient vectors have nonzero support")
    })
}

/// Search bounds for combination enumeration; always caller-supplied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Bounds {
    pub max_terms: usize,
    pub max_coeff: u64,
}

impl Bounds {
    pub fn new(max_terms: usize, max_coeff: u64) -> Self {
        Self { max_terms, max_coeff }
    }
}
