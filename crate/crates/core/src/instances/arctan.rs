use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{Divisibility, DivisionContract, Structure};
use crate::error::{Error, Result};

pub const ARCTAN_TOLERANCE: f64 = 1e-9;

pub type ArctanElem = OrderedFloat<f64>;

/// An explicit list of sample points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointWindow {
    pub points: Vec<f64>,
}

/// `[0, inf)` under `a ⊕ b = (a + b) / (1 + ab)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ArctanSemigroup;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= ARCTAN_TOLERANCE * 1f64.max(a.abs()).max(b.abs())
}

fn is_one(a: f64) -> bool {
    close(a, 1.0)
}

/// The `n`-fold sum `a ⊕ ... ⊕ a`.
///
/// With `a = tanh t` the sum is `tanh(nt)`; with `a = coth t` it is
/// `coth(nt)` for odd `n` and `tanh(nt)` for even `n`.
pub fn arctan_n_fold(a: f64, n: u64) -> f64 {
    assert!(a >= 0.0, "arctan elements are nonnegative");
    if n == 0 || a == 0.0 {
        return 0.0;
    }
    if is_one(a) {
        return 1.0;
    }
    let nt = |t: f64| n as f64 * t;
    if a < 1.0 {
        nt(a.atanh()).tanh()
    } else {
        let s = nt((1.0 / a).atanh()).tanh();
        if n % 2 == 1 {
            1.0 / s
        } else {
            s
        }
    }
}

impl Structure for ArctanSemigroup {
    type Elem = ArctanElem;
    type Window = PointWindow;

    fn name(&self) -> String {
        "arctan semigroup".into()
    }

    fn zero(&self) -> ArctanElem {
        OrderedFloat(0.0)
    }

    fn add(&self, a: &ArctanElem, b: &ArctanElem) -> ArctanElem {
        let (a, b) = (a.0, b.0);
        if is_one(a) || is_one(b) {
            return OrderedFloat(1.0);
        }
        OrderedFloat((a + b) / (1.0 + a * b))
    }

    fn negate(&self, _a: &ArctanElem) -> Option<ArctanElem> {
        None
    }

    fn is_group(&self) -> bool {
        false
    }

    fn divide(&self, y: &ArctanElem, n: u64) -> Vec<ArctanElem> {
        assert!(n >= 1);
        let y = y.0;
        if n == 1 || y == 0.0 {
            return vec![OrderedFloat(y)];
        }
        if is_one(y) {
            return vec![OrderedFloat(1.0)];
        }
        let mut out = if y < 1.0 {
            let s = (y.atanh() / n as f64).tanh();
            if n.is_multiple_of(2) {
                vec![s, 1.0 / s]
            } else {
                vec![s]
            }
        } else if n % 2 == 1 {
            vec![1.0 / ((1.0 / y).atanh() / n as f64).tanh()]
        } else {
            Vec::new()
        };
        out.retain(|x| x.is_finite() && close(arctan_n_fold(*x, n), y));
        out.sort_by(f64::total_cmp);
        out.into_iter().map(OrderedFloat).collect()
    }

    fn division_contract(&self) -> DivisionContract {
        DivisionContract::Numeric { tolerance: ARCTAN_TOLERANCE }
    }

    fn enumerate(&self, w: &PointWindow) -> Vec<ArctanElem> {
        let mut pts: Vec<ArctanElem> = w.points.iter().map(|p| OrderedFloat(*p)).collect();
        pts.sort();
        pts.dedup_by(|a, b| close(a.0, b.0));
        pts
    }

    fn window_contains(&self, w: &PointWindow, x: &ArctanElem) -> bool {
        w.points.iter().any(|p| close(*p, x.0))
    }

    fn canonicalize_in(&self, w: &PointWindow, x: &ArctanElem) -> Option<ArctanElem> {
        self.enumerate(w).into_iter().find(|p| close(p.0, x.0))
    }

    fn same(&self, a: &ArctanElem, b: &ArctanElem) -> bool {
        close(a.0, b.0)
    }

    fn declared_divisibility(&self, n: u64) -> Divisibility {
        if n % 2 == 1 {
            Divisibility::Divisible
        } else {
            Divisibility::NotDivisible
        }
    }

    fn encode(&self, x: &ArctanElem) -> Value {
        Value::from(x.0)
    }

    fn decode(&self, v: &Value) -> Result<ArctanElem> {
        v.as_f64()
            .filter(|x| x.is_finite() && *x >= 0.0)
            .map(OrderedFloat)
            .ok_or_else(|| Error::Parse(format!("expected a nonnegative number, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{nth_multiple, probe_divisibility, DivisibilityProbe};

    #[test]
    fn three_fold_matches_closed_form() {
        let a: f64 = 0.5;
        let expected = (3.0 * a + a.powi(3)) / (1.0 + 3.0 * a * a);
        assert!((arctan_n_fold(a, 3) - expected).abs() < 1e-12);
        assert!((arctan_n_fold(a, 3) - 0.928_571_428_571_428_5).abs() < 1e-12);
        assert_eq!(arctan_n_fold(0.0, 7), 0.0);
        assert_eq!(arctan_n_fold(1.0, 4), 1.0);
    }

    #[test]
    fn closed_form_agrees_with_iteration() {
        let s = ArctanSemigroup;
        for a in [0.1, 0.5, 0.9, 1.0, 1.5, 2.0, 4.0] {
            for n in 1..=9 {
                let it = nth_multiple(&s, &OrderedFloat(a), n).0;
                assert!(close(it, arctan_n_fold(a, n)), "a={a} n={n}");
            }
        }
    }

    #[test]
    fn doubling_stays_below_one() {
        for a in [0.3, 2.0, 7.5] {
            assert!(arctan_n_fold(a, 2) <= 1.0);
        }
    }

    #[test]
    fn even_division_has_two_preimages_below_one() {
        let s = ArctanSemigroup;
        let sols = s.divide(&OrderedFloat(0.8), 2);
        assert_eq!(sols.len(), 2);
        assert!(sols[0].0 < 1.0 && sols[1].0 > 1.0);
        assert!(s.divide(&OrderedFloat(2.0), 2).is_empty());
        assert_eq!(s.divide(&OrderedFloat(2.0), 3).len(), 1);
    }

    #[test]
    fn probe_taxonomy() {
        let s = ArctanSemigroup;
        let w = PointWindow { points: vec![0.0, 0.5, 1.0, 2.0] };
        assert_eq!(probe_divisibility(&s, 2, &w), DivisibilityProbe::NotDivisible(OrderedFloat(2.0)));
        assert_eq!(probe_divisibility(&s, 4, &w), DivisibilityProbe::NotDivisible(OrderedFloat(2.0)));
        assert_eq!(probe_divisibility(&s, 3, &w), DivisibilityProbe::Divisible);
        assert_eq!(probe_divisibility(&s, 5, &w), DivisibilityProbe::Divisible);
    }
}
