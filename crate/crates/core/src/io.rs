//! File schemas for sets, function tables and problems.
//!
//! Elements are written in each instance's own JSON encoding, numbers as
//! `"p/q"` strings and extended values as `"p/q"`, `"+inf"` or `"-inf"`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::Structure;
use crate::duality::AdditiveMap;
use crate::error::{Error, Result};
use crate::functions::{FunctionTable, OutsidePolicy};
use crate::instances::InstanceSpec;
use crate::scalar::{parse_rational, ExtendedScalar, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetFile {
    pub elements: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub x: Value,
    pub value: ExtendedScalar,
}

/// A function on a window. Window points not listed take `default`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub window: Value,
    #[serde(default = "plus_infinity_policy")]
    pub outside_policy: OutsidePolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<ExtendedScalar>,
    #[serde(default)]
    pub values: Vec<TableEntry>,
}

fn plus_infinity_policy() -> OutsidePolicy {
    OutsidePolicy::PlusInfinity
}

/// A map given by a matrix acting on instance coordinates, `T(x) = M x`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    #[default]
    Identity,
    Matrix { rows: Vec<Vec<String>> },
}

/// `min f(x) + g(Tx)` and the affine sandwich `g∘T <= f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualityProblemFile {
    pub instance: InstanceSpec,
    /// Defaults to `instance`; must be of the same kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain: Option<InstanceSpec>,
    pub f: FunctionFile,
    pub g: FunctionFile,
    #[serde(default)]
    pub map: MapSpec,
    #[serde(default)]
    pub core_directions: Vec<Value>,
}

/// `v(b) = inf f(x)` subject to `g_i(x) <= b_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstrainedProblemFile {
    pub instance: InstanceSpec,
    pub objective: FunctionFile,
    pub constraints: Vec<FunctionFile>,
    /// Right-hand sides on which the value function is tabulated.
    #[serde(default)]
    pub grid: Vec<Vec<String>>,
    /// The right-hand side for the Lagrangian bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Vec<String>>,
    #[serde(default)]
    pub multipliers: Vec<Vec<String>>,
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_window<S: Structure>(v: &Value) -> Result<S::Window> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("window: {e}")))
}

pub fn decode_all<S: Structure + ?Sized>(s: &S, vs: &[Value]) -> Result<Vec<S::Elem>> {
    vs.iter().map(|v| s.decode(v)).collect()
}

pub fn parse_rationals(v: &[String]) -> Result<Vec<Rational>> {
    v.iter().map(|s| parse_rational(s)).collect()
}

pub fn build_table<S: Structure>(s: Arc<S>, file: &FunctionFile) -> Result<FunctionTable<S>> {
    let window = parse_window::<S>(&file.window)?;
    let mut values = BTreeMap::new();
    if let Some(d) = &file.default {
        for x in s.enumerate(&window) {
            values.insert(x, d.clone());
        }
    }
    for e in &file.values {
        let x = s.decode(&e.x)?;
        let x = s.canonicalize_in(&window, &x).ok_or(Error::OutsideWindow)?;
        values.insert(x, e.value.clone());
    }
    FunctionTable::new(s, window, values, file.outside_policy)
}

/// The inverse of [`build_table`], listing every window point.
pub fn table_to_file<S: Structure>(f: &FunctionTable<S>) -> FunctionFile {
    let s = f.instance();
    FunctionFile {
        window: serde_json::to_value(f.window()).expect("windows serialize"),
        outside_policy: f.outside_policy(),
        default: None,
        values: f.values().iter().map(|(x, v)| TableEntry { x: s.encode(x), value: v.clone() }).collect(),
    }
}

/// Builds `T` and checks that it lands in the codomain on the domain window
/// and on the coordinate unit vectors.
pub fn build_map<A: Structure + 'static, B: Structure + 'static>(
    a: &Arc<A>,
    b: &Arc<B>,
    spec: &MapSpec,
    window: &A::Window,
) -> Result<AdditiveMap<A, B>> {
    let coords_a = |x: &A::Elem| a.coordinates(x).ok_or(Error::UnsupportedDual);
    let matrix: Option<Vec<Vec<Rational>>> = match spec {
        MapSpec::Identity => None,
        MapSpec::Matrix { rows } => Some(rows.iter().map(|r| parse_rationals(r)).collect::<Result<_>>()?),
    };
    let dim_a = coords_a(&a.zero())?.len();
    if let Some(m) = &matrix {
        if m.iter().any(|r| r.len() != dim_a) {
            return Err(Error::Parse(format!("map rows must have {dim_a} entries")));
        }
    }
    let image = {
        let matrix = matrix.clone();
        move |c: &[Rational]| -> Vec<Rational> {
            match &matrix {
                None => c.to_vec(),
                Some(m) => m.iter().map(|r| r.iter().zip(c).map(|(p, q)| p * q).sum()).collect(),
            }
        }
    };
    let mut samples = a.enumerate(window);
    for i in 0..dim_a {
        let mut e = vec![Rational::from_integer(0.into()); dim_a];
        e[i] = Rational::from_integer(1.into());
        if let Some(x) = a.from_coordinates(&e) {
            samples.push(x);
        }
    }
    for x in &samples {
        let y = image(&coords_a(x)?);
        if b.from_coordinates(&y).is_none() {
            return Err(Error::Parse(format!("map sends {} outside the codomain", a.encode(x))));
        }
    }
    let (a2, b2) = (Arc::clone(a), Arc::clone(b));
    let label = match spec {
        MapSpec::Identity => "identity".to_string(),
        MapSpec::Matrix { .. } => "matrix".to_string(),
    };
    Ok(AdditiveMap::new(label, move |x: &A::Elem| {
        let c = a2.coordinates(x).expect("coordinates exist for dual-capable instances");
        b2.from_coordinates(&image(&c)).unwrap_or_else(|| b2.zero())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::LatticeZd;

    #[test]
    fn table_round_trip() {
        let z = Arc::new(LatticeZd::new(1).unwrap());
        let file: FunctionFile = parse_json(
            r#"{"window":{"lo":[-2],"hi":[2]},"default":"+inf","values":[{"x":[0],"value":"0"},{"x":[1],"value":"1/2"}]}"#,
        )
        .unwrap();
        let f = build_table(z.clone(), &file).unwrap();
        assert_eq!(f.eval(&vec![1]).unwrap(), ExtendedScalar::Finite(crate::scalar::ratio(1, 2)));
        assert_eq!(f.eval(&vec![-2]).unwrap(), ExtendedScalar::PlusInfinity);
        let again = build_table(z, &table_to_file(&f)).unwrap();
        assert_eq!(again.values(), f.values());
    }

    #[test]
    fn missing_values_and_unknown_fields() {
        let z = Arc::new(LatticeZd::new(1).unwrap());
        let file: FunctionFile = parse_json(r#"{"window":{"lo":[0],"hi":[1]},"values":[{"x":[0],"value":"0"}]}"#).unwrap();
        assert!(matches!(build_table(z, &file), Err(Error::MissingValue(_))));
        assert!(parse_json::<SetFile>(r#"{"elements":[],"extra":1}"#).is_err());
    }

    #[test]
    fn matrix_maps_are_validated() {
        let z = Arc::new(LatticeZd::new(2).unwrap());
        let w = crate::instances::BoxWindow::cube(2, 1);
        let spec = MapSpec::Matrix { rows: vec![vec!["1".into(), "1".into()]] };
        let z1 = Arc::new(LatticeZd::new(1).unwrap());
        let t = build_map(&z, &z1, &spec, &w).unwrap();
        assert_eq!(t.apply(&vec![2, 3]), vec![5]);
        let half = MapSpec::Matrix { rows: vec![vec!["1/2".into(), "0".into()]] };
        assert!(build_map(&z, &z1, &half, &w).is_err());
    }
}
