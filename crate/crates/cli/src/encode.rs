//! JSON encodings of library results, and the decoders the verifier needs.

use serde_json::{json, Value};

use monoconv::functions::Violation;
use monoconv::linear::fourier_motzkin::DerivedRow;
use monoconv::scalar::{format_rational, parse_rational};
use monoconv::{Error, ExtendedScalar, NCombination, Rational, Result, Structure};

pub fn q(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

pub fn qs(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(q).collect())
}

pub fn ext(e: &ExtendedScalar) -> Value {
    Value::String(e.to_string())
}

pub fn opt_ext(e: &Option<ExtendedScalar>) -> Value {
    e.as_ref().map_or(Value::Null, ext)
}

pub fn row(r: &DerivedRow) -> Value {
    json!({ "coeffs": qs(&r.coeffs), "rhs": q(&r.rhs), "multipliers": qs(&r.multipliers) })
}

pub fn comb<S: Structure + ?Sized>(s: &S, c: &NCombination<S::Elem>) -> Value {
    let terms: Vec<Value> = c.terms().iter().map(|(m, x)| json!([m, s.encode(x)])).collect();
    json!({ "lhs": c.lhs(), "terms": terms })
}

pub fn violation<S: Structure + ?Sized>(s: &S, v: &Violation<S::Elem>) -> Value {
    match v {
        Violation::Combination { combination, residual, lhs, rhs } => json!({
            "kind": "combination", "combination": comb(s, combination), "residual": s.encode(residual),
            "lhs": ext(lhs), "rhs": ext(rhs),
        }),
        Violation::Subadditivity { x, y, sum, lhs, rhs } => json!({
            "kind": "subadditivity", "x": s.encode(x), "y": s.encode(y), "sum": s.encode(sum),
            "lhs": ext(lhs), "rhs": ext(rhs),
        }),
        Violation::Homogeneity { x, m, multiple, lhs, rhs } => json!({
            "kind": "homogeneity", "x": s.encode(x), "m": m, "multiple": s.encode(multiple),
            "lhs": ext(lhs), "rhs": ext(rhs),
        }),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("missing field `{key}`")))
}

pub fn get_u64(v: &Value, key: &str) -> Result<u64> {
    field(v, key)?.as_u64().ok_or_else(|| Error::Parse(format!("`{key}` is not an integer")))
}

pub fn get_str<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    field(v, key)?.as_str().ok_or_else(|| Error::Parse(format!("`{key}` is not a string")))
}

pub fn get_ext(v: &Value, key: &str) -> Result<ExtendedScalar> {
    get_str(v, key)?.parse()
}

pub fn get_q(v: &Value, key: &str) -> Result<Rational> {
    parse_rational(get_str(v, key)?)
}

pub fn as_qs(v: &Value) -> Result<Vec<Rational>> {
    let arr = v.as_array().ok_or_else(|| Error::Parse(format!("expected an array of rationals, got {v}")))?;
    arr.iter()
        .map(|x| x.as_str().ok_or_else(|| Error::Parse(format!("expected a rational string, got {x}"))).and_then(parse_rational))
        .collect()
}

pub fn get_qs(v: &Value, key: &str) -> Result<Vec<Rational>> {
    as_qs(field(v, key)?)
}

pub fn get_matrix(v: &Value, key: &str) -> Result<Vec<Vec<Rational>>> {
    let arr = field(v, key)?.as_array().ok_or_else(|| Error::Parse(format!("`{key}` is not an array")))?;
    arr.iter().map(as_qs).collect()
}

pub fn get_elem<S: Structure + ?Sized>(s: &S, v: &Value, key: &str) -> Result<S::Elem> {
    s.decode(field(v, key)?)
}

pub fn get_row(v: &Value) -> Result<DerivedRow> {
    Ok(DerivedRow { coeffs: get_qs(v, "coeffs")?, rhs: get_q(v, "rhs")?, multipliers: get_qs(v, "multipliers")? })
}

pub fn decode_comb<S: Structure + ?Sized>(s: &S, v: &Value) -> Result<NCombination<S::Elem>> {
    let terms = field(v, "terms")?
        .as_array()
        .ok_or_else(|| Error::Parse("`terms` is not an array".into()))?
        .iter()
        .map(|t| {
            let m = t.get(0).and_then(Value::as_u64).ok_or_else(|| Error::Parse("bad term coefficient".into()))?;
            let x = s.decode(t.get(1).ok_or_else(|| Error::Parse("bad term element".into()))?)?;
            Ok((m, x))
        })
        .collect::<Result<Vec<_>>>()?;
    NCombination::with_lhs(get_u64(v, "lhs")?, terms)
}

pub fn decode_violation<S: Structure + ?Sized>(s: &S, v: &Value) -> Result<Violation<S::Elem>> {
    let (lhs, rhs) = (get_ext(v, "lhs")?, get_ext(v, "rhs")?);
    Ok(match get_str(v, "kind")? {
        "combination" => Violation::Combination {
            combination: decode_comb(s, field(v, "combination")?)?,
            residual: get_elem(s, v, "residual")?,
            lhs,
            rhs,
        },
        "subadditivity" => Violation::Subadditivity {
            x: get_elem(s, v, "x")?,
            y: get_elem(s, v, "y")?,
            sum: get_elem(s, v, "sum")?,
            lhs,
            rhs,
        },
        "homogeneity" => Violation::Homogeneity {
            x: get_elem(s, v, "x")?,
            m: get_u64(v, "m")?,
            multiple: get_elem(s, v, "multiple")?,
            lhs,
            rhs,
        },
        other => return Err(Error::Parse(format!("unknown violation kind `{other}`"))),
    })
}
