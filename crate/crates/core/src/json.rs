//! JSON encoding of complex scalars, vectors and matrices.
//!
//! A complex number is written as `[re, im]`. On input a bare real number is
//! also accepted. Vectors are arrays of pairs, matrices are arrays of rows.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::{CMatrix, CVector, Complex64, Error, Result};

pub fn complex_to_value(c: Complex64) -> Value {
    Value::from(vec![c.re, c.im])
}

pub fn complex_from_value(v: &Value) -> Result<Complex64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(|x| Complex64::new(x, 0.0))
            .ok_or_else(|| Error::Parse(format!("not a number: {n}"))),
        Value::Array(pair) if pair.len() == 2 => {
            let re = pair[0].as_f64();
            let im = pair[1].as_f64();
            match (re, im) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(Error::Parse(format!("expected [re, im], got {v}"))),
            }
        }
        _ => Err(Error::Parse(format!("expected a complex number, got {v}"))),
    }
}

pub fn vector_to_value(v: &CVector) -> Value {
    Value::Array(v.iter().map(|c| complex_to_value(*c)).collect())
}

pub fn vector_from_value(v: &Value) -> Result<CVector> {
    let items = v
        .as_array()
        .ok_or_else(|| Error::Parse(format!("expected an array of complex numbers, got {v}")))?;
    let parsed = items.iter().map(complex_from_value).collect::<Result<Vec<_>>>()?;
    Ok(CVector::from_vec(parsed))
}

pub fn matrix_to_value(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_value(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn matrix_from_value(v: &Value) -> Result<CMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("expected an array of rows".into()))?;
    let parsed = rows
        .iter()
        .map(|r| vector_from_value(r).map(|x| x.iter().copied().collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let n = parsed.len();
    let m = parsed.first().map_or(0, Vec::len);
    if let Some(bad) = parsed.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, found: bad.len() });
    }
    Ok(CMatrix::from_fn(n, m, |i, j| parsed[i][j]))
}

/// `#[serde(with = "crate::json::complex")]`
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Complex64, D::Error> {
        complex_from_value(&Value::deserialize(d)?).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "crate::json::complex_vec")]` for `Vec<Complex64>`.
pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Complex64>, D::Error> {
        vector_from_value(&Value::deserialize(d)?)
            .map(|v| v.iter().copied().collect())
            .map_err(D::Error::custom)
    }
}

/// `#[serde(with = "crate::json::cvector")]`
pub mod cvector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        vector_to_value(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVector, D::Error> {
        vector_from_value(&Value::deserialize(d)?).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "crate::json::cvector_list")]` for `Vec<CVector>`.
pub mod cvector_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[CVector], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(vector_to_value).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CVector>, D::Error> {
        let items: Vec<Value> = Vec::deserialize(d)?;
        items
            .iter()
            .map(vector_from_value)
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)
    }
}

/// `#[serde(with = "crate::json::cmatrix")]`
pub mod cmatrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_value(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        matrix_from_value(&Value::deserialize(d)?).map_err(D::Error::custom)
    }
}
