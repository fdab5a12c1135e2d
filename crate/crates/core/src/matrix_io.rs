//! Text form of complex matrices: a row-major list of lists whose entries are
//! either JSON numbers or strings such as `"1.5-2i"`, `"3"`, `"-i"`.
//!
//! A matrix file is a JSON object with keys `a`, `b` and optionally `x`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrix::C64;

pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    t.parse::<C64>()
        .map_err(|_| Error::MatrixText(format!("cannot parse complex value {s:?}")))
}

pub fn format_complex(z: C64) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn entry(v: &Value) -> Result<C64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(C64::from)
            .ok_or_else(|| Error::MatrixText(format!("number {n} out of range"))),
        Value::String(s) => parse_complex(s),
        other => Err(Error::MatrixText(format!("unexpected entry {other}"))),
    }
}

/// Parses a JSON list of rows.
pub fn matrix_from_value(v: &Value) -> Result<DMatrix<C64>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::MatrixText("expected a list of rows".into()))?;
    let ncols = rows.first().and_then(Value::as_array).map_or(0, Vec::len);
    let mut entries = Vec::with_capacity(rows.len() * ncols);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::MatrixText(format!("row {i} is not a list")))?;
        if row.len() != ncols {
            return Err(Error::MatrixText(format!(
                "row {i} has {} entries, expected {ncols}",
                row.len()
            )));
        }
        for v in row {
            entries.push(entry(v)?);
        }
    }
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &entries))
}

pub fn parse_matrix(text: &str) -> Result<DMatrix<C64>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::MatrixText(e.to_string()))?;
    matrix_from_value(&v)
}

pub fn matrix_to_value(m: &DMatrix<C64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|&z| Value::String(format_complex(z)))
                        .collect(),
                )
            })
            .collect(),
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct RawMatrixFile {
    a: Value,
    b: Value,
    #[serde(default)]
    x: Option<Value>,
}

/// Explicit matrices supplied instead of generated ones.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub a: DMatrix<C64>,
    pub b: DMatrix<C64>,
    pub x: Option<DMatrix<C64>>,
}

impl MatrixFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawMatrixFile =
            serde_json::from_str(text).map_err(|e| Error::MatrixText(e.to_string()))?;
        Ok(Self {
            a: matrix_from_value(&raw.a)?,
            b: matrix_from_value(&raw.b)?,
            x: raw.x.as_ref().map(matrix_from_value).transpose()?,
        })
    }

    pub fn to_json(&self) -> String {
        let raw = RawMatrixFile {
            a: matrix_to_value(&self.a),
            b: matrix_to_value(&self.b),
            x: self.x.as_ref().map(matrix_to_value),
        };
        serde_json::to_string_pretty(&raw).expect("matrix file serializes")
    }
}
