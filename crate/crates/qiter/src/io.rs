//! JSON file formats: field tower configs, equation/system files, and
//! curvature inputs. Matrix entries are expression strings in the grammar
//! of [`crate::ratfunc::parse`]; prime-field scalars are JSON integers,
//! rationals may be written as `"a/b"` strings.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::curvature::CurvatureInput;
use crate::error::{Error, Result};
use crate::exactfield::{
    find_root_of_unity, make_tower_named, rat_from_str, FieldTower, Scalar,
};
use crate::idqmod::{
    equations_from_system_char0, equations_from_system_charp, EquationFamily, FamilyKind,
    ProjectiveSystemData,
};
use crate::matrix::Mat;
use crate::qarith::QContext;
use crate::ratfunc::parse_in_tower;

fn bad(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn scalar_from_value(v: &Value) -> Result<Scalar> {
    match v {
        Value::Number(n) => {
            let i = n
                .as_i64()
                .ok_or_else(|| bad("modulus coefficients must be integers"))?;
            Ok(Scalar::Rat(crate::exactfield::Rat::from(
                num_bigint::BigInt::from(i),
            )))
        }
        Value::String(s) => Ok(Scalar::Rat(rat_from_str(s)?)),
        _ => Err(bad("modulus coefficient must be an integer or an \"a/b\" string")),
    }
}

/// Field tower config: `{"char": 0, "modulus": [-2, 0, 1], "generator": "g"}`,
/// coefficients low-to-high.
pub fn field_from_json(v: &Value) -> Result<Arc<FieldTower>> {
    let obj = v.as_object().ok_or_else(|| bad("field config must be an object"))?;
    let characteristic = obj
        .get("char")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("field config needs a nonnegative integer \"char\""))?;
    let modulus: Vec<Scalar> = obj
        .get("modulus")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("field config needs a \"modulus\" array"))?
        .iter()
        .map(scalar_from_value)
        .collect::<Result<_>>()?;
    let generator = obj
        .get("generator")
        .and_then(Value::as_str)
        .unwrap_or("g");
    make_tower_named(characteristic, modulus, generator)
}

pub fn load_field(path: &str) -> Result<Arc<FieldTower>> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{path}: {e}")))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| bad(format!("{path}: {e}")))?;
    field_from_json(&v)
}

/// Builds a context from a config object carrying `field`, `n` and
/// optionally `q` (a constant expression over the tower; when absent the
/// deterministic root of unity of order n is used).
pub fn context_from_json(v: &Value) -> Result<Arc<QContext>> {
    let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
    let field = obj.get("field").ok_or_else(|| bad("missing \"field\""))?;
    let tower = field_from_json(field)?;
    let n = obj
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("missing \"n\""))?;
    let q = match obj.get("q").and_then(Value::as_str) {
        Some(expr) => parse_in_tower(&tower, None, expr)?
            .as_constant()
            .ok_or_else(|| bad("\"q\" must be a constant expression"))?,
        None => find_root_of_unity(&tower, n)?,
    };
    QContext::new(tower, q, n)
}

pub fn mat_from_json(ctx: &Arc<QContext>, v: &Value) -> Result<Mat> {
    let rows = v.as_array().ok_or_else(|| bad("matrix must be an array of rows"))?;
    if rows.is_empty() {
        return Err(bad("matrix must have at least one row"));
    }
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let entries = row.as_array().ok_or_else(|| bad("matrix row must be an array"))?;
        let mut r = Vec::with_capacity(entries.len());
        for e in entries {
            let s = e.as_str().ok_or_else(|| bad("matrix entry must be an expression string"))?;
            r.push(crate::ratfunc::parse(ctx, s)?);
        }
        out.push(r);
    }
    Ok(Mat::from_rows(out))
}

pub fn mat_to_json(m: &Mat) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    (0..m.cols())
                        .map(|j| Value::String(format!("{}", m.at(i, j))))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// A parsed system/family file.
pub enum SystemFile {
    /// projective-system data; run `equations_from_system_*` to get a family
    SystemCharP(ProjectiveSystemData),
    SystemChar0(ProjectiveSystemData),
    /// family matrices given directly
    Family(EquationFamily),
}

/// Equation/system files:
/// `{"field": {...}, "q": "g", "n": 3, "kind": "charp" | "char0", "p": 5,
///   "D": [mat, ...], "Cn": mat, "A1": mat, "An": mat, "Atilde": [mat, ...]}`
/// with matrix entries as expression strings. Presence of `"D"` marks
/// projective-system input; otherwise the family matrices are read
/// directly.
pub fn system_from_json(v: &Value) -> Result<SystemFile> {
    let obj = v.as_object().ok_or_else(|| bad("system file must be an object"))?;
    let ctx = context_from_json(v)?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("missing \"kind\" (charp or char0)"))?;
    match kind {
        "charp" => {
            if let Some(p) = obj.get("p").and_then(Value::as_u64) {
                if p != ctx.tower().characteristic() {
                    return Err(bad("\"p\" disagrees with the field characteristic"));
                }
            }
            if let Some(d) = obj.get("D") {
                let mats = d
                    .as_array()
                    .ok_or_else(|| bad("\"D\" must be an array of matrices"))?
                    .iter()
                    .map(|m| mat_from_json(&ctx, m))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SystemFile::SystemCharP(ProjectiveSystemData::charp(ctx, mats)?))
            } else {
                let a1 = mat_from_json(&ctx, obj.get("A1").ok_or_else(|| bad("missing \"A1\""))?)?;
                let atilde = obj
                    .get("Atilde")
                    .and_then(Value::as_array)
                    .ok_or_else(|| bad("missing \"Atilde\""))?
                    .iter()
                    .map(|m| mat_from_json(&ctx, m))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SystemFile::Family(EquationFamily::charp(ctx, a1, atilde)))
            }
        }
        "char0" => {
            if let Some(d) = obj.get("D") {
                let mats = d
                    .as_array()
                    .ok_or_else(|| bad("\"D\" must be an array of matrices"))?;
                if mats.len() != 1 {
                    return Err(bad("char0 systems take a single matrix D_0"));
                }
                let d0 = mat_from_json(&ctx, &mats[0])?;
                let cn = mat_from_json(&ctx, obj.get("Cn").ok_or_else(|| bad("missing \"Cn\""))?)?;
                Ok(SystemFile::SystemChar0(ProjectiveSystemData::char0(ctx, d0, cn)?))
            } else {
                let a1 = mat_from_json(&ctx, obj.get("A1").ok_or_else(|| bad("missing \"A1\""))?)?;
                let an = mat_from_json(&ctx, obj.get("An").ok_or_else(|| bad("missing \"An\""))?)?;
                Ok(SystemFile::Family(EquationFamily::char0(ctx, a1, Vec::new(), an)))
            }
        }
        other => Err(bad(format!("unknown kind \"{other}\""))),
    }
}

pub fn load_system(path: &str) -> Result<SystemFile> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{path}: {e}")))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| bad(format!("{path}: {e}")))?;
    system_from_json(&v)
}

/// Extracts the equation family, running the constructive route for system
/// input.
pub fn family_from_system(file: SystemFile) -> Result<EquationFamily> {
    match file {
        SystemFile::SystemCharP(sys) => equations_from_system_charp(&sys),
        SystemFile::SystemChar0(sys) => equations_from_system_char0(&sys),
        SystemFile::Family(f) => Ok(f),
    }
}

pub fn family_to_json(fam: &EquationFamily) -> Value {
    let mut obj = Map::new();
    obj.insert("n".into(), json!(fam.ctx().n()));
    obj.insert("dim".into(), json!(fam.dim()));
    obj.insert("A1".into(), mat_to_json(fam.a1()));
    match fam.kind() {
        FamilyKind::Char0 { intermediates, an, .. } => {
            obj.insert("kind".into(), json!("char0"));
            obj.insert(
                "intermediates".into(),
                Value::Array(intermediates.iter().map(mat_to_json).collect()),
            );
            obj.insert("An".into(), mat_to_json(an));
        }
        FamilyKind::CharP { atilde, .. } => {
            obj.insert("kind".into(), json!("charp"));
            obj.insert("p".into(), json!(fam.ctx().tower().characteristic()));
            obj.insert(
                "Atilde".into(),
                Value::Array(atilde.iter().map(mat_to_json).collect()),
            );
        }
    }
    Value::Object(obj)
}

/// Curvature input files: `{"field": {...}, "q": ..., "n": 2, "A": mat}`.
pub fn curvature_from_json(v: &Value) -> Result<CurvatureInput> {
    let obj = v.as_object().ok_or_else(|| bad("curvature input must be an object"))?;
    let ctx = context_from_json(v)?;
    let a = mat_from_json(&ctx, obj.get("A").ok_or_else(|| bad("missing \"A\""))?)?;
    CurvatureInput::new(ctx, a)
}

pub fn load_curvature(path: &str) -> Result<CurvatureInput> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{path}: {e}")))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| bad(format!("{path}: {e}")))?;
    curvature_from_json(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_config_round_trip() {
        let v: Value =
            serde_json::from_str(r#"{"char": 0, "modulus": [-2, 0, 1], "generator": "g"}"#)
                .unwrap();
        let tower = field_from_json(&v).unwrap();
        assert_eq!(tower.degree(), 2);
        assert_eq!(tower.characteristic(), 0);
        let v: Value =
            serde_json::from_str(r#"{"char": 0, "modulus": ["1/2", "0", "1"]}"#).unwrap();
        // x^2 + 1/2 is irreducible (no rational root, degree 2)
        assert!(field_from_json(&v).is_ok());
        let v: Value = serde_json::from_str(r#"{"char": 5, "modulus": [0, 1]}"#).unwrap();
        assert_eq!(field_from_json(&v).unwrap().characteristic(), 5);
    }

    #[test]
    fn system_file_charp() {
        let text = r#"{
            "field": {"char": 5, "modulus": [0, 1]},
            "n": 2,
            "kind": "charp",
            "p": 5,
            "D": [[["1"]], [["t^4"]], [["t^30"]]]
        }"#;
        let v: Value = serde_json::from_str(text).unwrap();
        let fam = family_from_system(system_from_json(&v).unwrap()).unwrap();
        assert_eq!(fam.levels().len(), 3);
        let out = family_to_json(&fam);
        assert_eq!(out["kind"], "charp");
        assert_eq!(out["Atilde"][0][0][0], "2/t^2");
    }

    #[test]
    fn system_file_char0_direct_family() {
        let text = r#"{
            "field": {"char": 0, "modulus": [1, 1, 1]},
            "q": "g",
            "n": 3,
            "kind": "char0",
            "A1": [["0"]],
            "An": [["(0-4)/t^3"]]
        }"#;
        let v: Value = serde_json::from_str(text).unwrap();
        let fam = family_from_system(system_from_json(&v).unwrap()).unwrap();
        assert_eq!(fam.levels().len(), 2);
    }

    #[test]
    fn curvature_file() {
        let text = r#"{
            "field": {"char": 0, "modulus": [-2, 0, 1]},
            "q": "-1",
            "n": 2,
            "A": [["g/t^2"]]
        }"#;
        let v: Value = serde_json::from_str(text).unwrap();
        let input = curvature_from_json(&v).unwrap();
        assert_eq!(input.ctx.n(), 2);
    }
}
