//! The on-disk distribution spec format: a strict JSON subset (objects,
//! arrays, numbers, strings — no NaN/Infinity literals) with one node
//! kind per object:
//!
//! ```json
//! {"atoms": [[0, 0.6666666667], [1, 0.3333333333]]}
//! {"cauchy": {"scale": 1}}
//! {"gaussian": {"mean": 0, "variance": 1}}
//! {"convolve": [ <dist>, <dist>, ... ]}
//! {"mix": [{"weight": 0.5, "dist": <dist>}, ...]}
//! ```
//!
//! The format is data, not code: no expressions, no arithmetic.

use std::fmt;

use divisor_core::{DistExpr, SignedAtomicMeasure};
use serde_json::Value;

/// Parse or validation failure for a spec document.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecError {
    /// Malformed text; positions are 1-based.
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    /// Well-formed text violating the schema or a distribution
    /// invariant; `path` locates the offending node.
    Validation { path: String, message: String },
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::Parse {
                line,
                column,
                message,
            } => write!(f, "parse error at line {line}, column {column}: {message}"),
            SpecError::Validation { path, message } => {
                write!(f, "invalid spec at {path}: {message}")
            }
        }
    }
}

impl std::error::Error for SpecError {}

fn invalid(path: &str, message: impl Into<String>) -> SpecError {
    SpecError::Validation {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Parses a spec document into a validated [`DistExpr`].
pub fn parse_spec(text: &str) -> Result<DistExpr, SpecError> {
    let value: Value = serde_json::from_str(text).map_err(|e| SpecError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let expr = value_to_expr(&value, "$")?;
    expr.validate()
        .map_err(|e| invalid("$", e.to_string()))?;
    Ok(expr)
}

fn number(v: &Value, path: &str) -> Result<f64, SpecError> {
    v.as_f64()
        .ok_or_else(|| invalid(path, format!("expected a number, found {v}")))
}

fn value_to_expr(v: &Value, path: &str) -> Result<DistExpr, SpecError> {
    let obj = v
        .as_object()
        .ok_or_else(|| invalid(path, format!("expected an object, found {v}")))?;
    if obj.len() != 1 {
        return Err(invalid(
            path,
            format!(
                "expected exactly one node kind, found {} keys",
                obj.len()
            ),
        ));
    }
    let (kind, body) = obj.iter().next().expect("one entry");
    let path = format!("{path}.{kind}");
    match kind.as_str() {
        "atoms" => {
            let arr = body
                .as_array()
                .ok_or_else(|| invalid(&path, "expected an array of [location, weight]"))?;
            let mut pairs = Vec::with_capacity(arr.len());
            for (i, pair) in arr.iter().enumerate() {
                let p = format!("{path}[{i}]");
                let two = pair
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| invalid(&p, "expected a [location, weight] pair"))?;
                pairs.push((number(&two[0], &p)?, number(&two[1], &p)?));
            }
            let measure =
                SignedAtomicMeasure::new(pairs).map_err(|e| invalid(&path, e.to_string()))?;
            DistExpr::atomic(measure.atoms().iter().map(|a| (a.location, a.weight)))
                .map_err(|e| invalid(&path, e.to_string()))
        }
        "cauchy" => {
            let body_obj = body
                .as_object()
                .ok_or_else(|| invalid(&path, "expected an object with a `scale` field"))?;
            for key in body_obj.keys() {
                if key != "scale" {
                    return Err(invalid(&path, format!("unknown field `{key}`")));
                }
            }
            let scale = body_obj
                .get("scale")
                .ok_or_else(|| invalid(&path, "missing `scale`"))?;
            DistExpr::cauchy(number(scale, &path)?).map_err(|e| invalid(&path, e.to_string()))
        }
        "gaussian" => {
            let body_obj = body
                .as_object()
                .ok_or_else(|| invalid(&path, "expected {mean, variance}"))?;
            for key in body_obj.keys() {
                if key != "mean" && key != "variance" {
                    return Err(invalid(&path, format!("unknown field `{key}`")));
                }
            }
            let mean = body_obj
                .get("mean")
                .ok_or_else(|| invalid(&path, "missing `mean`"))?;
            let variance = body_obj
                .get("variance")
                .ok_or_else(|| invalid(&path, "missing `variance`"))?;
            DistExpr::gaussian(number(mean, &path)?, number(variance, &path)?)
                .map_err(|e| invalid(&path, e.to_string()))
        }
        "convolve" => {
            let arr = body
                .as_array()
                .ok_or_else(|| invalid(&path, "expected an array of distributions"))?;
            let children = arr
                .iter()
                .enumerate()
                .map(|(i, c)| value_to_expr(c, &format!("{path}[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            DistExpr::convolve(children).map_err(|e| invalid(&path, e.to_string()))
        }
        "mix" => {
            let arr = body
                .as_array()
                .ok_or_else(|| invalid(&path, "expected an array of {weight, dist}"))?;
            let mut pairs = Vec::with_capacity(arr.len());
            for (i, entry) in arr.iter().enumerate() {
                let p = format!("{path}[{i}]");
                let obj = entry
                    .as_object()
                    .ok_or_else(|| invalid(&p, "expected {weight, dist}"))?;
                for key in obj.keys() {
                    if key != "weight" && key != "dist" {
                        return Err(invalid(&p, format!("unknown field `{key}`")));
                    }
                }
                let w = obj
                    .get("weight")
                    .ok_or_else(|| invalid(&p, "missing `weight`"))?;
                let d = obj
                    .get("dist")
                    .ok_or_else(|| invalid(&p, "missing `dist`"))?;
                pairs.push((number(w, &p)?, value_to_expr(d, &format!("{p}.dist"))?));
            }
            DistExpr::mixture(pairs).map_err(|e| invalid(&path, e.to_string()))
        }
        other => Err(invalid(
            &path,
            format!("unknown node kind `{other}` (expected atoms, cauchy, gaussian, convolve, mix)"),
        )),
    }
}

/// Serializes an expression back into the canonical spec form.
/// `parse ∘ serialize` is the identity on canonical documents.
pub fn expr_to_value(expr: &DistExpr) -> Value {
    match expr {
        DistExpr::AtomicLeaf(m) => {
            let pairs: Vec<Value> = m
                .atoms()
                .iter()
                .map(|a| Value::Array(vec![json_num(a.location), json_num(a.weight)]))
                .collect();
            serde_json::json!({ "atoms": pairs })
        }
        DistExpr::CauchyLeaf { scale } => serde_json::json!({ "cauchy": { "scale": scale } }),
        DistExpr::GaussianLeaf { mean, variance } => {
            serde_json::json!({ "gaussian": { "mean": mean, "variance": variance } })
        }
        DistExpr::Convolve(children) => {
            let vals: Vec<Value> = children.iter().map(expr_to_value).collect();
            serde_json::json!({ "convolve": vals })
        }
        DistExpr::Mixture(pairs) => {
            let vals: Vec<Value> = pairs
                .iter()
                .map(|(w, d)| serde_json::json!({ "weight": w, "dist": expr_to_value(d) }))
                .collect();
            serde_json::json!({ "mix": vals })
        }
    }
}

fn json_num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .expect("finite by construction")
}
