//! `family:key=value,key=value` state strings.
//!
//! Lists use `;` (quote them in the shell): `table:probabilities=0.2;0.8`,
//! `gaussian:mean=0;1,cov=1;2` (a list covariance is the diagonal). Full
//! covariance matrices go through the JSON config file.

use serde_json::{json, Map, Value};

use crate::distributions::KnowledgeState;

fn family_name(alias: &str) -> &str {
    match alias {
        "table" | "discrete" | "discrete_table" => "discrete_table",
        "point" | "point_mass" | "pointmass" => "point_mass",
        "gaussian" | "gaussian_mv" | "normal" => "gaussian",
        other => other,
    }
}

fn scalar(text: &str) -> Result<Value, String> {
    let t = text.trim();
    if let Ok(u) = t.parse::<u64>() {
        return Ok(json!(u));
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(json!(v)),
        _ => Err(format!("`{t}` is not a finite number")),
    }
}

fn value(text: &str) -> Result<Value, String> {
    if text.contains(';') {
        text.split(';')
            .filter(|s| !s.trim().is_empty())
            .map(scalar)
            .collect::<Result<Vec<_>, _>>()
            .map(Value::Array)
    } else {
        scalar(text)
    }
}

/// Diagonal covariance from a list, identity-free scalar otherwise.
fn gaussian_params(mut params: Map<String, Value>) -> Map<String, Value> {
    if let Some(Value::Array(diag)) = params.get("cov").cloned() {
        let n = diag.len();
        let rows: Vec<Value> = (0..n)
            .map(|i| {
                Value::Array(
                    (0..n)
                        .map(|j| if i == j { diag[i].clone() } else { json!(0.0) })
                        .collect(),
                )
            })
            .collect();
        params.insert("cov".into(), Value::Array(rows));
    }
    params
}

/// Grammar string to JSON value of a [`KnowledgeState`].
pub fn state_value(text: &str) -> Result<Value, String> {
    let (family, rest) = text
        .split_once(':')
        .ok_or_else(|| format!("`{text}`: expected family:key=value,..."))?;
    let family = family_name(family.trim());
    let mut params = Map::new();
    for pair in rest.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| format!("`{pair}`: expected key=value"))?;
        let mut key = k.trim().to_string();
        if family == "discrete_table" && (key == "p" || key == "probs") {
            key = "probabilities".into();
        }
        let mut parsed = value(v).map_err(|e| format!("{key}: {e}"))?;
        if family == "discrete_table" && !parsed.is_array() {
            parsed = Value::Array(vec![parsed]);
        }
        params.insert(key, parsed);
    }
    if family == "gaussian" {
        params = gaussian_params(params);
    }
    Ok(json!({ "family": family, "params": params }))
}

/// A state from a grammar string or a JSON object; validated.
pub fn parse_state(spec: &Value) -> Result<KnowledgeState, String> {
    let v = match spec {
        Value::String(s) => state_value(s)?,
        Value::Object(_) => spec.clone(),
        other => return Err(format!("expected a state string or object, got {other}")),
    };
    let state: KnowledgeState = serde_json::from_value(v).map_err(|e| e.to_string())?;
    state.validate().map_err(|e| e.to_string())?;
    Ok(state)
}
