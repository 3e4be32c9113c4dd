use ncn::theory::{compute_bounds, IterationBounds, TheoryConstants};
use serde_json::Value;

use crate::CliError;

/// Lays a JSON object of constants over `base`.
pub fn constants_with_overlay(base: &TheoryConstants, overlay: Value) -> Result<TheoryConstants, CliError> {
    let mut v = serde_json::to_value(base).expect("constants serialize");
    match (&mut v, overlay) {
        (Value::Object(b), Value::Object(o)) => b.extend(o),
        _ => return Err(CliError::Config("bounds config must be a JSON object".into())),
    }
    serde_json::from_value(v).map_err(|e| CliError::Config(e.to_string()))
}

pub fn cmd_bounds(c: &TheoryConstants) -> Result<IterationBounds, CliError> {
    compute_bounds(c).map_err(|e| CliError::Config(e.to_string()))
}

pub fn bounds_json(b: &IterationBounds) -> String {
    serde_json::to_string_pretty(b).expect("bounds serialize")
}
