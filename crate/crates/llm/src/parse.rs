//! Decision extraction from model responses.
//!
//! Models often wrap the requested object in prose, so the parser scans for
//! the first well-formed key/value object carrying numeric 'work' and
//! 'consumption' entries, validates both into [0, 1], and snaps them to the
//! 0.02 grid the prompt declares (ties away from zero).

use econ_core::policies::PolicyDecision;
use econ_core::scalar::{real, Real};

use crate::error::{LlmError, Result};

/// Snap a unit-interval value to the nearest multiple of 0.02.
pub fn snap_to_grid(x: f64) -> f64 {
    (x * 50.0).round() / 50.0
}

pub fn parse_decision<T: Real>(response: &str) -> Result<PolicyDecision<T>> {
    let mut saw_object = false;
    let mut missing_key: Option<&'static str> = None;
    for candidate in candidates(response) {
        let object = match parse_object(&candidate) {
            Some(object) => object,
            None => continue,
        };
        saw_object = true;
        let work = object.get("work").and_then(number);
        let consumption = object.get("consumption").and_then(number);
        match (work, consumption) {
            (Some(work), Some(consumption)) => {
                for (key, value) in [("work", work), ("consumption", consumption)] {
                    if !(0.0..=1.0).contains(&value) {
                        return Err(LlmError::Parse {
                            message: format!("{key} value {value} outside [0, 1]"),
                            raw: response.to_string(),
                        });
                    }
                }
                return Ok(PolicyDecision {
                    work_propensity: real(snap_to_grid(work)),
                    consumption_propensity: real(snap_to_grid(consumption)),
                });
            }
            (None, Some(_)) => missing_key = Some("work"),
            (Some(_), None) => missing_key = Some("consumption"),
            (None, None) => {
                if missing_key.is_none() {
                    missing_key = Some("work");
                }
            }
        }
    }
    let message = match (saw_object, missing_key) {
        (true, Some(key)) => format!("no object with both keys; {key:?} missing"),
        (true, None) => "no object with both keys".to_string(),
        (false, _) => "no parseable key/value object in response".to_string(),
    };
    Err(LlmError::Parse { message, raw: response.to_string() })
}

/// Depth-matched `{...}` spans, string-aware, in order of appearance.
fn candidates(text: &str) -> Vec<String> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut start = None;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => {
                if depth == 0 {
                    start = Some(i);
                }
                depth += 1;
            }
            b'}' if depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    if let Some(s) = start.take() {
                        spans.push(text[s..=i].to_string());
                    }
                }
            }
            _ => {}
        }
    }
    spans
}

fn parse_object(candidate: &str) -> Option<serde_json::Map<String, serde_json::Value>> {
    if let Ok(serde_json::Value::Object(map)) = serde_json::from_str(candidate) {
        return Some(map);
    }
    // Tolerate single-quoted keys/values.
    if candidate.contains('\'') {
        let swapped = candidate.replace('\'', "\"");
        if let Ok(serde_json::Value::Object(map)) = serde_json::from_str(&swapped) {
            return Some(map);
        }
    }
    None
}

fn number(value: &serde_json::Value) -> Option<f64> {
    value.as_f64()
}
