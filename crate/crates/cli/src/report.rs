//! Deterministic report rendering: object keys sorted, floats in
//! 17-significant-digit exponent form, non-finite floats as null.

use std::fmt::Write;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u64 = 1;

/// Converts any serializable value; non-finite floats become null.
pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn float(f: f64) -> String {
    if f.is_finite() {
        format!("{f:.16e}")
    } else {
        "null".into()
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.to_string(),
            (_, Some(u)) => u.to_string(),
            _ => float(n.as_f64().expect("number is f64")),
        },
        other => other.to_string(),
    }
}

fn sorted(map: &serde_json::Map<String, Value>) -> Vec<(&String, &Value)> {
    let mut entries: Vec<_> = map.iter().collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    entries
}

fn write_json(v: &Value, out: &mut String) {
    match v {
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in sorted(map).into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_json(item, out);
            }
            out.push('}');
        }
        other => out.push_str(&scalar(other)),
    }
}

/// Single-line JSON followed by a newline.
pub fn render_json(v: &Value) -> String {
    let mut out = String::new();
    write_json(v, &mut out);
    out.push('\n');
    out
}

fn write_text(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, item) in sorted(map) {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                write_text(&path, item, out);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
            for (i, item) in items.iter().enumerate() {
                write_text(&format!("{prefix}[{i}]"), item, out);
            }
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            let _ = writeln!(out, "{prefix} = [{}]", parts.join(", "));
        }
        other => {
            let _ = writeln!(out, "{prefix} = {}", scalar(other));
        }
    }
}

/// One `path = value` line per leaf, in key order.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    write_text("", v, &mut out);
    out
}
