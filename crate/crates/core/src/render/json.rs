use serde_json::Value;

use crate::error::{Error, Result};
use crate::typeset::layout::LayoutDocument;

/// Fixed three-decimal rendering; negative zero prints as zero.
pub fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Writes a JSON value with sorted keys, two-space indentation and floats
/// at three decimals.
pub fn write_value(v: &Value, out: &mut String, depth: usize) {
    let pad = |out: &mut String, d: usize| {
        out.push('\n');
        for _ in 0..d {
            out.push_str("  ");
        }
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt3(n.as_f64().unwrap_or(0.0)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                pad(out, depth + 1);
                write_value(x, out, depth + 1);
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(o) => {
            if o.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = o.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                pad(out, depth + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(&o[k.as_str()], out, depth + 1);
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

/// Canonical layout text: byte-identical for equal documents.
pub fn write_layout_json(doc: &LayoutDocument) -> String {
    let value = serde_json::to_value(doc).expect("layout serializes");
    let mut out = String::new();
    write_value(&value, &mut out, 0);
    out.push('\n');
    out
}

pub fn parse_layout_json(text: &str) -> Result<LayoutDocument> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        what: "layout file",
        message: e.to_string(),
    })
}
