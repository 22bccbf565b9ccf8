//! Deterministic JSON text: sorted keys, two-space indent, arrays of scalars
//! on one line, and a fixed float style.

use serde_json::Value;

use crate::linalg::Matrix;
use crate::spectrum::SpectrumMultiset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloatStyle {
    /// 17 significant digits in scientific notation, e.g. `-2.0000000000000000e1`.
    Sci17,
    /// Shortest text that parses back to the same `f64`.
    Shortest,
}

fn fmt_f64(x: f64, style: FloatStyle) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    let x = if x == 0.0 { 0.0 } else { x };
    match style {
        FloatStyle::Sci17 => format!("{x:.16e}"),
        FloatStyle::Shortest => {
            let s = format!("{x:?}");
            if s.contains(['.', 'e', 'E']) {
                s
            } else {
                format!("{s}.0")
            }
        }
    }
}

fn scalar(v: &Value, style: FloatStyle) -> Option<String> {
    match v {
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(if n.is_f64() {
            fmt_f64(n.as_f64().unwrap_or(f64::NAN), style)
        } else {
            n.to_string()
        }),
        Value::String(s) => Some(serde_json::to_string(s).expect("string serializes")),
        _ => None,
    }
}

fn write(v: &Value, style: FloatStyle, indent: usize, out: &mut String) {
    if let Some(s) = scalar(v, style) {
        out.push_str(&s);
        return;
    }
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(|x| scalar(x, style).is_some()) => {
            let parts: Vec<String> = items.iter().filter_map(|x| scalar(x, style)).collect();
            out.push('[');
            out.push_str(&parts.join(", "));
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad);
                write(x, style, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                write(&map[*k], style, indent + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        _ => unreachable!("scalars handled above"),
    }
}

/// Render `v` with a trailing newline.
pub fn to_canonical(v: &Value, style: FloatStyle) -> String {
    let mut out = String::new();
    write(v, style, 0, &mut out);
    out.push('\n');
    out
}

/// Row-major nested arrays.
pub fn matrix(m: &Matrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| num(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Sorted `[re, im]` pairs.
pub fn spectrum(s: &SpectrumMultiset) -> Value {
    Value::Array(
        s.sorted()
            .into_iter()
            .map(|z| Value::Array(vec![num(z.re), num(z.im)]))
            .collect(),
    )
}
