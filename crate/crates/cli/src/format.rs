//! Fixed-precision number rendering and a pretty JSON writer built on it.

use serde::Serialize;
use serde_json::Value;

/// Significant digits used for JSON numbers.
pub const JSON_DIGITS: usize = 17;
/// Significant digits used for CSV fields.
pub const CSV_DIGITS: usize = 12;
/// Significant digits used for SVG coordinates.
pub const SVG_DIGITS: usize = 9;

/// Renders `x` with `digits` significant digits, dropping trailing zeros.
///
/// Positional notation is used for decimal exponents in `-5..digits`, scientific notation
/// otherwise. Non-finite values render as `NaN`, `inf` or `-inf`.
pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let s = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant),
    };
    let mut ds: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    while ds.len() > 1 && ds.ends_with('0') {
        ds.pop();
    }
    let sign = if neg { "-" } else { "" };
    if exp < -5 || exp >= digits as i32 {
        let (head, tail) = ds.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        return format!("{sign}0.{zeros}{ds}");
    }
    let int_len = exp as usize + 1;
    if ds.len() <= int_len {
        format!("{sign}{ds}{}", "0".repeat(int_len - ds.len()))
    } else {
        format!("{sign}{}.{}", &ds[..int_len], &ds[int_len..])
    }
}

/// Pretty JSON with every float written to [`JSON_DIGITS`] significant digits and
/// non-finite floats written as `null`.
pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_u64() || n.is_i64() {
                out.push_str(&n.to_string());
            } else {
                match n.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&sig(x, JSON_DIGITS)),
                    _ => out.push_str("null"),
                }
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(indent + 1, out);
                write_value(item, indent + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(indent + 1, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(item, indent + 1, out);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

fn pad(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}
