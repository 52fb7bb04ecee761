//! Deterministic rendering of reports.
//!
//! Floats use the shortest representation that round-trips (`1.0`, `0.1`,
//! `1e-7`); negative zero prints as `0.0`.

use serde::Serialize;
use serde_json::Value;

use dfchannel_core::CharGrid;

use crate::CliError;

pub const CHARFUNC_HEADER: &str = "beta1_re,beta1_im,beta2_re,beta2_im,value_re,value_im";

pub fn float(x: f64) -> String {
    if x == 0.0 {
        "0.0".to_string()
    } else {
        format!("{x:?}")
    }
}

pub fn json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| CliError::io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn charfunc_csv(grid: &CharGrid) -> String {
    let mut out = String::from(CHARFUNC_HEADER);
    out.push('\n');
    for s in &grid.samples {
        let cols = [s.beta1.re, s.beta1.im, s.beta2.re, s.beta2.im, s.value.re, s.value.im];
        let row: Vec<String> = cols.iter().map(|&x| float(x)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => float(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        _ => unreachable!("containers are flattened"),
    }
}

/// Flattens nested objects into dotted keys; a two-number array is a
/// complex value and becomes `_re` / `_im`.
pub fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(items) if items.len() == 2 && items.iter().all(Value::is_number) => {
            out.push((format!("{prefix}_re"), scalar(&items[0])));
            out.push((format!("{prefix}_im"), scalar(&items[1])));
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

/// Two-column `key,value` table of a whole document.
pub fn key_value_csv<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let value = serde_json::to_value(doc).map_err(|e| CliError::io(e.to_string()))?;
    let mut pairs = Vec::new();
    flatten("", &value, &mut pairs);
    let mut out = String::from("key,value\n");
    for (k, v) in pairs {
        out.push_str(&format!("{k},{}\n", quote(&v)));
    }
    Ok(out)
}

/// One row per sweep point: the swept value, then the flattened report
/// (columns taken from the first point).
pub fn table_csv(records: &[(f64, Value)]) -> String {
    let rows: Vec<Vec<(String, String)>> = records
        .iter()
        .map(|(x, r)| {
            let mut pairs = vec![("value".to_string(), float(*x))];
            flatten("", r, &mut pairs);
            pairs
        })
        .collect();
    let Some(first) = rows.first() else {
        return String::new();
    };
    let header: Vec<&str> = first.iter().map(|(k, _)| k.as_str()).collect();
    let mut out = header.join(",");
    out.push('\n');
    for row in &rows {
        let cells: Vec<String> = row.iter().map(|(_, v)| quote(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats() {
        assert_eq!(float(1.0), "1.0");
        assert_eq!(float(-0.0), "0.0");
        assert_eq!(float(0.1), "0.1");
        assert_eq!(float(1e-7), "1e-7");
        let x = std::f64::consts::PI;
        assert_eq!(float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn flattening() {
        let v = json!({"a": {"b": 1.5, "c": [0.25, -1.0]}, "d": "x", "e": null, "k": 3});
        let mut out = Vec::new();
        flatten("", &v, &mut out);
        let keys: Vec<&str> = out.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["a.b", "a.c_re", "a.c_im", "d", "e", "k"]);
        assert_eq!(out[2].1, "-1.0");
        assert_eq!(out[5].1, "3");
    }
}
