//! Blanks wall-clock timings so reports from repeated runs can be compared
//! byte for byte.
//!
//! * JSON: every value whose key ends in `_seconds` becomes `null`.
//! * CSV: every column whose header ends in `_seconds` is emptied.
//! * Text tables: cells under a header containing `(sec)` become `*`.

use serde_json::Value;

fn mask_json_value(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for (k, child) in map.iter_mut() {
                if k.ends_with("_seconds") {
                    *child = Value::Null;
                } else {
                    mask_json_value(child);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(mask_json_value),
        _ => {}
    }
}

pub fn mask_json(text: &str) -> Result<String, serde_json::Error> {
    let mut v: Value = serde_json::from_str(text)?;
    mask_json_value(&mut v);
    serde_json::to_string_pretty(&v)
}

pub fn mask_csv(text: &str) -> String {
    let mut masked: Option<Vec<bool>> = None;
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        if line.starts_with('#') {
            out.push_str(line);
        } else if let Some(cols) = &masked {
            let cells: Vec<&str> = line
                .split(',')
                .enumerate()
                .map(|(i, c)| if cols.get(i).copied().unwrap_or(false) { "" } else { c })
                .collect();
            out.push_str(&cells.join(","));
        } else {
            masked = Some(line.split(',').map(|h| h.ends_with("_seconds")).collect());
            out.push_str(line);
        }
        out.push('\n');
    }
    out
}

/// Cells of an aligned text row; columns are at least two spaces apart.
fn cells(line: &str) -> Vec<&str> {
    line.split("  ").map(str::trim).filter(|c| !c.is_empty()).collect()
}

pub fn mask_text(text: &str) -> String {
    let mut masked: Option<Vec<bool>> = None;
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        if line.trim().is_empty() {
            masked = None;
            out.push_str(line);
        } else if line.contains("(sec)") {
            masked = Some(cells(line).iter().map(|c| c.contains("(sec)")).collect());
            out.push_str(line);
        } else if let Some(cols) = masked.as_ref().filter(|_| !line.chars().all(|c| c == '-')) {
            let row: Vec<&str> = cells(line)
                .into_iter()
                .enumerate()
                .map(|(i, c)| if cols.get(i).copied().unwrap_or(false) { "*" } else { c })
                .collect();
            out.push_str(&row.join("  "));
        } else {
            out.push_str(line);
        }
        out.push('\n');
    }
    out
}

/// Masks a report according to its file extension; other files pass through.
pub fn mask_timing(file_name: &str, text: &str) -> String {
    if file_name.ends_with(".json") {
        mask_json(text).unwrap_or_else(|_| text.to_string())
    } else if file_name.ends_with(".csv") {
        mask_csv(text)
    } else if file_name.ends_with(".txt") {
        mask_text(text)
    } else {
        text.to_string()
    }
}
