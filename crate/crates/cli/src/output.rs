use serde::Serialize;

use crate::Format;

/// One command's result in all three renderings.
pub struct Rendered {
    pub text: String,
    pub json: serde_json::Value,
    pub csv: Vec<Vec<String>>,
}

impl Rendered {
    pub fn new<T: Serialize>(value: &T, text: String, csv: Vec<Vec<String>>) -> Self {
        Self {
            text,
            json: serde_json::to_value(value).expect("reports serialize"),
            csv,
        }
    }

    pub fn print(&self, format: Format) {
        match format {
            Format::Text => print!("{}", self.text),
            Format::Json => println!("{}", serde_json::to_string_pretty(&self.json).expect("json")),
            Format::Csv => {
                for row in &self.csv {
                    let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
                    println!("{}", cells.join(","));
                }
            }
        }
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

pub fn opt(v: &Option<String>) -> String {
    v.clone().unwrap_or_default()
}

pub fn log10(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.2}"),
        Some(_) => "-inf".into(),
        None => String::new(),
    }
}

/// Rounded to hundredths so that reruns print identical text.
pub fn round2(x: f64) -> f64 {
    if x.is_finite() {
        (x * 100.0).round() / 100.0
    } else {
        x
    }
}

/// Left-aligned table with a header row.
pub fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{s:<w$}", w = widths[i]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
