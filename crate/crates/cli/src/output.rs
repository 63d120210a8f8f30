use std::fmt::Write as _;

use radex::{ExtendedReal, Schedule64};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Rounds to 12 significant digits; `-0` becomes `0`.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn json_num(x: f64) -> Value {
    if x.is_nan() {
        Value::from("nan")
    } else if x == f64::INFINITY {
        Value::from("inf")
    } else if x == f64::NEG_INFINITY {
        Value::from("-inf")
    } else {
        Value::from(round12(x))
    }
}

pub fn json_ext(x: ExtendedReal<f64>) -> Value {
    json_num(x.to_f64())
}

pub fn json_vec(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| json_num(*x)).collect())
}

pub fn csv_num(x: f64) -> String {
    if x.is_nan() {
        "NAN".into()
    } else if x == f64::INFINITY {
        "INF".into()
    } else if x == f64::NEG_INFINITY {
        "-INF".into()
    } else {
        format!("{:?}", round12(x))
    }
}

/// Coordinates joined with `;` so vectors stay in one CSV field.
pub fn csv_vec(v: &[f64]) -> String {
    v.iter().map(|x| csv_num(*x)).collect::<Vec<_>>().join(";")
}

/// Quotes a field when it holds a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A CSV table with a fixed header.
pub struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| csv_field(c)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

pub fn schedule_json(s: &Schedule64) -> Value {
    json!({
        "t_min": json_num(s.t_min),
        "t_max": json_num(s.t_max),
        "points_per_decade": s.points_per_decade,
        "shrink_ladder": json_vec(&s.shrink_ladder),
        "perturbations_per_shell": s.perturbations_per_shell,
        "neighborhood_samples": s.neighborhood_samples,
        "window_ratio": json_num(s.window_ratio),
        "window_points": s.window_points,
        "direction_grid": Value::Array(s.direction_grid.iter().map(|h| json_vec(h)).collect()),
        "refine_rounds": s.refine_rounds,
        "divergence_threshold": json_num(s.divergence_threshold),
        "tol": json_num(s.tol),
    })
}

/// `{config, results, provenance}` with a trailing newline.
pub fn document(config: Map<String, Value>, results: Vec<Value>, schedule: &Schedule64) -> String {
    let doc = json!({
        "config": Value::Object(config),
        "results": results,
        "provenance": {
            "version": env!("CARGO_PKG_VERSION"),
            "schedule": schedule_json(schedule),
        },
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    s
}
