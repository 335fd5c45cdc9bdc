//! CSV, JSON and SVG emission. All formatting is fixed so identical inputs
//! produce identical bytes.

use std::fmt::Write as _;

use dmojc::oracle::Check;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Result of one subcommand, independent of the output format.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub plot: Option<Plot>,
    /// Extra top-level JSON entries, written after the standard three.
    pub extra: Vec<(&'static str, Value)>,
}

impl Output {
    pub fn new(header: Vec<&'static str>) -> Self {
        Output {
            header,
            rows: Vec::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
            plot: None,
            extra: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn to_csv(out: &Output) -> String {
    let mut s = out.header.join(",");
    s.push('\n');
    for row in &out.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn to_json(cfg: &RunConfig, out: &Output) -> String {
    let mut config = serde_json::to_value(cfg).expect("config serializes");
    if !out.warnings.is_empty() {
        config["warnings"] = json!(out.warnings);
    }
    let rows: Vec<Value> = out
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = out
                .header
                .iter()
                .zip(row)
                .map(|(k, c)| (k.to_string(), c.json()))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let mut top = Map::new();
    top.insert("config".into(), config);
    top.insert("rows".into(), Value::Array(rows));
    top.insert("checks".into(), serde_json::to_value(&out.checks).expect("checks serialize"));
    for (k, v) in &out.extra {
        top.insert(k.to_string(), v.clone());
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("json");
    s.push('\n');
    s
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Minimal line plot: frame, axis ranges, one polyline per series, legend.
pub fn to_svg(plot: &Plot) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 50.0);
    let pts = plot.series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, left + pw / 2.0, escape(&plot.title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, left + pw / 2.0, h - 12.0, escape(&plot.x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(&plot.y_label)
    );
    for (v, x, y, anchor) in [
        (x0, sx(x0), top + ph + 16.0, "start"),
        (x1, sx(x1), top + ph + 16.0, "end"),
    ] {
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="11">{v:.4}</text>"#);
    }
    for (v, y) in [(y0, sy(y0)), (y1, sy(y1) + 10.0)] {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" font-size="11">{v:.4}</text>"#, left - 4.0);
    }
    for (i, series) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = series
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, path.join(" "));
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = w - right + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">{}</text>"#, lx + 26.0, ly + 4.0, escape(&series.name));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_cells() {
        assert_eq!(Cell::Num(0.1).csv(), "1.0000000000000001e-1");
        assert_eq!(Cell::Num(-2.0).csv(), "-2.0000000000000000e0");
        assert_eq!(Cell::Text("a,b".into()).csv(), "\"a,b\"");
        assert_eq!(Cell::Text("say \"hi\", ok".into()).csv(), "\"say \"\"hi\"\", ok\"");
        assert_eq!(Cell::Empty.csv(), "");
    }

    #[test]
    fn csv_round_trips_f64() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-7, -123456.789, f64::MIN_POSITIVE] {
            let back: f64 = Cell::Num(x).csv().parse().unwrap();
            assert_eq!(back, x);
        }
    }

    #[test]
    fn json_shape() {
        let mut out = Output::new(vec!["a", "b"]);
        out.rows.push(vec![Cell::Num(1.5), Cell::Empty]);
        out.checks.push(Check::at_most("x", 0.0, 1.0));
        let v: Value = serde_json::from_str(&to_json(&RunConfig::default(), &out)).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["config", "rows", "checks"]);
        assert_eq!(v["rows"][0]["a"], json!(1.5));
        assert!(v["rows"][0]["b"].is_null());
        assert_eq!(v["checks"][0]["passed"], json!(true));
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let plot = Plot {
            title: "P <vs> t".into(),
            x_label: "t".into(),
            y_label: "P".into(),
            series: vec![Series {
                name: "a".into(),
                points: vec![(0.0, 1.0), (1.0, 0.5)],
            }],
        };
        let s = to_svg(&plot);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("P &lt;vs&gt; t"));
        assert_eq!(s.matches("<polyline").count(), 1);
    }
}
