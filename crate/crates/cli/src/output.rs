//! Report and trajectory emission: CSV tables with shortest round-trip
//! decimals, and minimal SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

/// Shortest round-trip decimal; this is what keeps golden files stable.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

/// FNV-1a hash of the raw configuration bytes, recorded in every report.
pub fn config_hash(bytes: &[u8]) -> String {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut state = OFFSET;
    for &b in bytes {
        state ^= u64::from(b);
        state = state.wrapping_mul(PRIME);
    }
    format!("{state:016x}")
}

/// Ordered name/value rows; insertion order is the file order.
#[derive(Debug, Default)]
pub struct Report {
    rows: Vec<(String, String)>,
}

impl Report {
    pub fn new(scenario: &str, config_bytes: &[u8]) -> Self {
        let mut report = Report::default();
        report.push_str("library_version", fvp_core::VERSION);
        report.push_str("config_hash", config_hash(config_bytes));
        report.push_str("scenario", scenario);
        report
    }

    pub fn push_str(&mut self, name: &str, value: impl Into<String>) {
        self.rows.push((name.into(), value.into()));
    }

    pub fn push(&mut self, name: &str, value: f64) {
        self.rows.push((name.into(), fmt_f64(value)));
    }

    pub fn push_int(&mut self, name: &str, value: usize) {
        self.rows.push((name.into(), value.to_string()));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = String::from("name,value\n");
        for (name, value) in &self.rows {
            writeln!(text, "{name},{value}").expect("string write");
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Generic CSV table with a fixed header.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Minimal deterministic SVG polyline plot.
pub fn line_plot(title: &str, xs: &[f64], ys: &[f64]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 48.0;
    let finite = |v: &&f64| v.is_finite();
    let x_min = xs.iter().filter(finite).cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().filter(finite).cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_min = ys.iter().filter(finite).cloned().fold(f64::INFINITY, f64::min);
    let y_max = ys.iter().filter(finite).cloned().fold(f64::NEG_INFINITY, f64::max);
    let x_span = (x_max - x_min).max(1e-300);
    let y_span = (y_max - y_min).max(1e-300);
    let mut points = String::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if !x.is_finite() || !y.is_finite() {
            continue;
        }
        let px = M + (x - x_min) / x_span * (W - 2.0 * M);
        let py = H - M - (y - y_min) / y_span * (H - 2.0 * M);
        write!(points, "{:.2},{:.2} ", px, py).expect("string write");
    }
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 400\">\n",
            "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n",
            "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
            "<line x1=\"48\" y1=\"352\" x2=\"592\" y2=\"352\" stroke=\"black\"/>\n",
            "<line x1=\"48\" y1=\"48\" x2=\"48\" y2=\"352\" stroke=\"black\"/>\n",
            "<text x=\"48\" y=\"372\" font-size=\"10\">{x0}</text>\n",
            "<text x=\"592\" y=\"372\" text-anchor=\"end\" font-size=\"10\">{x1}</text>\n",
            "<text x=\"44\" y=\"352\" text-anchor=\"end\" font-size=\"10\">{y0}</text>\n",
            "<text x=\"44\" y=\"52\" text-anchor=\"end\" font-size=\"10\">{y1}</text>\n",
            "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{points}\"/>\n",
            "</svg>\n",
        ),
        title = title,
        x0 = fmt_f64(x_min),
        x1 = fmt_f64(x_max),
        y0 = fmt_f64(y_min),
        y1 = fmt_f64(y_max),
        points = points.trim_end(),
    )
}
