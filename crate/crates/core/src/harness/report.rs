use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::SweepKind;
use super::HarnessError;
use crate::allocation::AssignmentMethod;

pub const CSV_HEADER: [&str; 8] = [
    "method",
    "sweep",
    "sweep_value",
    "snr_db",
    "mean_wsr",
    "std_error",
    "samples",
    "mean_iters",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: AssignmentMethod,
    pub sweep: SweepKind,
    pub sweep_value: f64,
    pub snr_db: f64,
    /// bits/s/Hz
    pub mean_wsr: f64,
    pub std_error: f64,
    pub samples: usize,
    pub mean_iters: f64,
}

/// Rounds to 6 significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

impl MetricRow {
    fn rounded(&self) -> Self {
        Self {
            sweep_value: round_sig6(self.sweep_value),
            snr_db: round_sig6(self.snr_db),
            mean_wsr: round_sig6(self.mean_wsr),
            std_error: round_sig6(self.std_error),
            mean_iters: round_sig6(self.mean_iters),
            ..self.clone()
        }
    }
}

/// Aggregated results, kept sorted by method, sweep value, then SNR.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsTable {
    rows: Vec<MetricRow>,
}

impl MetricsTable {
    pub fn new(mut rows: Vec<MetricRow>) -> Self {
        rows.sort_by(|a, b| {
            a.method
                .name()
                .cmp(b.method.name())
                .then(a.sweep_value.total_cmp(&b.sweep_value))
                .then(a.snr_db.total_cmp(&b.snr_db))
        });
        Self { rows }
    }

    pub fn rows(&self) -> &[MetricRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The table as it reads back from CSV.
    pub fn rounded(&self) -> Self {
        Self {
            rows: self.rows.iter().map(MetricRow::rounded).collect(),
        }
    }

    pub fn filter_method(&self, method: AssignmentMethod) -> Vec<&MetricRow> {
        self.rows.iter().filter(|r| r.method == method).collect()
    }
}

pub fn write_csv<W: Write>(table: &MetricsTable, out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in table.rows() {
        w.serialize(row.rounded())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(table: &MetricsTable, path: &Path) -> Result<(), HarnessError> {
    write_csv(table, BufWriter::new(File::create(path)?))
}

pub fn read_csv(path: &Path) -> Result<MetricsTable, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<MetricRow>, _>>()?;
    Ok(MetricsTable::new(rows))
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// One plotted line: legend label and its points.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Groups rows into series keyed by method and, except for SNR sweeps, SNR.
pub fn plot_series(table: &MetricsTable, kind: SweepKind) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    for row in table.rows().iter().filter(|r| r.sweep == kind) {
        let label = match kind {
            SweepKind::Snr => row.method.short_name().to_uppercase(),
            _ => format!("{}, {} dB", row.method.short_name().to_uppercase(), row.snr_db),
        };
        let point = (row.sweep_value, row.mean_wsr);
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(point),
            None => series.push(Series {
                label,
                points: vec![point],
            }),
        }
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    series
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    let pad = if span > 0.0 {
        0.05 * span
    } else if lo != 0.0 {
        0.05 * lo.abs()
    } else {
        1.0
    };
    (lo - pad, hi + pad)
}

/// `((x_lo, x_hi), (y_lo, y_hi))`: data extent widened by 5% on each side.
pub fn plot_ranges(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let pts = series.iter().flat_map(|s| &s.points);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        return ((0.0, 1.0), (0.0, 1.0));
    }
    (padded(x0, x1), padded(y0, y1))
}

fn axis_labels(kind: SweepKind) -> (&'static str, &'static str) {
    let y = "Weighted sum rate (bits/s/Hz)";
    match kind {
        SweepKind::Iterations => ("Iterations", y),
        SweepKind::Snr => ("SNR (dB)", y),
        SweepKind::Users => ("Number of users", y),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the line chart for `kind` as standalone SVG text.
pub fn render_svg(table: &MetricsTable, kind: SweepKind) -> String {
    let series = plot_series(table, kind);
    let ((x0, x1), (y0, y1)) = plot_ranges(&series);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;
    let (xlabel, ylabel) = axis_labels(kind);

    let mut s = String::new();
    // Writing to a String cannot fail.
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.2}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.2}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{ylabel}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 25.0,
            lx + 30.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_plot(table: &MetricsTable, kind: SweepKind, path: &Path) -> Result<(), HarnessError> {
    if table.is_empty() {
        return Err(HarnessError::Config("cannot plot an empty table".into()));
    }
    std::fs::write(path, render_svg(table, kind))?;
    Ok(())
}
