//! Result documents: JSON with reals rounded to six significant digits,
//! flat CSV tables, and trajectory plots.

use std::fmt::Write as _;

use serde_json::Value;

/// Round to six significant digits. Zero and non-finite values pass through.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Round every floating-point number inside `value`; integers are left alone.
pub fn round_reals(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *value = Value::from(round_sig6(x));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_reals),
        Value::Object(map) => map.values_mut().for_each(round_reals),
        _ => {}
    }
}

/// A flat table for `--format csv`. Cells keep full precision.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Format a real for CSV: shortest round-trip representation, empty for
/// non-finite values.
pub fn cell(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else {
        String::new()
    }
}

/// A command's result in both output formats.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub table: Table,
}

impl Report {
    pub fn render_json(&self) -> String {
        let mut json = self.json.clone();
        round_reals(&mut json);
        let mut text = serde_json::to_string_pretty(&json).expect("JSON values always serialize");
        text.push('\n');
        text
    }
}

/// One plotted series: a trajectory of (n, L_n).
#[derive(Debug, Clone)]
pub struct Series {
    pub label: Option<String>,
    pub points: Vec<(u32, f64)>,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub series: Vec<Series>,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub n_max: u32,
}

impl Plot {
    /// CSV with columns n,L,A,B,gamma, plus a side column when several
    /// series are present.
    pub fn csv(&self) -> String {
        let labelled = self.series.len() > 1;
        let mut out = String::from("n,L,A,B,gamma");
        if labelled {
            out.push_str(",side");
        }
        out.push('\n');
        for s in &self.series {
            for &(n, l) in &s.points {
                let _ = write!(
                    out,
                    "{n},{},{},{},{}",
                    cell(l),
                    cell(self.a),
                    cell(self.b),
                    cell(self.gamma)
                );
                if labelled {
                    let _ = write!(out, ",{}", s.label.as_deref().unwrap_or(""));
                }
                out.push('\n');
            }
        }
        out
    }

    /// A self-contained SVG of log₁₀ L against n with the A, B and γ lines.
    pub fn svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const LEFT: f64 = 60.0;
        const RIGHT: f64 = 20.0;
        const TOP: f64 = 20.0;
        const BOTTOM: f64 = 40.0;
        const COLORS: [&str; 2] = ["#1f77b4", "#d62728"];

        let log = |v: f64| v.max(f64::MIN_POSITIVE).log10();
        let mut lo = log(self.b).min(0.0);
        let mut hi = log(self.a).max(0.0);
        if self.gamma.is_finite() {
            lo = lo.min(log(self.gamma));
            hi = hi.max(log(self.gamma));
        }
        for s in &self.series {
            for &(_, l) in &s.points {
                if l.is_finite() {
                    lo = lo.min(log(l));
                    hi = hi.max(log(l));
                }
            }
        }
        let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));
        let n_max = f64::from(self.n_max.max(1));
        let x = |n: f64| LEFT + (W - LEFT - RIGHT) * n / n_max;
        let y = |v: f64| TOP + (H - TOP - BOTTOM) * (hi - log(v).clamp(lo, hi)) / (hi - lo);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r##"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
            W - LEFT - RIGHT,
            H - TOP - BOTTOM
        );
        let mut e = lo as i32;
        while f64::from(e) <= hi {
            let yy = y(10f64.powi(e));
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{:.1}" text-anchor="end" dominant-baseline="middle">1e{e}</text>"#,
                LEFT - 6.0,
                yy
            );
            e += 1;
        }
        let _ = writeln!(
            out,
            r#"<text x="{LEFT}" y="{}" text-anchor="middle">0</text><text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            H - BOTTOM + 16.0,
            x(n_max),
            H - BOTTOM + 16.0,
            self.n_max
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">n</text>"#,
            (LEFT + W - RIGHT) / 2.0,
            H - 8.0
        );
        let mut hline = |v: f64, label: &str, dash: &str| {
            let yy = y(v);
            let _ = writeln!(
                out,
                r##"<line x1="{LEFT}" x2="{}" y1="{yy:.1}" y2="{yy:.1}" stroke="#444" stroke-dasharray="{dash}"/><text x="{}" y="{:.1}" text-anchor="end">{label}</text>"##,
                W - RIGHT,
                W - RIGHT - 4.0,
                yy - 4.0
            );
        };
        hline(self.a, "A", "6 3");
        hline(self.b, "B", "6 3");
        if self.gamma.is_finite() {
            hline(self.gamma, "γ", "2 3");
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(n, l)| format!("{:.1},{:.1}", x(f64::from(n)), y(l)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
            for p in &pts {
                let (px, py) = p.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(out, r#"<circle cx="{px}" cy="{py}" r="2.5" fill="{color}"/>"#);
            }
            if let (Some(label), Some(p)) = (&s.label, pts.last()) {
                let (px, py) = p.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(out, r#"<text x="{px}" y="{py}" dx="4" fill="{color}">{label}</text>"#);
            }
        }
        out.push_str("</svg>\n");
        out
    }
}
