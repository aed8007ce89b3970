//! Minimal line and scatter charts.
//!
//! Every plotted point also carries its raw coordinates in `data-x` and
//! `data-y`, written in shortest round-trip form, so they parse back to
//! exactly the values in the CSV tables.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#555555"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Scatter,
    /// A single highlighted marker.
    Diamond,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, style: Style, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            style,
            points,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Default::default()
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn with(mut self, series: Series) -> Self {
        self.series.push(series);
        self
    }

    /// Whether `(x, y)` can be placed on the axes.
    pub fn plottable(&self, (x, y): (f64, f64)) -> bool {
        x.is_finite() && y.is_finite() && (!self.log_x || x > 0.0) && (!self.log_y || y > 0.0)
    }

    pub fn render(&self) -> String {
        let tx = |v: f64| if self.log_x { v.log10() } else { v };
        let ty = |v: f64| if self.log_y { v.log10() } else { v };
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|&p| self.plottable(p))
            .map(|(x, y)| (tx(x), ty(y)))
            .collect();
        let (x0, x1) = padded_range(pts.iter().map(|p| p.0));
        let (y0, y1) = padded_range(pts.iter().map(|p| p.1));
        let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
        let px = |x: f64| MARGIN + (tx(x) - x0) / (x1 - x0) * pw;
        let py = |y: f64| HEIGHT - MARGIN - (ty(y) - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for (lo, hi, log, horizontal) in [(x0, x1, self.log_x, true), (y0, y1, self.log_y, false)] {
            for j in 0..=4 {
                let v = lo + (hi - lo) * j as f64 / 4.0;
                let label = if log { format!("1e{v:.1}") } else { format!("{v:.3}") };
                if horizontal {
                    let x = MARGIN + pw * j as f64 / 4.0;
                    let _ = writeln!(
                        s,
                        r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#,
                        HEIGHT - MARGIN + 16.0
                    );
                } else {
                    let y = HEIGHT - MARGIN - ph * j as f64 / 4.0;
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{label}</text>"#,
                        MARGIN - 4.0
                    );
                }
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );

        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let shown: Vec<(f64, f64)> = series
                .points
                .iter()
                .copied()
                .filter(|&p| self.plottable(p))
                .collect();
            let _ = writeln!(
                s,
                r#"<g class="series" data-name="{}" data-omitted="{}">"#,
                escape(&series.name),
                series.points.len() - shown.len()
            );
            if series.style == Style::Line && shown.len() > 1 {
                let path: Vec<String> = shown
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                    .collect();
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    path.join(" ")
                );
            }
            for &(x, y) in &shown {
                let (cx, cy) = (px(x), py(y));
                match series.style {
                    Style::Diamond => {
                        let _ = writeln!(
                            s,
                            r#"<path d="M{:.2},{:.2} l6,6 l-6,6 l-6,-6 z" fill="none" stroke="black" stroke-width="1.5" data-x="{x:e}" data-y="{y:e}"/>"#,
                            cx,
                            cy - 6.0
                        );
                    }
                    _ => {
                        let r = if series.style == Style::Scatter { 2.0 } else { 0.8 };
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r}" fill="{color}" data-x="{x:e}" data-y="{y:e}"/>"#
                        );
                    }
                }
            }
            let ly = MARGIN + 16.0 * (k as f64 + 1.0);
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{}</text>"#,
                WIDTH - MARGIN - 150.0,
                escape(&series.name)
            );
            let _ = writeln!(s, "</g>");
        }
        s.push_str("</svg>\n");
        s
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// `(series name, [(x, y)])` pairs recovered from a rendered chart.
pub fn read_back(svg: &str) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut out: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for line in svg.lines() {
        if let Some(name) = attr(line, "data-name") {
            out.push((name.replace("&amp;", "&"), Vec::new()));
        } else if let (Some(x), Some(y)) = (attr(line, "data-x"), attr(line, "data-y")) {
            if let (Some(last), Ok(x), Ok(y)) = (out.last_mut(), x.parse(), y.parse()) {
                last.1.push((x, y));
            }
        }
    }
    out
}

fn attr(line: &str, key: &str) -> Option<String> {
    let start = line.find(&format!("{key}=\""))? + key.len() + 2;
    let len = line[start..].find('"')?;
    Some(line[start..start + len].to_string())
}
