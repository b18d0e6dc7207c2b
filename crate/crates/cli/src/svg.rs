//! Minimal static line plots. Coordinates are printed with fixed precision
//! so identical inputs give identical files.

use std::fmt::Write;

use nullflow_core::EstimateReport;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 7] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

impl LinePlot {
    pub fn render(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let (x0, x1) = range(pts().map(|p| p.0));
        let (y0, y1) = range(pts().map(|p| p.1));
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(&self.title));
        let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (x, y) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(x), TOP + ph + 16.0, tick(x));
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, sy(y) + 4.0, tick(y));
            let _ = writeln!(out, r##"<line x1="{LEFT}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="#dddddd"/>"##, LEFT + pw, sy(y), sy(y));
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let path: Vec<String> =
                s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{}"/>"#, path.join(" "));
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let lx = WIDTH - RIGHT + 10.0;
            let _ = writeln!(out, r#"<line x1="{lx}" x2="{:.2}" y1="{ly:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="1.5"{dash}/>"#, lx + 20.0);
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

/// Numerical radius against `√(R₀² − 2t)`.
pub fn radius_plot(times: &[f64], radius_sq: &[f64]) -> String {
    let r0_sq = radius_sq[0];
    let t0 = times[0];
    LinePlot {
        title: "Round sphere radius".into(),
        x_label: "t".into(),
        y_label: "r".into(),
        series: vec![
            Series { label: "numerical".into(), points: times.iter().zip(radius_sq).map(|(&t, &r)| (t, r.sqrt())).collect(), dashed: false },
            Series {
                label: "sqrt(R0^2 - 2t)".into(),
                points: times.iter().map(|&t| (t, (r0_sq - 2.0 * (t - t0)).max(0.0).sqrt())).collect(),
                dashed: true,
            },
        ],
    }
    .render()
}

/// `sign(m) log10(1 + |m|)`, keeping both tiny and huge margins readable.
pub fn symlog(m: f64) -> f64 {
    m.signum() * m.abs().ln_1p() / std::f64::consts::LN_10
}

/// Minimum margin per sample time, one curve per estimate.
pub fn margin_plot(reports: &[EstimateReport]) -> String {
    LinePlot {
        title: "Estimate margins".into(),
        x_label: "t".into(),
        y_label: "symlog10(min RHS - LHS)".into(),
        series: reports
            .iter()
            .map(|r| Series {
                label: r.theorem.to_string(),
                points: r.margin_by_time.iter().map(|row| (row[0], symlog(row[1]))).collect(),
                dashed: false,
            })
            .collect(),
    }
    .render()
}
