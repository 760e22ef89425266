//! Minimal standalone SVG line charts.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 260.0;
const ML: f64 = 70.0;
const MR: f64 = 150.0;
const MT: f64 = 30.0;
const MB: f64 = 45.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub dashed: bool,
}

pub struct Panel {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub series: Vec<Series>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn panel(out: &mut String, p: &Panel, y0: f64) {
    let (xlo, xhi) = bounds(p.series.iter().flat_map(|s| s.xs.iter().copied()));
    let (ylo, yhi) = bounds(p.series.iter().flat_map(|s| s.ys.iter().copied()));
    let pw = W - ML - MR;
    let ph = H - MT - MB;
    let sx = |x: f64| ML + (x - xlo) / (xhi - xlo) * pw;
    let sy = |y: f64| y0 + MT + (1.0 - (y - ylo) / (yhi - ylo)) * ph;

    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text>"#,
        ML + pw / 2.0,
        y0 + 18.0,
        esc(&p.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{ML}" y="{}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##,
        y0 + MT
    );
    for k in 0..=4 {
        let fx = xlo + (xhi - xlo) * k as f64 / 4.0;
        let fy = ylo + (yhi - ylo) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{:.3}</text>"#,
            sx(fx),
            y0 + MT + ph + 14.0,
            fx
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{:.3e}</text>"#,
            ML - 4.0,
            sy(fy) + 3.0,
            fy
        );
        let _ = writeln!(
            out,
            r##"<line x1="{ML}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/>"##,
            ML + pw,
            sy(fy),
            sy(fy)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
        ML + pw / 2.0,
        y0 + H - 8.0,
        esc(&p.xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{0}" font-size="11" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
        y0 + MT + ph / 2.0,
        esc(&p.ylabel)
    );

    for (k, s) in p.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> =
            s.xs.iter()
                .zip(&s.ys)
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
                .collect();
        let dash = if s.dashed {
            r#" stroke-dasharray="5,3""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.3"{dash} points="{}"/>"#,
            pts.join(" ")
        );
        let ly = y0 + MT + 12.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{0}" x2="{1}" y1="{ly}" y2="{ly}" stroke="{color}"{dash}/>"#,
            W - MR + 10.0,
            W - MR + 30.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11">{}</text>"#,
            W - MR + 35.0,
            ly + 4.0,
            esc(&s.label)
        );
    }
}

/// Panels stacked vertically in one document.
pub fn render(panels: &[Panel]) -> String {
    let height = H * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" viewBox="0 0 {W} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, p) in panels.iter().enumerate() {
        panel(&mut out, p, H * k as f64);
    }
    out.push_str("</svg>\n");
    out
}
