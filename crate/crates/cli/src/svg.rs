//! Polyline plots, one panel per row.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 220.0;
const MARGIN: f64 = 44.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#555555"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub series: Vec<Series>,
}

fn bounds(panel: &Panel) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in panel.series.iter().flat_map(|s| &s.points) {
        if x.is_finite() && y.is_finite() {
            b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
        }
    }
    if !b.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    if b.1 == b.0 {
        b.1 = b.0 + 1.0;
    }
    if b.3 == b.2 {
        b.3 = b.2 + 1.0;
    }
    b
}

pub fn render(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    for (i, panel) in panels.iter().enumerate() {
        let top = i as f64 * PANEL_HEIGHT;
        let (x0, x1, y0, y1) = bounds(panel);
        let (w, h) = (WIDTH - 2.0 * MARGIN, PANEL_HEIGHT - 2.0 * MARGIN);
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * w;
        let py = |y: f64| top + MARGIN + (y1 - y) / (y1 - y0) * h;
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{:.1}" width="{w}" height="{h}" fill="none" stroke="black"/>"#,
            top + MARGIN
        );
        let _ = writeln!(out, r#"<text x="{MARGIN}" y="{:.1}">{}</text>"#, top + MARGIN - 8.0, escape(&panel.title));
        let _ = writeln!(out, r#"<text x="{MARGIN}" y="{:.1}">{x0:.3}</text>"#, top + PANEL_HEIGHT - 26.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{x1:.3}</text>"#,
            WIDTH - MARGIN,
            top + PANEL_HEIGHT - 26.0
        );
        let _ = writeln!(out, r#"<text x="4" y="{:.1}">{y1:.3}</text>"#, top + MARGIN + 4.0);
        let _ = writeln!(out, r#"<text x="4" y="{:.1}">{y0:.3}</text>"#, top + MARGIN + h);
        for (j, s) in panel.series.iter().enumerate() {
            let colour = COLOURS[j % COLOURS.len()];
            // break the line at non-finite points
            for run in s.points.split(|(x, y)| !(x.is_finite() && y.is_finite())) {
                if run.is_empty() {
                    continue;
                }
                let pts: Vec<String> = run.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" fill="{colour}" text-anchor="end">{}</text>"#,
                WIDTH - MARGIN - 4.0,
                top + MARGIN + 14.0 * (j + 1) as f64,
                escape(&s.label)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
