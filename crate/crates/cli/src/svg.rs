//! Minimal deterministic SVG plots: stacked panels of dot or line series
//! with axes, ticks and a caption.

use std::fmt::Write as _;

const PANEL_W: f64 = 720.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 45.0;
const CAPTION_H: f64 = 40.0;

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Dots,
    Line,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, Default)]
pub struct Figure {
    pub caption: String,
    pub panels: Vec<Panel>,
}

impl Figure {
    pub fn render(&self) -> String {
        let height = self.panels.len() as f64 * PANEL_H + CAPTION_H;
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" viewBox="0 0 {PANEL_W} {height}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        for (i, panel) in self.panels.iter().enumerate() {
            render_panel(&mut out, panel, i as f64 * PANEL_H);
        }
        writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
            PANEL_W / 2.0,
            height - CAPTION_H / 2.0 + 5.0,
            escape(&self.caption)
        )
        .unwrap();
        out.push_str("</svg>\n");
        out
    }
}

fn render_panel(out: &mut String, panel: &Panel, top: f64) {
    let (x0, x1) = (MARGIN_L, PANEL_W - MARGIN_R);
    let (y0, y1) = (top + PANEL_H - MARGIN_B, top + MARGIN_T);
    let finite = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in finite {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    if xmin > xmax {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    let xt = ticks(xmin, xmax);
    let yt = ticks(ymin, ymax);
    let (xlo, xhi) = (xt[0].min(xmin), xt[xt.len() - 1].max(xmax));
    let (ylo, yhi) = (yt[0].min(ymin), yt[yt.len() - 1].max(ymax));
    let sx = |x: f64| x0 + (x - xlo) / (xhi - xlo) * (x1 - x0);
    let sy = |y: f64| y0 - (y - ylo) / (yhi - ylo) * (y0 - y1);

    writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    )
    .unwrap();
    for &t in &xt {
        let px = sx(t);
        writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            y0 + 5.0,
            y0 + 18.0,
            tick_label(t)
        )
        .unwrap();
    }
    for &t in &yt {
        let py = sy(t);
        writeln!(
            out,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(t)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        top + PANEL_H - 10.0,
        escape(&panel.x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&panel.y_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
        (x0 + x1) / 2.0,
        top + MARGIN_T - 10.0,
        escape(&panel.title)
    )
    .unwrap();

    for (i, s) in panel.series.iter().enumerate() {
        let pts = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite());
        match s.style {
            Style::Dots => {
                writeln!(out, r#"<g fill="{}">"#, s.color).unwrap();
                for &(x, y) in pts {
                    writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="1.6"/>"#,
                        sx(x),
                        sy(y)
                    )
                    .unwrap();
                }
                out.push_str("</g>\n");
            }
            Style::Line => {
                let path: Vec<String> = pts
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                    s.color,
                    path.join(" ")
                )
                .unwrap();
            }
        }
        let ly = y1 + 12.0 + 16.0 * i as f64;
        writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x1 + 10.0,
            ly - 9.0,
            s.color,
            x1 + 25.0,
            ly,
            escape(&s.label)
        )
        .unwrap();
    }
}

/// Round tick positions covering `[lo, hi]`, about five of them.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (lo, hi) = if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0))
    } else {
        (lo, hi)
    };
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|f| f * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
