//! Minimal SVG rendering: overlay histograms and line charts.
//!
//! These are quick-look companions to the CSV outputs, which remain the
//! authoritative record. Everything is drawn into a fixed 800x480 canvas
//! with no external assets.

use super::hist::Histogram;
use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 780.0;
const TOP: f64 = 46.0;
const BOTTOM: f64 = 430.0;

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn new(mut x_lo: f64, mut x_hi: f64, mut y_lo: f64, mut y_hi: f64) -> Self {
        if x_lo == x_hi {
            x_lo -= 0.5;
            x_hi += 0.5;
        }
        if y_lo == y_hi {
            y_lo -= 0.5;
            y_hi += 0.5;
        }
        Self { x_lo, x_hi, y_lo, y_hi }
    }

    fn x(&self, v: f64) -> f64 {
        LEFT + (v - self.x_lo) / (self.x_hi - self.x_lo) * (RIGHT - LEFT)
    }

    fn y(&self, v: f64) -> f64 {
        BOTTOM - (v - self.y_lo) / (self.y_hi - self.y_lo) * (BOTTOM - TOP)
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let formatted = if v.abs() >= 1000.0 || v.abs() < 0.001 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    };
    formatted
}

fn open_svg(title: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{mid}" y="24" text-anchor="middle" font-size="16">{title}</text>
"#,
        mid = WIDTH / 2.0,
    );
    s
}

fn draw_axes(s: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let _ = write!(
        s,
        r#"<line x1="{LEFT}" y1="{BOTTOM}" x2="{RIGHT}" y2="{BOTTOM}" stroke="black"/>
<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{BOTTOM}" stroke="black"/>
<text x="{xm}" y="468" text-anchor="middle">{x_label}</text>
<text x="16" y="{ym}" text-anchor="middle" transform="rotate(-90 16 {ym})">{y_label}</text>
"#,
        xm = (LEFT + RIGHT) / 2.0,
        ym = (TOP + BOTTOM) / 2.0,
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_lo + t * (frame.x_hi - frame.x_lo);
        let yv = frame.y_lo + t * (frame.y_hi - frame.y_lo);
        let xp = frame.x(xv);
        let yp = frame.y(yv);
        let _ = write!(
            s,
            r#"<line x1="{xp}" y1="{BOTTOM}" x2="{xp}" y2="{b2}" stroke="black"/>
<text x="{xp}" y="{b3}" text-anchor="middle">{xl}</text>
<line x1="{l1}" y1="{yp}" x2="{LEFT}" y2="{yp}" stroke="black"/>
<text x="{l2}" y="{y2}" text-anchor="end">{yl}</text>
"#,
            b2 = BOTTOM + 5.0,
            b3 = BOTTOM + 20.0,
            xl = tick_label(xv),
            l1 = LEFT - 5.0,
            l2 = LEFT - 9.0,
            y2 = yp + 4.0,
            yl = tick_label(yv),
        );
    }
}

fn draw_legend(s: &mut String, entries: &[(&str, &str)]) {
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = TOP + 14.0 + 18.0 * i as f64;
        let _ = write!(
            s,
            r#"<rect x="{x}" y="{ry}" width="12" height="12" fill="{color}" fill-opacity="0.6"/>
<text x="{tx}" y="{ty}">{label}</text>
"#,
            x = RIGHT - 170.0,
            ry = y - 10.0,
            tx = RIGHT - 152.0,
            ty = y,
        );
    }
}

/// Density-normalized overlay of one or more histograms, with an optional
/// labeled vertical marker (e.g. the truth estimate).
pub fn histogram_overlay_svg(
    title: &str,
    series: &[(&str, &Histogram, &str)],
    vline: Option<(f64, &str)>,
) -> String {
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_hi = 0.0f64;
    for (_, h, _) in series {
        x_lo = x_lo.min(*h.edges.first().unwrap());
        x_hi = x_hi.max(*h.edges.last().unwrap());
        let total = h.total().max(1) as f64;
        for (w, &c) in h.edges.windows(2).zip(&h.counts) {
            let width = (w[1] - w[0]).max(f64::MIN_POSITIVE);
            y_hi = y_hi.max(c as f64 / (total * width));
        }
    }
    if let Some((v, _)) = vline {
        x_lo = x_lo.min(v);
        x_hi = x_hi.max(v);
    }
    let frame = Frame::new(x_lo, x_hi, 0.0, y_hi * 1.05);

    let mut s = open_svg(title);
    for (_, h, color) in series {
        let total = h.total().max(1) as f64;
        for (w, &c) in h.edges.windows(2).zip(&h.counts) {
            if c == 0 {
                continue;
            }
            let width = (w[1] - w[0]).max(f64::MIN_POSITIVE);
            let density = c as f64 / (total * width);
            let x = frame.x(w[0]);
            let y = frame.y(density);
            let _ = write!(
                s,
                r#"<rect x="{x}" y="{y}" width="{w}" height="{h}" fill="{color}" fill-opacity="0.5"/>
"#,
                w = frame.x(w[1]) - x,
                h = BOTTOM - y,
            );
        }
    }
    if let Some((v, label)) = vline {
        let x = frame.x(v);
        let _ = write!(
            s,
            r#"<line x1="{x}" y1="{TOP}" x2="{x}" y2="{BOTTOM}" stroke="crimson" stroke-dasharray="6 4" stroke-width="1.5"/>
<text x="{tx}" y="{ty}" fill="crimson">{label}</text>
"#,
            tx = x + 6.0,
            ty = TOP + 14.0,
        );
    }
    draw_axes(&mut s, &frame, "value", "density");
    draw_legend(&mut s, &series.iter().map(|(l, _, c)| (*l, *c)).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// Line chart over shared x positions, one polyline with point markers per
/// series.
pub fn line_chart_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(&str, &[(f64, f64)], &str)],
) -> String {
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for (_, points, _) in series {
        for &(x, y) in *points {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    let pad = (y_hi - y_lo).abs().max(1e-9) * 0.08;
    let frame = Frame::new(x_lo, x_hi, y_lo - pad, y_hi + pad);

    let mut s = open_svg(title);
    for (_, points, color) in series {
        let path: Vec<String> =
            points.iter().map(|&(x, y)| format!("{:.2},{:.2}", frame.x(x), frame.y(y))).collect();
        let _ = write!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>
"#,
            path.join(" "),
        );
        for &(x, y) in *points {
            let _ = write!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>
"#,
                frame.x(x),
                frame.y(y),
            );
        }
    }
    draw_axes(&mut s, &frame, x_label, y_label);
    draw_legend(&mut s, &series.iter().map(|(l, _, c)| (*l, *c)).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendered_documents_are_wellformed_enough() {
        let h = Histogram::build(&[0.1, 0.4, 0.4, 0.9], 4, &[0.5]);
        let doc = histogram_overlay_svg("costs", &[("reference", &h, "steelblue")], Some((0.5, "truth")));
        assert!(doc.starts_with("<svg"));
        assert!(doc.ends_with("</svg>\n"));
        assert_eq!(doc.matches("<svg").count(), 1);
        assert!(doc.contains("crimson"));

        let points = [(0.0, 0.8), (0.05, 0.7), (0.1, 0.55)];
        let doc = line_chart_svg("conf", "offset", "confidence", &[("empirical", &points[..], "seagreen")]);
        assert!(doc.contains("polyline"));
        assert!(doc.ends_with("</svg>\n"));
    }
}
