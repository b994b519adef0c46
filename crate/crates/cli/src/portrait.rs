//! Static SVG phase portraits in the `(y, Y)` plane.

use std::fmt::Write as _;

use plap_core::systems::stationary_points;
use plap_core::{PointId, ProblemParams};

use crate::format::{sig, SVG_DIGITS};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;

/// One polyline of the portrait.
#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub special: bool,
    pub points: Vec<[f64; 2]>,
}

/// Plot window `[-wy, wy] × [-wbig, wbig]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub wy: f64,
    pub wbig: f64,
}

/// Typical sizes of `y` and `Y` for the tuple.
pub fn phase_scales(pr: &ProblemParams) -> (f64, f64) {
    let s = pr.scale();
    (s, (pr.gamma() * s).powf(pr.p - 1.0))
}

/// Window holding the stationary points and the default seed grid with some margin.
pub fn window(pr: &ProblemParams) -> Window {
    let (sy, sbig) = phase_scales(pr);
    let mut wy = 3.0 * sy;
    let mut wbig = 3.5 * sbig;
    for (_, [y, yy]) in stationary_points(pr) {
        wy = wy.max(1.5 * y.abs());
        wbig = wbig.max(1.5 * yy.abs());
    }
    Window { wy, wbig }
}

fn to_px(w: &Window, p: [f64; 2]) -> (f64, f64) {
    let x = MARGIN + (p[0] + w.wy) / (2.0 * w.wy) * (WIDTH - 2.0 * MARGIN);
    let y = HEIGHT - MARGIN - (p[1] + w.wbig) / (2.0 * w.wbig) * (HEIGHT - 2.0 * MARGIN);
    (x, y)
}

/// Splits a curve into runs that stay within ten windows of the origin.
fn runs(w: &Window, pts: &[[f64; 2]]) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for p in pts {
        let inside = p[0].is_finite() && p[1].is_finite() && p[0].abs() <= 10.0 * w.wy && p[1].abs() <= 10.0 * w.wbig;
        if inside {
            cur.push(to_px(w, *p));
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out.retain(|r| r.len() >= 2);
    out
}

fn point_name(id: PointId) -> &'static str {
    match id {
        PointId::Origin => "origin",
        PointId::MEll => "M_ell",
        PointId::MinusMEll => "-M_ell",
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the portrait. Output depends only on the inputs.
pub fn render_svg(pr: &ProblemParams, curves: &[Curve], title: &str) -> String {
    let w = window(pr);
    let f = |x: f64| sig(x, SVG_DIGITS);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        f(WIDTH),
        f(HEIGHT),
        f(WIDTH),
        f(HEIGHT)
    );
    let _ = writeln!(s, "<title>{}</title>", esc(title));
    let (x0, y0) = (MARGIN, MARGIN);
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath></defs>"#,
        f(x0),
        f(y0),
        f(pw),
        f(ph)
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, f(WIDTH), f(HEIGHT));
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        f(x0),
        f(y0),
        f(pw),
        f(ph)
    );
    let (ox, oy) = to_px(&w, [0.0, 0.0]);
    let _ = writeln!(
        s,
        r#"<g stroke="gray" stroke-width="0.5"><line x1="{}" y1="{}" x2="{}" y2="{}"/><line x1="{}" y1="{}" x2="{}" y2="{}"/></g>"#,
        f(x0),
        f(oy),
        f(x0 + pw),
        f(oy),
        f(ox),
        f(y0),
        f(ox),
        f(y0 + ph)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" font-family="sans-serif">y in [{}, {}], Y in [{}, {}]</text>"#,
        f(x0),
        f(HEIGHT - 12.0),
        f(-w.wy),
        f(w.wy),
        f(-w.wbig),
        f(w.wbig)
    );
    let _ = writeln!(s, r#"<g clip-path="url(#plot)" fill="none">"#);
    for c in curves {
        let (color, width) = if c.special { ("crimson", "1.5") } else { ("steelblue", "0.8") };
        for run in runs(&w, &c.points) {
            let pts: Vec<String> = run.iter().map(|(x, y)| format!("{},{}", f(*x), f(*y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline class="{}" stroke="{color}" stroke-width="{width}" points="{}"><title>{}</title></polyline>"#,
                if c.special { "special" } else { "orbit" },
                pts.join(" "),
                esc(&c.label)
            );
        }
    }
    let _ = writeln!(s, "</g>");
    for (id, p) in stationary_points(pr) {
        let (x, y) = to_px(&w, p);
        let _ = writeln!(
            s,
            r#"<circle class="stationary" cx="{}" cy="{}" r="4" fill="black"><title>{}</title></circle>"#,
            f(x),
            f(y),
            point_name(id)
        );
    }
    s.push_str("</svg>\n");
    s
}
