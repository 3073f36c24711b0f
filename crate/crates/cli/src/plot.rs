//! Static SVG line plots built from plain path elements.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;

/// One series drawn as a polyline over x = 1..=len.
pub struct Series<'a> {
    pub values: &'a [f64],
    pub color: &'a str,
    pub label: &'a str,
}

/// Index-versus-value plot with optional vertical markers. Each marker `b`
/// is drawn between points `b` and `b + 1`.
pub fn line_plot(title: &str, series: &[Series<'_>], markers: &[usize]) -> String {
    let len = series.iter().map(|s| s.values.len()).max().unwrap_or(0).max(2);
    let finite = series.iter().flat_map(|s| s.values.iter().copied()).filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let px = |i: f64| MARGIN + (i - 1.0) / (len as f64 - 1.0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<path d="M{MARGIN} {MARGIN} V{y0:.2} H{x1:.2}" fill="none" stroke="black"/>"#,
        y0 = HEIGHT - MARGIN,
        x1 = WIDTH - MARGIN
    );
    if lo < 0.0 && hi > 0.0 {
        let _ = writeln!(
            svg,
            r##"<path d="M{MARGIN} {y:.2} H{x1:.2}" stroke="#bbbbbb" stroke-dasharray="2 3"/>"##,
            y = py(0.0),
            x1 = WIDTH - MARGIN
        );
    }
    for (v, y) in [(hi, py(hi)), (lo, py(lo))] {
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN - 4.0, y + 4.0, short(v));
    }
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="{:.2}">1</text>"#, HEIGHT - MARGIN + 16.0);
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{len}</text>"#, WIDTH - MARGIN, HEIGHT - MARGIN + 16.0);

    for &b in markers {
        let x = px(b as f64 + 0.5);
        let _ = writeln!(
            svg,
            r##"<path d="M{x:.2} {MARGIN} V{y:.2}" stroke="#1f4e9c" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
            y = HEIGHT - MARGIN
        );
    }
    for (k, s) in series.iter().enumerate() {
        let mut d = String::new();
        for (i, v) in s.values.iter().enumerate().filter(|(_, v)| v.is_finite()) {
            let cmd = if d.is_empty() { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.2} {:.2} ", px(i as f64 + 1.0), py(*v));
        }
        let _ = writeln!(svg, r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.2"/>"#, d.trim_end(), s.color);
        let ly = MARGIN + 14.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<path d="M{:.2} {:.2} h18" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            WIDTH - MARGIN - 120.0,
            ly,
            s.color,
            WIDTH - MARGIN - 96.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn short(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
