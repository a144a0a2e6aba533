//! Minimal SVG scatter plots for 2-D datasets.

use std::fmt::Write;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;
const RADIUS: f64 = 2.5;

/// What to draw for each point.
pub enum Style<'a> {
    /// Uniform grey markers.
    Plain,
    /// Linear blue-to-red ramp over scores in `[0, 1]`.
    Heat(&'a [f64]),
    /// Flagged points in black, the rest light grey.
    Overlay(&'a [bool]),
}

/// `rgb()` for a score in `[0, 1]`: blue at 0, red at 1.
pub fn ramp(score: f64) -> String {
    let s = if score.is_finite() { score.clamp(0.0, 1.0) } else { 0.0 };
    let red = (255.0 * s).round() as u8;
    let blue = 255 - red;
    format!("rgb({red},0,{blue})")
}

/// Renders `points` (x, y pairs) as a square scatter plot with equal axis
/// scaling.
pub fn scatter(title: &str, points: &[(f64, f64)], style: Style<'_>) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0);
    let span = if span.is_finite() && span > 0.0 { span } else { 1.0 };
    let inner = SIZE - 2.0 * MARGIN;
    let cx = (x0 + x1) / 2.0;
    let cy = (y0 + y1) / 2.0;
    let px = |x: f64| SIZE / 2.0 + (x - cx) / span * inner;
    // SVG y grows downwards
    let py = |y: f64| SIZE / 2.0 - (y - cy) / span * inner;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, "<!-- mcbp {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="16" font-family="sans-serif" font-size="12">{}</text>"#,
        escape(title)
    );

    // draw flagged points last so they stay visible
    let mut order: Vec<usize> = (0..points.len()).collect();
    match &style {
        Style::Heat(s) => order.sort_by(|&a, &b| s[a].total_cmp(&s[b])),
        Style::Overlay(f) => order.sort_by_key(|&i| f[i]),
        Style::Plain => {}
    }
    for i in order {
        let (x, y) = points[i];
        let fill = match &style {
            Style::Plain => "rgb(90,90,90)".to_string(),
            Style::Heat(s) => ramp(s[i]),
            Style::Overlay(f) if f[i] => "black".to_string(),
            Style::Overlay(_) => "rgb(200,200,200)".to_string(),
        };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{RADIUS}" fill="{fill}"/>"#,
            px(x),
            py(y)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_ends() {
        assert_eq!(ramp(0.0), "rgb(0,0,255)");
        assert_eq!(ramp(1.0), "rgb(255,0,0)");
        assert_eq!(ramp(2.0), "rgb(255,0,0)");
        assert_eq!(ramp(f64::NAN), "rgb(0,0,255)");
    }

    #[test]
    fn one_circle_per_point() {
        let pts = [(0.0, 0.0), (1.0, 2.0), (3.0, -1.0)];
        let flags = [false, true, false];
        let svg = scatter("a < b", &pts, Style::Overlay(&flags));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("fill=\"black\"").count(), 1);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn degenerate_extent_stays_finite() {
        let svg = scatter("one", &[(5.0, 5.0)], Style::Plain);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
