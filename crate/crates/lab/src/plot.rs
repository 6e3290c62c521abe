//! Minimal SVG line plots.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 70.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick(x: f64) -> String {
    format!("{x:.4}")
        .trim_end_matches('0')
        .trim_end_matches('.')
        .to_string()
}

/// Polyline through `points` on an 800x600 canvas. Non-finite points and, on
/// a log axis, nonpositive `x` are dropped.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)], log_x: bool) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_x || *x > 0.0))
        .map(|(x, y)| (if log_x { x.log10() } else { x }, y))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="30" text-anchor="middle" font-size="18">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN / 2.0, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 20.0,
        escape(&if log_x { format!("{x_label} (log scale)") } else { x_label.to_string() })
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
    if !pts.is_empty() {
        let range = |v: Vec<f64>| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0))
            }
        };
        let (xl, xh) = range(pts.iter().map(|p| p.0).collect());
        let (yl, yh) = range(pts.iter().map(|p| p.1).collect());
        let sx = |x: f64| x0 + (x - xl) / (xh - xl) * (x1 - x0 - 20.0) + 10.0;
        let sy = |y: f64| y0 - (y - yl) / (yh - yl) * (y0 - y1 - 20.0) - 10.0;
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" stroke="steelblue" stroke-width="2" fill="none"/>"#,
            path.join(" ")
        );
        for &(x, y) in &pts {
            let shown = if log_x { 10f64.powf(x) } else { x };
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#,
                sx(x),
                sy(y)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
                sx(x),
                y0 + 16.0,
                tick(shown)
            );
        }
        for y in [yl, yh] {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="11">{y:.4e}</text>"#,
                x0 - 6.0,
                sy(y) + 4.0
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_with_odd_inputs() {
        for pts in [
            vec![],
            vec![(0.1, 1.0)],
            vec![(0.3, 0.5), (0.2, 0.7), (0.0, 0.8), (0.1, f64::NAN)],
        ] {
            let svg = line_plot("mu < 1 & rising", "eps", "mu", &pts, true);
            let doc = roxmltree::Document::parse(&svg).unwrap();
            assert_eq!(doc.root_element().attribute("viewBox"), Some("0 0 800 600"));
        }
    }
}
