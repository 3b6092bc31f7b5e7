//! Write-only SVG renderings of planar point sets (the spiral figures).
//! Coordinates are normalized into a fixed viewBox so constructions
//! spanning fifty orders of magnitude still produce a legible picture.

use nalgebra::DVector;

use crate::error::{Error, Result};

const SIZE: f64 = 640.0;
const MARGIN: f64 = 40.0;

/// Polyline through the points in order, with markers. Points must be 2D.
pub fn points_svg(points: &[DVector<f64>], title: &str) -> Result<String> {
    if points.iter().any(|p| p.len() != 2) {
        return Err(Error::Structural("SVG plots need 2D points".into()));
    }
    if points.is_empty() {
        return Err(Error::DegenerateInput("no points to plot".into()));
    }
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        min_x = min_x.min(p[0]);
        max_x = max_x.max(p[0]);
        min_y = min_y.min(p[1]);
        max_y = max_y.max(p[1]);
    }
    let span = (max_x - min_x).max(max_y - min_y).max(1e-300);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let project = |p: &DVector<f64>| {
        let x = MARGIN + (p[0] - min_x) * scale;
        // SVG y grows downward.
        let y = SIZE - MARGIN - (p[1] - min_y) * scale;
        (x, y)
    };
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SIZE} {SIZE}\" width=\"{SIZE}\" height=\"{SIZE}\">\n"
    ));
    svg.push_str(&format!(
        "  <title>{}</title>\n  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        xml_escape(title)
    ));
    let path: Vec<String> = points
        .iter()
        .map(|p| {
            let (x, y) = project(p);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    svg.push_str(&format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"#4060c0\" stroke-width=\"1.5\"/>\n",
        path.join(" ")
    ));
    for (i, p) in points.iter().enumerate() {
        let (x, y) = project(p);
        svg.push_str(&format!(
            "  <circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\" fill=\"#c04040\"/>\n"
        ));
        if points.len() <= 64 {
            svg.push_str(&format!(
                "  <text x=\"{:.3}\" y=\"{:.3}\" font-size=\"10\" fill=\"#333\">{i}</text>\n",
                x + 5.0,
                y - 5.0
            ));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn renders_triangle() {
        let pts = vec![
            dvector![0.0, 0.0],
            dvector![1.0, 0.0],
            dvector![0.5, 0.9],
        ];
        let svg = points_svg(&pts, "triangle & <test>").unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("&amp;"));
        assert_eq!(svg.matches("<circle").count(), 3);
    }

    #[test]
    fn handles_huge_spans() {
        let pts = vec![dvector![0.0, 0.0], dvector![1e50, 1e49]];
        let svg = points_svg(&pts, "big").unwrap();
        assert!(svg.contains("</svg>"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(points_svg(&[], "x").is_err());
        assert!(points_svg(&[dvector![1.0, 2.0, 3.0]], "x").is_err());
    }
}
