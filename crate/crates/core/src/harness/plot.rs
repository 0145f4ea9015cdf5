use std::fmt::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Line chart with optional horizontal and vertical reference lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub vertical: Vec<(String, f64)>,
    pub horizontal: Vec<(String, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return None;
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        return Some((lo - pad, hi + pad));
    }
    let pad = 0.05 * (hi - lo);
    Some((lo - pad, hi + pad))
}

impl Chart {
    pub fn to_svg(&self) -> Result<String> {
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .chain(self.vertical.iter().map(|v| v.1));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(self.horizontal.iter().map(|h| h.1));
        let (Some((x0, x1)), Some((y0, y1))) = (extent(xs), extent(ys)) else {
            return Err(Error::EmptyReport);
        };
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        let _ = writeln!(out, r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 15.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for t in [0.0, 0.5, 1.0] {
            let x = x0 + t * (x1 - x0);
            let y = y0 + t * (y1 - y0);
            let _ = writeln!(out, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(x), HEIGHT - MARGIN + 16.0, tick(x));
            let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, MARGIN - 4.0, py(y) + 4.0, tick(y));
        }
        for (label, x) in &self.vertical {
            let _ = writeln!(
                out,
                r#"<line x1="{0:.2}" y1="{MARGIN}" x2="{0:.2}" y2="{1}" stroke="gray" stroke-dasharray="4 3"/><text x="{0:.2}" y="{2}" fill="gray">{3}</text>"#,
                px(*x),
                HEIGHT - MARGIN,
                MARGIN - 4.0,
                escape(label)
            );
        }
        for (label, y) in &self.horizontal {
            let _ = writeln!(
                out,
                r#"<line x1="{MARGIN}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="gray" stroke-dasharray="4 3"/><text x="{2}" y="{3:.2}" fill="gray" text-anchor="end">{4}</text>"#,
                py(*y),
                WIDTH - MARGIN,
                WIDTH - MARGIN - 4.0,
                py(*y) - 4.0,
                escape(label)
            );
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                MARGIN + 8.0,
                MARGIN + 16.0 + 14.0 * i as f64,
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        Ok(out)
    }
}

fn tick(v: f64) -> String {
    format!("{v:.3e}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_plot(chart: &Chart, path: &Path) -> Result<()> {
    let svg = chart.to_svg()?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_contains_every_series() {
        let c = Chart {
            title: "E vs eps".into(),
            series: vec![
                Series {
                    label: "measured".into(),
                    points: vec![(0.0, 1.0), (1.0, 2.0)],
                },
                Series {
                    label: "predicted".into(),
                    points: vec![(0.0, 1.1), (1.0, 1.9)],
                },
            ],
            vertical: vec![("threshold".into(), 0.5)],
            ..Chart::default()
        };
        let svg = c.to_svg().unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("threshold") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_chart_is_refused() {
        assert!(matches!(Chart::default().to_svg(), Err(Error::EmptyReport)));
    }
}
