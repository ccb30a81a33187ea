//! Minimal static SVG line charts.

use std::fmt::Write;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    /// Symmetric error bars, one per point, or empty.
    pub errors: Vec<f64>,
    pub dashed: bool,
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series<'a>>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Renders the chart, or `None` when there is nothing finite to draw.
pub fn render(chart: &Chart<'_>) -> Option<String> {
    let tx = |x: f64| if chart.log_x { x.log10() } else { x };
    let ty = |y: f64| if chart.log_y { y.log10() } else { y };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in &chart.series {
        for (i, &(x, y)) in s.points.iter().enumerate() {
            let e = s.errors.get(i).copied().unwrap_or(0.0);
            xs.push(tx(x));
            ys.push(ty(y + e));
            ys.push(ty((y - e).max(if chart.log_y { y * 0.5 } else { f64::NEG_INFINITY })));
        }
    }
    xs.retain(|v| v.is_finite());
    ys.retain(|v| v.is_finite());
    if xs.is_empty() || ys.is_empty() {
        return None;
    }
    let (mut x0, mut x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (mut y0, mut y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !chart.log_y {
        y0 = y0.min(0.0);
    }
    if x1 == x0 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| PAD + (tx(x) - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (ty(y) - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, chart.title);
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD},{PAD} V{} H{}" stroke="black" fill="none"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 15.0, chart.x_label);
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        chart.y_label
    );
    for (label, v, scale_log) in [("x", (x0, x1), chart.log_x), ("y", (y0, y1), chart.log_y)] {
        for i in 0..=4 {
            let t = v.0 + (v.1 - v.0) * i as f64 / 4.0;
            let shown = if scale_log { 10f64.powf(t) } else { t };
            let text = format!("{shown:.3e}");
            if label == "x" {
                let x = PAD + (t - x0) / (x1 - x0) * (W - 2.0 * PAD);
                let _ = writeln!(svg, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{text}</text>"#, H - PAD + 16.0);
            } else {
                let y = H - PAD - (t - y0) / (y1 - y0) * (H - 2.0 * PAD);
                let _ = writeln!(svg, r#"<text x="{}" y="{y:.1}" text-anchor="end">{text}</text>"#, PAD - 4.0);
            }
        }
    }
    for (k, s) in chart.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| tx(*x).is_finite() && ty(*y).is_finite())
            .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}"{dash}/>"#, pts.join(" "));
        for (i, &(x, y)) in s.points.iter().enumerate() {
            if let Some(&e) = s.errors.get(i) {
                let lo = if chart.log_y { (y - e).max(y * 0.5) } else { y - e };
                let _ = writeln!(
                    svg,
                    r#"<line x1="{0:.1}" x2="{0:.1}" y1="{1:.1}" y2="{2:.1}" stroke="{color}"/>"#,
                    px(x),
                    py(lo),
                    py(y + e)
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - PAD - 120.0,
            PAD + 16.0 * k as f64,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    Some(svg)
}
