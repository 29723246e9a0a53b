//! Self-contained SVG line plots. Purely presentational: the numbers live
//! in the CSV outputs, the SVG is a quick visual check that needs no
//! plotting stack.

use anyhow::{ensure, Result};

/// One labeled curve; points are (x, y) in data coordinates.
#[derive(Debug, Clone)]
pub struct SvgCurve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Plot frame text.
#[derive(Debug, Clone)]
pub struct SvgStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 18.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 48.0;

/// Line colors, cycled when there are more curves than entries.
const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#4a5668", "#b8860b",
];

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (0.01..1000.0).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn axis_range(lo: f64, hi: f64) -> (f64, f64) {
    if lo == hi {
        // Degenerate span (e.g. a single point): open up a unit window.
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Renders labeled curves as one SVG document: a polyline per multi-point
/// curve, a circle marker for degenerate single-point curves, linear axes
/// with ticks, and a legend keyed by curve label.
pub fn emit_svg(curves: &[SvgCurve], style: &SvgStyle) -> Result<String> {
    ensure!(!curves.is_empty(), "cannot plot an empty curve list");
    let finite = |v: &(f64, f64)| v.0.is_finite() && v.1.is_finite();
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for c in curves {
        ensure!(!c.points.is_empty(), "curve {:?} has no points", c.label);
        for p in c.points.iter().filter(|p| finite(p)) {
            xs.push(p.0);
            ys.push(p.1);
        }
    }
    ensure!(!xs.is_empty(), "no finite points to plot");
    let (x_lo, x_hi) = axis_range(
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y_lo, y_hi) = axis_range(
        ys.iter().copied().fold(f64::INFINITY, f64::min),
        ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R);
    let py =
        |y: f64| HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        0.5 * WIDTH,
        escape(&style.title)
    ));

    // Frame and ticks.
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#333\"/>\n",
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    ));
    let n_ticks = 6;
    for i in 0..n_ticks {
        let f = i as f64 / (n_ticks - 1) as f64;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let (xp, yp) = (px(xv), py(yv));
        svg.push_str(&format!(
            "<line x1=\"{xp:.1}\" y1=\"{0}\" x2=\"{xp:.1}\" y2=\"{1}\" stroke=\"#333\"/>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{xp:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            HEIGHT - MARGIN_B + 17.0,
            tick_label(xv)
        ));
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{yp:.1}\" x2=\"{1}\" y2=\"{yp:.1}\" stroke=\"#333\"/>\n",
            MARGIN_L - 4.0,
            MARGIN_L
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 7.0,
            yp + 4.0,
            tick_label(yv)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        0.5 * WIDTH,
        HEIGHT - 10.0,
        escape(&style.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
        0.5 * HEIGHT,
        escape(&style.y_label)
    ));

    // Curves: polylines for real curves, a marker for single points.
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = curve.points.iter().copied().filter(|p| finite(p)).collect();
        if pts.len() == 1 {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{color}\"/>\n",
                px(pts[0].0),
                py(pts[0].1)
            ));
        } else {
            let coords: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
                coords.join(" ")
            ));
        }
    }

    // Legend, top-right inside the frame.
    let legend_x = WIDTH - MARGIN_R - 220.0;
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_T + 14.0 + 15.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{legend_x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n",
            legend_x + 18.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            legend_x + 23.0,
            y + 4.0,
            escape(&curve.label)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
