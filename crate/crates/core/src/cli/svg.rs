use std::fmt::Write;

use crate::evolution::TraceRow;

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;

fn polyline(points: &[(f64, f64)], color: &str) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "" } else { " " });
    }
    format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{d}\"/>\n")
}

/// Line chart of mean training reward (left axis) and injection probability (right axis, 0..1) per step.
pub fn trace_chart(rows: &[TraceRow]) -> String {
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
    let (x0, x1, y0, y1) = (PAD, W - PAD, H - PAD, PAD);
    let _ = writeln!(
        svg,
        "<path d=\"M{x0},{y1} L{x0},{y0} L{x1},{y0} L{x1},{y1}\" fill=\"none\" stroke=\"#444\"/>"
    );
    if !rows.is_empty() {
        let lo = rows.iter().map(|r| r.mean_reward).fold(f64::INFINITY, f64::min).min(0.0);
        let hi = rows.iter().map(|r| r.mean_reward).fold(f64::NEG_INFINITY, f64::max).max(lo + 1e-9);
        let last = (rows.len() - 1).max(1) as f64;
        let sx = |i: usize| x0 + (x1 - x0) * i as f64 / last;
        let reward: Vec<_> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (sx(i), y0 - (y0 - y1) * (r.mean_reward - lo) / (hi - lo)))
            .collect();
        let eta: Vec<_> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (sx(i), y0 - (y0 - y1) * r.eta))
            .collect();
        svg.push_str(&polyline(&reward, "#1f77b4"));
        svg.push_str(&polyline(&eta, "#d62728"));
        let _ = writeln!(svg, "<text x=\"{x0}\" y=\"{}\" font-size=\"11\">{hi:.3}</text>", y1 - 6.0);
        let _ = writeln!(svg, "<text x=\"4\" y=\"{y0}\" font-size=\"11\">{lo:.3}</text>");
        let _ = writeln!(
            svg,
            "<text x=\"{x1}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">step {}</text>",
            H - 12.0,
            rows.len() - 1
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"20\" font-size=\"12\" fill=\"#1f77b4\">mean reward</text>\
         <text x=\"{}\" y=\"20\" font-size=\"12\" fill=\"#d62728\">eta</text>",
        PAD,
        PAD + 110.0
    );
    svg.push_str("</svg>\n");
    svg
}
