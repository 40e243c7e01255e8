//! Plain SVG line charts. Coordinates are printed with two decimals so the
//! output is byte-stable.

use std::fmt::Write;

use covthresh_core::experiments::CellSummary;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let pad = |lo: f64, hi: f64| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Frame { x0, x1, y0, y1 }
    }

    fn x(&self, v: f64) -> f64 {
        LEFT + (v - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn open(out: &mut String, title: &str, xlabel: &str, ylabel: &str, f: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
    let (bx, by) = (f.x(f.x0), f.y(f.y0));
    let (ex, ey) = (f.x(f.x1), f.y(f.y1));
    let _ = writeln!(
        out,
        r#"<g stroke="black" fill="none"><line x1="{bx:.2}" y1="{by:.2}" x2="{ex:.2}" y2="{by:.2}"/><line x1="{bx:.2}" y1="{by:.2}" x2="{bx:.2}" y2="{ey:.2}"/></g>"#
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        let (px, py) = (f.x(xv), f.y(yv));
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{by:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            by + 4.0,
            by + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{bx:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            bx - 4.0,
            bx - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (bx + ex) / 2.0,
        HEIGHT - 14.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0:.2}" text-anchor="middle" transform="rotate(-90 16 {0:.2})">{1}</text>"#,
        (by + ey) / 2.0,
        escape(ylabel)
    );
}

fn polyline(out: &mut String, f: &Frame, xs: &[f64], ys: &[f64], color: &str, width: f64, label: &str) {
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", f.x(x), f.y(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{}"><title>{}</title></polyline>"#,
        points.join(" "),
        escape(label)
    );
}

fn legend(out: &mut String, idx: usize, color: &str, label: &str) {
    let x = WIDTH - RIGHT + 16.0;
    let y = TOP + 10.0 + 20.0 * idx as f64;
    let _ = writeln!(
        out,
        r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
        x + 24.0,
        x + 30.0,
        y + 4.0,
        escape(label)
    );
}

/// Success rate against `k/√n`, one polyline per dimension `p`.
pub fn phase_plot(rows: &[CellSummary]) -> String {
    let mut ps: Vec<usize> = rows.iter().map(|r| r.p).collect();
    ps.sort_unstable();
    ps.dedup();
    let xmax = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let frame = Frame::new(0.0, xmax, 0.0, 1.0);
    let method = rows.first().map_or("", |r| r.method.name());
    let mut out = String::new();
    open(
        &mut out,
        &format!("{method}: empirical success probability"),
        "k/√n",
        "success rate",
        &frame,
    );
    for (i, p) in ps.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.p == *p).map(|r| (r.ratio, r.success_rate)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let color = PALETTE[i % PALETTE.len()];
        let label = format!("p = {p}");
        polyline(&mut out, &frame, &xs, &ys, color, 2.0, &label);
        legend(&mut out, i, color, &label);
    }
    out.push_str("</svg>\n");
    out
}

/// A reconstruction drawn over the clean signal.
pub fn overlay_plot(title: &str, clean: &[f64], estimate: &[f64]) -> String {
    let xs: Vec<f64> = (0..clean.len()).map(|i| i as f64).collect();
    let all = clean.iter().chain(estimate);
    let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame::new(0.0, (clean.len().max(2) - 1) as f64, lo, hi);
    let mut out = String::new();
    open(&mut out, title, "index", "value", &frame);
    polyline(&mut out, &frame, &xs, estimate, PALETTE[0], 1.0, "estimate");
    legend(&mut out, 0, PALETTE[0], "estimate");
    polyline(&mut out, &frame, &xs, clean, "black", 1.5, "clean");
    legend(&mut out, 1, "black", "clean");
    out.push_str("</svg>\n");
    out
}
