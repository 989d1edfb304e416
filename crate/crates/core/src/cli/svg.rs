//! Minimal SVG rendering for quick looks at command output.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 48.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{cx}" y="20" text-anchor="middle" font-size="14">{title}</text>
<text x="{cx}" y="{by}" text-anchor="middle">{xlabel}</text>
<text x="14" y="{cy}" text-anchor="middle" transform="rotate(-90 14 {cy})">{ylabel}</text>
<rect x="{PAD}" y="{PAD}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>
"##,
        cx = W / 2.0,
        cy = H / 2.0,
        by = H - 12.0,
        pw = W - 2.0 * PAD,
        ph = H - 2.0 * PAD,
    );
    s
}

/// Scatter plot; `highlight` points are drawn larger, in red.
pub fn scatter(title: &str, points: &[(f64, f64)], highlight: &[(f64, f64)]) -> String {
    let all = points.iter().chain(highlight);
    let frame = Frame::fit(all.clone().map(|p| p.0), all.map(|p| p.1));
    let mut s = header(title, "u (σ_x units)", "v (σ_y units)");
    for &(x, y) in points {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="#1f5fa8" fill-opacity="0.5"/>"##,
            frame.px(x),
            frame.py(y)
        );
    }
    for &(x, y) in highlight {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#c0392b"/>"##,
            frame.px(x),
            frame.py(y)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Log-log polyline of `(x, y)` pairs with positive coordinates.
pub fn loglog_line(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let frame = Frame::fit(pts.iter().map(|p| p.0), pts.iter().map(|p| p.1));
    let mut s = header(title, &format!("log10 {xlabel}"), &format!("log10 {ylabel}"));
    let path: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f5fa8" stroke-width="2"/>"##,
        path.join(" ")
    );
    for &(x, y) in &pts {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f5fa8"/>"##,
            frame.px(x),
            frame.py(y)
        );
    }
    s.push_str("</svg>\n");
    s
}
