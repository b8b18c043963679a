//! Static SVG charts: line charts with optional bands and heatmaps with
//! curve overlays. The plotted numbers are repeated in XML comments.

use std::fmt::Write as _;

use crate::format::fmt_f64;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// A named polyline; points with non-finite coordinates break the line.
#[derive(Debug, Clone, Default)]
pub struct Series {
    /// Legend entry.
    pub name: String,
    /// `(x, y)` points in drawing order.
    pub points: Vec<(f64, f64)>,
    /// Optional shaded `(x, low, high)` band.
    pub band: Vec<(f64, f64, f64)>,
    /// Dashed stroke.
    pub dashed: bool,
}

impl Series {
    /// Solid series.
    pub fn new(name: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#,
            f.px(xv),
            y1 + 16.0,
            xv
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            x0 - 6.0,
            f.py(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn draw_series(out: &mut String, f: &Frame, s: &Series, color: &str, slot: usize) {
    let _ = writeln!(out, "<!-- series {} -->", escape(&s.name));
    for (x, y) in &s.points {
        let _ = writeln!(out, "<!-- {} {} -->", fmt_f64(*x), fmt_f64(*y));
    }
    if !s.band.is_empty() {
        let mut d = String::new();
        for (x, lo, _) in &s.band {
            let _ = write!(d, "{}{:.2},{:.2} ", if d.is_empty() { "M" } else { "L" }, f.px(*x), f.py(*lo));
        }
        for (x, _, hi) in s.band.iter().rev() {
            let _ = write!(d, "L{:.2},{:.2} ", f.px(*x), f.py(*hi));
        }
        let _ = writeln!(out, r#"<path d="{}Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, d);
    }
    let mut d = String::new();
    let mut pen_down = false;
    for (x, y) in &s.points {
        if x.is_finite() && y.is_finite() {
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, f.px(*x), f.py(*y));
            pen_down = true;
        } else {
            pen_down = false;
        }
    }
    let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
    let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"#);
    let ly = TOP + 14.0 + 18.0 * slot as f64;
    let lx = WIDTH - RIGHT + 10.0;
    let _ = writeln!(
        out,
        r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
        lx + 20.0,
        lx + 26.0,
        ly + 4.0,
        escape(&s.name)
    );
}

/// Line chart.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0).chain(s.band.iter().map(|b| b.0)));
    let ys = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1).chain(s.band.iter().flat_map(|b| [b.1, b.2])));
    let range = |it: &mut dyn Iterator<Item = f64>| {
        it.filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (xl, xh) = range(&mut { xs });
    let (yl, yh) = range(&mut { ys });
    let frame = Frame {
        x: padded(xl, xh),
        y: padded(yl.min(0.0), yh),
    };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        draw_series(&mut out, &frame, s, PALETTE[i % PALETTE.len()], i);
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap over a rectangular grid.
#[derive(Debug, Clone)]
pub struct Heatmap<'a> {
    /// Chart title.
    pub title: &'a str,
    /// Horizontal axis label.
    pub x_label: &'a str,
    /// Vertical axis label.
    pub y_label: &'a str,
    /// Cell centres along x.
    pub xs: &'a [f64],
    /// Cell centres along y.
    pub ys: &'a [f64],
    /// `value(ix, iy)` at index `ix * ys.len() + iy`; `None` is drawn grey.
    pub values: &'a [Option<f64>],
    /// Colour scale range.
    pub scale: (f64, f64),
    /// Curves drawn over the cells.
    pub overlays: &'a [Series],
}

fn ramp(t: f64) -> String {
    // blue -> white -> red, centred on the middle of the scale
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let s = t / 0.5;
        (40.0 + 215.0 * s, 90.0 + 165.0 * s, 200.0 + 55.0 * s)
    } else {
        let s = (t - 0.5) / 0.5;
        (255.0, 255.0 - 190.0 * s, 255.0 - 200.0 * s)
    };
    format!("rgb({},{},{})", r as u8, g as u8, b as u8)
}

/// Renders a heatmap.
pub fn heatmap(h: &Heatmap<'_>) -> String {
    let step = |v: &[f64]| if v.len() > 1 { v[1] - v[0] } else { 1.0 };
    let (dx, dy) = (step(h.xs), step(h.ys));
    let frame = Frame {
        x: padded(h.xs.first().map_or(0.0, |v| v - dx / 2.0), h.xs.last().map_or(1.0, |v| v + dx / 2.0)),
        y: padded(h.ys.first().map_or(0.0, |v| v - dy / 2.0), h.ys.last().map_or(1.0, |v| v + dy / 2.0)),
    };
    let mut out = String::new();
    header(&mut out, h.title);
    let _ = writeln!(
        out,
        "<!-- grid {}x{} scale {} {} -->",
        h.xs.len(),
        h.ys.len(),
        fmt_f64(h.scale.0),
        fmt_f64(h.scale.1)
    );
    let w = (frame.px(dx) - frame.px(0.0)).abs() + 0.3;
    let hh = (frame.py(0.0) - frame.py(dy)).abs() + 0.3;
    for (ix, &x) in h.xs.iter().enumerate() {
        for (iy, &y) in h.ys.iter().enumerate() {
            let fill = match h.values.get(ix * h.ys.len() + iy).copied().flatten() {
                Some(v) => ramp((v - h.scale.0) / (h.scale.1 - h.scale.0)),
                None => "rgb(200,200,200)".into(),
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{w:.2}" height="{hh:.2}" fill="{fill}"/>"#,
                frame.px(x - dx / 2.0),
                frame.py(y + dy / 2.0)
            );
        }
    }
    axes(&mut out, &frame, h.x_label, h.y_label);
    for (i, s) in h.overlays.iter().enumerate() {
        draw_series(&mut out, &frame, s, ["black", "#444444", "#2ca02c"][i % 3], i);
    }
    let lx = WIDTH - RIGHT + 10.0;
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let y = TOP + 90.0 + 20.0 * (4 - i) as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{lx}" y="{y}" width="16" height="20" fill="{}"/><text x="{}" y="{}">{:.2}</text>"#,
            ramp(t),
            lx + 22.0,
            y + 14.0,
            h.scale.0 + t * (h.scale.1 - h.scale.0)
        );
    }
    out.push_str("</svg>\n");
    out
}
