//! Minimal self-contained SVG plots: spectral scatter and profile lines.

use std::fmt::Write as _;

use crate::linalg::C64;
use crate::spectrum::Tag;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn style(tag: Tag) -> (&'static str, f64) {
    match tag {
        Tag::Band => ("#1f77b4", 1.5),
        Tag::Curve => ("#d62728", 2.0),
        Tag::Discrete => ("#2ca02c", 4.0),
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (mut x0, mut x1) = bounds(xs);
        let (mut y0, mut y1) = bounds(ys);
        pad(&mut x0, &mut x1);
        pad(&mut y0, &mut y1);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn pad(lo: &mut f64, hi: &mut f64) {
    if !lo.is_finite() || !hi.is_finite() {
        *lo = -1.0;
        *hi = 1.0;
        return;
    }
    let span = *hi - *lo;
    let p = if span > 0.0 { 0.05 * span } else { 0.5 };
    *lo -= p;
    *hi += p;
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, frame: &Frame, xlabel: &str, ylabel: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    out.push('\n');
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    for k in 0..=4 {
        let fx = frame.x0 + (frame.x1 - frame.x0) * k as f64 / 4.0;
        let fy = frame.y0 + (frame.y1 - frame.y0) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{:.3}</text>"#,
            frame.px(fx),
            b + 16.0,
            fx
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{:.3}</text>"#,
            l - 6.0,
            frame.py(fy) + 4.0,
            fy
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 18.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
}

/// Scatter plot of complex points grouped by tag.
pub fn scatter(title: &str, series: &[(Tag, Vec<C64>)]) -> String {
    let all = series.iter().flat_map(|(_, v)| v.iter());
    let frame = Frame::fit(all.clone().map(|z| z.re), all.map(|z| z.im));
    let mut out = String::new();
    header(&mut out, title, &frame, "Re λ", "Im λ");
    for (tag, pts) in series {
        let (color, radius) = style(*tag);
        let _ = writeln!(out, r#"<g fill="{color}" class="{}">"#, tag.as_str());
        for z in pts {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{radius}"/>"#,
                frame.px(z.re),
                frame.py(z.im)
            );
        }
        out.push_str("</g>\n");
    }
    // legend
    for (k, tag) in [Tag::Band, Tag::Curve, Tag::Discrete].iter().enumerate() {
        let (color, _) = style(*tag);
        let y = MARGIN + 14.0 + 16.0 * k as f64;
        let x = WIDTH - MARGIN - 80.0;
        let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="4" fill="{color}"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            x + 10.0,
            y + 4.0,
            tag.as_str()
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Line plot of one or more named profiles sharing an integer x axis.
pub fn profile(title: &str, xlabel: &str, ylabel: &str, lines: &[(String, Vec<f64>)]) -> String {
    let xs = lines.iter().flat_map(|(_, v)| (0..v.len()).map(|i| i as f64));
    let ys = lines.iter().flat_map(|(_, v)| v.iter().copied());
    let frame = Frame::fit(xs, ys.chain([0.0, 1.0]));
    let mut out = String::new();
    header(&mut out, title, &frame, xlabel, ylabel);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    for (k, (name, v)) in lines.iter().enumerate() {
        let color = palette[k % palette.len()];
        let pts: Vec<String> = v
            .iter()
            .enumerate()
            .map(|(i, y)| format!("{:.2},{:.2}", frame.px(i as f64), frame.py(*y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let y = MARGIN + 14.0 + 16.0 * k as f64;
        let x = WIDTH - MARGIN - 120.0;
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}
