//! Static SVG 1.1 figures: the boxes of a construction level, and two dual
//! wedges with their intersection in the strip.

use std::fmt::Write as _;

use crate::construction::{BoxFamily, Segment};
use crate::duality::{dual_wedge, wedge_pair_polygon};
use crate::error::{Error, Result};
use crate::kernel::ConvexPolygon;

pub const DEFAULT_PRIMITIVE_BUDGET: usize = 1 << 14;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 20.0;

struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Frame {
        let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        Frame {
            x0,
            y0,
            scale,
            height: (y1 - y0) * scale + 2.0 * MARGIN,
        }
    }

    fn width(&self, x1: f64) -> f64 {
        (x1 - self.x0) * self.scale + 2.0 * MARGIN
    }

    fn x(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) * self.scale
    }

    fn y(&self, y: f64) -> f64 {
        self.height - MARGIN - (y - self.y0) * self.scale
    }
}

fn header(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(out, "<title>{title}</title>");
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn check_budget(required: usize, budget: usize) -> Result<()> {
    if required > budget {
        return Err(Error::Budget {
            stage: "figure",
            required: required as u128,
            budget: budget as u128,
        });
    }
    Ok(())
}

/// One `<rect class="box">` per box of the family, with the unit square
/// outlined.
pub fn render_construction(fam: &BoxFamily, max_primitives: usize) -> Result<String> {
    check_budget(fam.len() + 1, max_primitives)?;
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
    for c in fam.coords() {
        x0 = x0.min(c[0]);
        x1 = x1.max(c[1]);
        y0 = y0.min(c[2]);
        y1 = y1.max(c[3]);
    }
    let f = Frame::new(x0, x1, y0, y1);
    let mut out = String::new();
    header(
        &mut out,
        f.width(x1),
        f.height,
        &format!(
            "{} level {}, {} boxes",
            fam.kind().name(),
            fam.level(),
            fam.len()
        ),
    );
    let _ = writeln!(
        out,
        r##"<rect class="frame" x="{:.4}" y="{:.4}" width="{:.4}" height="{:.4}" fill="none" stroke="#999" stroke-dasharray="4 4"/>"##,
        f.x(0.0),
        f.y(1.0),
        f.scale,
        f.scale
    );
    let _ = writeln!(out, r##"<g fill="#1f3b73" stroke="none">"##);
    for c in fam.coords() {
        let _ = writeln!(
            out,
            r#"<rect class="box" x="{:.4}" y="{:.4}" width="{:.4}" height="{:.4}"/>"#,
            f.x(c[0]),
            f.y(c[3]),
            ((c[1] - c[0]) * f.scale).max(0.1),
            ((c[3] - c[2]) * f.scale).max(0.1)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

fn points(f: &Frame, poly: &ConvexPolygon) -> String {
    poly.vertices()
        .iter()
        .map(|v| format!("{:.4},{:.4}", f.x(v.x), f.y(v.y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// The wedges of `s1` and `s2` inside the strip `0 <= ξ <= 1`, with their
/// intersection shaded. The intersection's vertices in dual coordinates are
/// listed in its `data-vertices` attribute.
pub fn render_dual_pair(s1: &Segment, s2: &Segment) -> Result<String> {
    let (w1, w2) = (dual_wedge(s1), dual_wedge(s2));
    let (p1, p2) = (w1.polygon(), w2.polygon());
    let inter = wedge_pair_polygon(&w1, &w2)?;
    let ys: Vec<f64> = p1
        .vertices()
        .iter()
        .chain(p2.vertices())
        .map(|v| v.y)
        .collect();
    let y0 = ys.iter().cloned().fold(f64::MAX, f64::min);
    let y1 = ys.iter().cloned().fold(f64::MIN, f64::max);
    let pad = 0.05 * (y1 - y0).max(0.1);
    let f = Frame::new(0.0, 1.0, y0 - pad, y1 + pad);
    let mut out = String::new();
    header(
        &mut out,
        f.width(1.0),
        f.height,
        "dual wedges of two segments",
    );
    let _ = writeln!(
        out,
        r##"<rect class="strip" x="{:.4}" y="{:.4}" width="{:.4}" height="{:.4}" fill="#f3f3f3" stroke="#999"/>"##,
        f.x(0.0),
        f.y(y1 + pad),
        f.scale,
        (y1 - y0 + 2.0 * pad) * f.scale
    );
    for (cls, poly, color) in [("wedge-1", &p1, "#c0392b"), ("wedge-2", &p2, "#2471a3")] {
        let _ = writeln!(
            out,
            r#"<polygon class="{cls}" points="{}" fill="{color}" fill-opacity="0.25" stroke="{color}"/>"#,
            points(&f, poly)
        );
    }
    let area = inter.area();
    if inter.is_empty() || area == 0.0 {
        let _ = writeln!(
            out,
            r#"<text class="note" x="{:.4}" y="{:.4}" font-family="sans-serif" font-size="16">intersection area 0</text>"#,
            f.x(0.05),
            MARGIN + 16.0
        );
    } else {
        let data = inter
            .vertices()
            .iter()
            .map(|v| format!("{},{}", v.x, v.y))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            r#"<polygon class="intersection" points="{}" data-vertices="{data}" fill="black" fill-opacity="0.6"/>"#,
            points(&f, &inter)
        );
        let _ = writeln!(
            out,
            r#"<text class="note" x="{:.4}" y="{:.4}" font-family="sans-serif" font-size="16">intersection area {area:.6e}</text>"#,
            f.x(0.05),
            MARGIN + 16.0
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
