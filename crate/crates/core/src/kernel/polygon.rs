//! Convex polygons, half-plane clipping and shoelace area.

use serde::{Deserialize, Serialize};

/// Consecutive vertices closer than this are collapsed after clipping.
pub const VERTEX_MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Closed half-plane `a·x + b·y <= c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HalfPlane {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        HalfPlane { a, b, c }
    }

    /// `y >= slope·x + intercept`.
    pub fn above(slope: f64, intercept: f64) -> Self {
        HalfPlane::new(slope, -1.0, -intercept)
    }

    /// `y <= slope·x + intercept`.
    pub fn below(slope: f64, intercept: f64) -> Self {
        HalfPlane::new(-slope, 1.0, intercept)
    }

    fn excess(&self, p: Point) -> f64 {
        self.a * p.x + self.b * p.y - self.c
    }
}

/// Convex polygon with counterclockwise vertices. The empty polygon has no
/// vertices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a polygon from vertices in either orientation. Returns `None`
    /// when the vertices do not describe a convex polygon.
    pub fn from_vertices(mut vertices: Vec<Point>) -> Option<Self> {
        if vertices.len() < 3 {
            return Some(Self::empty());
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let (p, q, r) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            let cross = (q.x - p.x) * (r.y - q.y) - (q.y - p.y) * (r.x - q.x);
            if cross < -1e-12 {
                return None;
            }
        }
        Some(ConvexPolygon { vertices })
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        ConvexPolygon {
            vertices: vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1),
            ],
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Intersection with a closed half-plane (Sutherland–Hodgman step).
    pub fn clip(&self, h: &HalfPlane) -> ConvexPolygon {
        if self.is_empty() {
            return ConvexPolygon::empty();
        }
        let v = &self.vertices;
        let mut out = Vec::with_capacity(v.len() + 1);
        for i in 0..v.len() {
            let p = v[i];
            let q = v[(i + 1) % v.len()];
            let dp = h.excess(p);
            let dq = h.excess(q);
            if dp <= 0.0 {
                out.push(p);
            }
            if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
                let t = dp / (dp - dq);
                out.push(Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)));
            }
        }
        ConvexPolygon {
            vertices: collapse_close(out),
        }
    }

    pub fn clip_all<'a, I: IntoIterator<Item = &'a HalfPlane>>(&self, hs: I) -> ConvexPolygon {
        let mut p = self.clone();
        for h in hs {
            if p.is_empty() {
                break;
            }
            p = p.clip(h);
        }
        p
    }

    /// Shoelace area (never negative).
    pub fn area(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        signed_area(&self.vertices).max(0.0)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> ConvexPolygon {
        ConvexPolygon {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
        }
    }
}

fn signed_area(v: &[Point]) -> f64 {
    // relative to the first vertex to limit cancellation
    let o = v[0];
    let mut s = 0.0;
    for w in v[1..].windows(2) {
        let (a, b) = (w[0], w[1]);
        s += (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y);
    }
    0.5 * s
}

fn collapse_close(v: Vec<Point>) -> Vec<Point> {
    let close = |a: Point, b: Point| {
        (a.x - b.x).abs() < VERTEX_MERGE_TOLERANCE && (a.y - b.y).abs() < VERTEX_MERGE_TOLERANCE
    };
    let mut out: Vec<Point> = Vec::with_capacity(v.len());
    for p in v {
        if out.last().is_some_and(|&l| close(l, p)) {
            continue;
        }
        out.push(p);
    }
    while out.len() > 1 && close(out[0], *out.last().unwrap()) {
        out.pop();
    }
    if out.len() < 3 {
        out.clear();
    }
    out
}
