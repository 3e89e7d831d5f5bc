//! Projection measures of families, their ε-neighborhoods, and the
//! angle-averaged Favard length.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{BoxFamily, IfsParams, Rect, ScheduleParams, Segment, SegmentFamily};
use crate::error::{Error, Result};
use crate::kernel::{compensated_sum, Interval, IntervalUnion, Point};

/// Default number of quadrature nodes.
pub const DEFAULT_NODES: usize = 4096;

/// Gaps below this are treated as rounding noise when the hierarchical
/// projectors merge translated copies.
pub const MERGE_TOLERANCE: f64 = 1e-14;

/// Projection direction `θ ∈ [0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    theta: f64,
    cos: f64,
    sin: f64,
}

impl Direction {
    /// Any finite angle, reduced modulo π.
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::invalid(format!("angle {theta} is not finite")));
        }
        let theta = theta.rem_euclid(PI);
        Ok(Direction {
            theta,
            cos: theta.cos(),
            sin: theta.sin(),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn unit(&self) -> (f64, f64) {
        (self.cos, self.sin)
    }
}

/// Anything whose linear images `(x, y) ↦ x·u + y·v` can be measured.
pub trait ProjectionSource: Sync {
    /// `∪_e N(p(e), eps)` over the elements `e` of the set, where `p` is the
    /// linear functional `(x, y) ↦ x·u + y·v`.
    fn project_with(&self, u: f64, v: f64, eps: f64) -> IntervalUnion;
}

pub fn project_segment(s: &Segment, d: &Direction) -> Interval {
    let (u, v) = d.unit();
    seg_interval(&s.to_f64(), u, v)
}

pub fn project_rect(r: &Rect, d: &Direction) -> Interval {
    let (u, v) = d.unit();
    rect_interval(&r.to_f64(), u, v)
}

#[inline]
fn seg_interval(c: &[f64; 3], u: f64, v: f64) -> Interval {
    let y = c[2] * v;
    Interval::spanning(c[0] * u + y, c[1] * u + y)
}

#[inline]
fn rect_interval(c: &[f64; 4], u: f64, v: f64) -> Interval {
    let (x0, x1) = (c[0] * u, c[1] * u);
    let (y0, y1) = (c[2] * v, c[3] * v);
    Interval {
        lo: x0.min(x1) + y0.min(y1),
        hi: x0.max(x1) + y0.max(y1),
    }
}

fn union_of(mut v: Vec<Interval>) -> IntervalUnion {
    v.sort_unstable_by(|a, b| a.lo.total_cmp(&b.lo));
    IntervalUnion::from_sorted(v, 0.0)
}

impl ProjectionSource for SegmentFamily {
    fn project_with(&self, u: f64, v: f64, eps: f64) -> IntervalUnion {
        union_of(
            self.coords()
                .iter()
                .map(|c| seg_interval(c, u, v).inflate(eps))
                .collect(),
        )
    }
}

impl ProjectionSource for BoxFamily {
    fn project_with(&self, u: f64, v: f64, eps: f64) -> IntervalUnion {
        union_of(
            self.coords()
                .iter()
                .map(|c| rect_interval(c, u, v).inflate(eps))
                .collect(),
        )
    }
}

impl ProjectionSource for [Segment] {
    fn project_with(&self, u: f64, v: f64, eps: f64) -> IntervalUnion {
        union_of(
            self.iter()
                .map(|s| seg_interval(&s.to_f64(), u, v).inflate(eps))
                .collect(),
        )
    }
}

impl ProjectionSource for Point {
    fn project_with(&self, u: f64, v: f64, eps: f64) -> IntervalUnion {
        IntervalUnion::from_intervals([Interval::point(self.x * u + self.y * v).inflate(eps)])
    }
}

impl<S: ProjectionSource + ?Sized> ProjectionSource for &S {
    fn project_with(&self, u: f64, v: f64, eps: f64) -> IntervalUnion {
        (**self).project_with(u, v, eps)
    }
}

/// Union of `count` translates `U + i·d`, `0 <= i < count`, for a power of
/// two `count`.
///
/// Once every part is at least `|d|` long, consecutive translates of a part
/// overlap and the union is `U + [0, (count-1)·d]`; until then the step is
/// doubled by folding `U ∪ (U + d)`.
fn translates(u: &IntervalUnion, d: f64, count: u64) -> IntervalUnion {
    debug_assert!(count.is_power_of_two());
    let mut block = u.clone();
    let (mut d, mut count) = (d, count);
    while count > 1 {
        let shortest = block
            .parts()
            .iter()
            .map(Interval::length)
            .fold(f64::INFINITY, f64::min);
        if shortest >= d.abs() {
            let reach = (count - 1) as f64 * d;
            let grown = block
                .parts()
                .iter()
                .map(|p| {
                    if reach >= 0.0 {
                        Interval {
                            lo: p.lo,
                            hi: p.hi + reach,
                        }
                    } else {
                        Interval {
                            lo: p.lo + reach,
                            hi: p.hi,
                        }
                    }
                })
                .collect();
            return IntervalUnion::from_sorted(grown, MERGE_TOLERANCE);
        }
        block = block.union_translated(&block, d, MERGE_TOLERANCE);
        d *= 2.0;
        count /= 2;
    }
    block
}

/// Projections of the level-`n` graph family without enumerating it.
///
/// A level-`k` cell holds `4^{m_{k+1} - m_k}` level-`(k+1)` cells; the
/// second half of them is raised by the level-`k` displacement. Every cell
/// of one level is a translate of every other, so the projection of the
/// whole family is assembled from the leaf pattern by unions of translates.
#[derive(Debug, Clone)]
pub struct GraphProjector {
    level: usize,
    widths: Vec<f64>,
    displacements: Vec<f64>,
    log4_branching: Vec<u32>,
}

impl GraphProjector {
    pub fn new(p: &ScheduleParams, n: usize) -> Result<Self> {
        crate::construction::schedule::check_level(n, p)?;
        let widths = (0..=n).map(|k| p.cell_width(k).to_f64()).collect();
        let displacements = (0..=n)
            .map(|k| Ok(p.displacement(k)?.to_f64()))
            .collect::<Result<_>>()?;
        let log4_branching = (0..n)
            .map(|k| p.scale(k + 1) - p.scale(k))
            .collect::<Vec<_>>();
        if log4_branching.iter().any(|&b| b > 31) {
            return Err(Error::invalid(
                "scale step too large for the hierarchical projector",
            ));
        }
        Ok(GraphProjector {
            level: n,
            widths,
            displacements,
            log4_branching,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }
}

impl ProjectionSource for GraphProjector {
    fn project_with(&self, u: f64, v: f64, eps: f64) -> IntervalUnion {
        let n = self.level;
        let half = self.widths[n] / 2.0;
        let leaf = Interval::spanning(0.0, half * u).inflate(eps);
        let leaf = IntervalUnion::from_intervals([leaf]);
        let mut cell =
            leaf.union_translated(&leaf, half * u + self.displacements[n] * v, MERGE_TOLERANCE);
        for k in (0..n).rev() {
            let children_half = 1u64 << (2 * self.log4_branching[k] - 1);
            let d = self.widths[k + 1] * u;
            let first = translates(&cell, d, children_half);
            let lift = children_half as f64 * d + self.displacements[k] * v;
            cell = first.union_translated(&first, lift, MERGE_TOLERANCE);
        }
        cell
    }
}

/// Projections of an IFS iterate `∪ T_{j_1}∘…∘T_{j_n}([0,1]²)` assembled digit
/// by digit.
#[derive(Debug, Clone)]
pub struct IfsProjector {
    params: IfsParams,
}

impl IfsProjector {
    pub fn new(params: IfsParams) -> Self {
        IfsProjector { params }
    }
}

impl ProjectionSource for IfsProjector {
    fn project_with(&self, u: f64, v: f64, eps: f64) -> IntervalUnion {
        let s = self.params.side();
        let base = rect_interval(&[0.0, s, 0.0, s], u, v).inflate(eps);
        let mut cur = IntervalUnion::from_intervals([base]);
        let l = self.params.ratio() as f64;
        for level in (1..=self.params.depth()).rev() {
            let scale = l.powi(-(level as i32 - 1));
            let mut all: Vec<Interval> =
                Vec::with_capacity(cur.len() * self.params.translations().len());
            for &(zx, zy) in self.params.translations() {
                let shift = scale * (zx * u + zy * v);
                all.extend(cur.parts().iter().map(|p| p.translate(shift)));
            }
            all.sort_unstable_by(|a, b| a.lo.total_cmp(&b.lo));
            cur = IntervalUnion::from_sorted(all, MERGE_TOLERANCE);
        }
        cur
    }
}

/// `p_θ(fam)` without inflation.
pub fn project_family<S: ProjectionSource + ?Sized>(src: &S, d: &Direction) -> IntervalUnion {
    let (u, v) = d.unit();
    src.project_with(u, v, 0.0)
}

/// `|p_θ(N(fam, eps))| = |N(p_θ(fam), eps)|`.
pub fn neighborhood_projection_length<S: ProjectionSource + ?Sized>(
    src: &S,
    d: &Direction,
    eps: f64,
) -> Result<f64> {
    check_eps(eps)?;
    let (u, v) = d.unit();
    Ok(src.project_with(u, v, eps).measure())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!(
            "inflation radius {eps} must be finite and nonnegative"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AngleQuadrature,
    DualArea,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::AngleQuadrature => "angle-quadrature",
            Method::DualArea => "dual-area",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FavardEstimate {
    pub value: f64,
    pub method: Method,
    pub nodes: usize,
    pub eps: f64,
    pub error_bound: f64,
}

/// Composite midpoint rule for `∫_a^b h` with `nodes` panels, evaluated in
/// parallel and summed in node order.
pub(crate) fn midpoint<F>(a: f64, b: f64, nodes: usize, h: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let step = (b - a) / nodes as f64;
    let values: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|i| h(a + (i as f64 + 0.5) * step))
        .collect();
    compensated_sum(values) * step
}

/// `∫_a^b |N(p_θ(fam), eps)| dθ` by the midpoint rule.
pub fn angle_integral<S: ProjectionSource + ?Sized>(
    src: &S,
    eps: f64,
    a: f64,
    b: f64,
    nodes: usize,
) -> Result<f64> {
    check_eps(eps)?;
    if nodes == 0 {
        return Err(Error::invalid("need at least one node"));
    }
    Ok(midpoint(a, b, nodes, |t| {
        src.project_with(t.cos(), t.sin(), eps).measure()
    }))
}

/// Average over `θ ∈ [0, π)` of `|p_θ(N(fam, eps))|`. The error bound is the
/// change against the rule with half as many nodes.
pub fn favard_estimate<S: ProjectionSource + ?Sized>(
    src: &S,
    eps: f64,
    nodes: usize,
) -> Result<FavardEstimate> {
    if nodes < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 nodes, got {nodes}"
        )));
    }
    let fine = angle_integral(src, eps, 0.0, PI, nodes)? / PI;
    let coarse = angle_integral(src, eps, 0.0, PI, nodes / 2)? / PI;
    Ok(FavardEstimate {
        value: fine,
        method: Method::AngleQuadrature,
        nodes,
        eps,
        error_bound: (fine - coarse).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{
        build_box_family, build_four_corner, build_segment_family, derive_schedule, FamilyKind,
    };
    use crate::kernel::Dyadic;

    fn dy(v: f64) -> Dyadic {
        Dyadic::from_f64(v).unwrap()
    }

    fn seg(x0: f64, x1: f64, y: f64) -> Segment {
        Segment {
            x_lo: dy(x0),
            x_hi: dy(x1),
            y: dy(y),
        }
    }

    fn dir(t: f64) -> Direction {
        Direction::new(t).unwrap()
    }

    fn linear4(n: usize) -> ScheduleParams {
        derive_schedule(&vec![Dyadic::ONE; n], 4, 60).unwrap()
    }

    #[test]
    fn segment_projection_examples() {
        let s = seg(0.0, 0.5, 0.0);
        assert_eq!(project_segment(&s, &dir(0.0)), Interval::new(0.0, 0.5));
        let vert = project_segment(&s, &dir(PI / 2.0));
        assert!(vert.length().abs() < 1e-16 && vert.lo.abs() < 1e-16);
        let diag = project_segment(&s, &dir(PI / 4.0));
        assert!((diag.hi - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert!((dir(PI + 0.3).theta() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn family_projection_examples() {
        let p = linear4(2);
        let f0 = build_segment_family(0, &p, 16).unwrap();
        assert_eq!(project_family(&f0, &dir(0.0)).measure(), 1.0);
        assert!(project_family(&f0, &dir(PI / 2.0)).measure() < 1e-15);

        let f1 = build_segment_family(1, &p, 16).unwrap();
        let e = 1.0 / 16.0;
        let got = neighborhood_projection_length(&f1, &dir(0.0), e).unwrap();
        assert!((got - (1.0 + 2.0 * e)).abs() < 1e-15);
        assert!(neighborhood_projection_length(&f1, &dir(0.0), -1.0).is_err());
    }

    #[test]
    fn four_corner_projection_matches_sampling() {
        use rand::{Rng, SeedableRng};
        let f = build_four_corner(2, 1 << 10).unwrap();
        let t = 0.5f64.atan();
        let exact = project_family(&f, &dir(t)).measure();
        // uniform samples s on the projection hull; the line {x·θ = s} meets
        // the family iff some box has corners on both sides of it
        let (u, v) = dir(t).unit();
        let (lo, hi) = (0.0, u + v);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let samples = 4_000_000;
        let hits = (0..samples)
            .filter(|_| {
                let s: f64 = rng.gen_range(lo..hi);
                f.coords().iter().any(|b| {
                    let vals = [
                        b[0] * u + b[2] * v,
                        b[1] * u + b[2] * v,
                        b[0] * u + b[3] * v,
                        b[1] * u + b[3] * v,
                    ];
                    vals.iter().any(|&w| w <= s) && vals.iter().any(|&w| w >= s)
                })
            })
            .count();
        let mc = hits as f64 / samples as f64 * (hi - lo);
        assert!((mc - exact).abs() < 1e-3, "{mc} vs {exact}");
    }

    #[test]
    fn favard_examples() {
        let pt = Point::new(0.3, 0.7);
        let est = favard_estimate(&pt, 0.1, 64).unwrap();
        assert!((est.value - 0.2).abs() < 1e-15);

        let unit = [seg(0.0, 1.0, 0.0)];
        let est = favard_estimate(&unit[..], 0.0, 4096).unwrap();
        assert!((est.value - 2.0 / PI).abs() <= est.error_bound.max(1e-6));

        let square = BoxFamily::custom(
            FamilyKind::Ifs,
            0,
            vec![Rect {
                x_lo: Dyadic::ZERO,
                x_hi: Dyadic::ONE,
                y_lo: Dyadic::ZERO,
                y_hi: Dyadic::ONE,
            }],
        );
        // mean width of the unit square: (1/π)∫(|cos θ| + |sin θ|) dθ = 4/π
        let est = favard_estimate(&square, 0.0, 4096).unwrap();
        assert!((est.value - 4.0 / PI).abs() < 1e-6, "{}", est.value);
        assert!(favard_estimate(&square, 0.0, 1).is_err());
    }

    fn assert_same(a: &IntervalUnion, b: &IntervalUnion, tol: f64) {
        assert!(
            (a.measure() - b.measure()).abs() < tol,
            "{} vs {}",
            a.measure(),
            b.measure()
        );
    }

    #[test]
    fn graph_projector_matches_enumeration() {
        let a = [
            1.0,
            0.41421356237309515,
            0.31783724519578205,
            0.267949192431123,
        ]
        .map(dy);
        for p in [linear4(4), derive_schedule(&a, 4, 60).unwrap()] {
            for n in 0..=3 {
                let fam = build_segment_family(n, &p, 1 << 20).unwrap();
                let h = GraphProjector::new(&p, n).unwrap();
                for i in 0..97 {
                    let t = i as f64 * PI / 97.0;
                    for eps in [0.0, p.cell_width(n).to_f64()] {
                        let (u, v) = (t.cos(), t.sin());
                        assert_same(
                            &fam.project_with(u, v, eps),
                            &h.project_with(u, v, eps),
                            1e-12,
                        );
                    }
                }
                for xi in [0.0, 0.25, 0.7, 1.0] {
                    assert_same(
                        &fam.project_with(xi, 1.0, 0.0),
                        &h.project_with(xi, 1.0, 0.0),
                        1e-12,
                    );
                }
            }
        }
    }

    #[test]
    fn ifs_projector_matches_enumeration() {
        for n in 0..=4 {
            let fam = build_four_corner(n, 1 << 12).unwrap();
            let h = IfsProjector::new(IfsParams::four_corner(n));
            for i in 0..61 {
                let t = i as f64 * PI / 61.0;
                let eps = 4f64.powi(-(n as i32));
                assert_same(
                    &fam.project_with(t.cos(), t.sin(), eps),
                    &h.project_with(t.cos(), t.sin(), eps),
                    1e-12,
                );
            }
        }
    }

    #[test]
    fn four_corner_symmetry() {
        let f = build_four_corner(3, 1 << 12).unwrap();
        for i in 1..40 {
            let t = i as f64 * PI / 80.0;
            let a = project_family(&f, &dir(t)).measure();
            let b = project_family(&f, &dir(PI - t)).measure();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn axis_projection_is_total_length() {
        let p = linear4(3);
        for n in 0..=3 {
            let f = build_segment_family(n, &p, 1 << 12).unwrap();
            assert_eq!(project_family(&f, &dir(0.0)).measure(), 1.0);
        }
    }

    #[test]
    fn refinement_is_monotone() {
        let p = linear4(3);
        let outer = build_box_family(1, &p, 1 << 12).unwrap();
        let inner = build_box_family(2, &p, 1 << 12).unwrap();
        let a = favard_estimate(&inner, 0.0, 512).unwrap();
        let b = favard_estimate(&outer, 0.0, 512).unwrap();
        assert!(a.value <= b.value + a.error_bound + b.error_bound);
    }

    #[test]
    fn doubling_nodes_is_within_error_bound() {
        let p = linear4(3);
        let f = build_segment_family(2, &p, 1 << 12).unwrap();
        let e = favard_estimate(&f, 1.0 / 16.0, 1024).unwrap();
        let e2 = favard_estimate(&f, 1.0 / 16.0, 2048).unwrap();
        assert!((e2.value - e.value).abs() <= e.error_bound);
    }

    proptest::proptest! {
        #[test]
        fn eps_monotone(t in 0.0f64..PI, a in 0.0f64..0.1, b in 0.0f64..0.1) {
            let p = linear4(2);
            let f = build_segment_family(2, &p, 1 << 12).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let d = dir(t);
            proptest::prop_assert!(
                neighborhood_projection_length(&f, &d, lo).unwrap()
                    <= neighborhood_projection_length(&f, &d, hi).unwrap() + 1e-15
            );
        }
    }
}
