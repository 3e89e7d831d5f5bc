//! Point-line duality: the point `(a, b)` corresponds to the line
//! `y = a·ξ + b`, a horizontal segment to a wedge, and vertical slices of the
//! dual set to projections of the primal one.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{ScheduleParams, Segment, SegmentFamily};
use crate::error::{Error, Result};
use crate::kernel::dyadic::cmp_products;
use crate::kernel::{compensated_sum, ConvexPolygon, Dyadic, HalfPlane, Interval, Point};
use crate::projection::{angle_integral, midpoint, FavardEstimate, Method, ProjectionSource};

/// Default horizontal reach constant for pair classification.
pub const DEFAULT_REACH: u64 = 8;

/// Segments allowed in an exhaustive pair scan.
pub const EXHAUSTIVE_SEGMENT_BUDGET: usize = 1 << 13;

/// `{(ξ, y) : 0 <= ξ <= 1, slope_lo·ξ + apex_y <= y <= slope_hi·ξ + apex_y}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualWedge {
    pub apex_y: Dyadic,
    pub slope_lo: Dyadic,
    pub slope_hi: Dyadic,
}

pub fn dual_wedge(s: &Segment) -> DualWedge {
    DualWedge {
        apex_y: s.y,
        slope_lo: s.x_lo,
        slope_hi: s.x_hi,
    }
}

impl DualWedge {
    /// The wedge inside the strip as a triangle.
    pub fn polygon(&self) -> ConvexPolygon {
        let (c, lo, hi) = (
            self.apex_y.to_f64(),
            self.slope_lo.to_f64(),
            self.slope_hi.to_f64(),
        );
        ConvexPolygon::from_vertices(vec![
            Point::new(0.0, c),
            Point::new(1.0, c + lo),
            Point::new(1.0, c + hi),
        ])
        .expect("a triangle is convex")
    }

    /// The two bounding half-planes `y >= lo·ξ + c` and `y <= hi·ξ + c`.
    pub fn half_planes(&self) -> [HalfPlane; 2] {
        let c = self.apex_y.to_f64();
        [
            HalfPlane::above(self.slope_lo.to_f64(), c),
            HalfPlane::below(self.slope_hi.to_f64(), c),
        ]
    }

    /// Slice `{y : (ξ, y) ∈ wedge}`.
    pub fn slice(&self, xi: f64) -> Interval {
        let c = self.apex_y.to_f64();
        Interval::spanning(
            self.slope_lo.to_f64() * xi + c,
            self.slope_hi.to_f64() * xi + c,
        )
    }
}

/// `(slope_hi - slope_lo) / 2`.
pub fn wedge_area(w: &DualWedge) -> f64 {
    w.slope_hi
        .checked_sub(w.slope_lo)
        .and_then(|d| d.mul_pow2(-1))
        .map(|d| d.to_f64())
        .unwrap_or_else(|_| (w.slope_hi.to_f64() - w.slope_lo.to_f64()) / 2.0)
}

/// Rational `num / den` with `den > 0`.
#[derive(Clone, Copy)]
struct Frac {
    num: Dyadic,
    den: Dyadic,
}

impl Frac {
    fn cmp(&self, other: &Frac) -> Ordering {
        cmp_products(self.num, other.den, other.num, self.den)
    }
}

/// Exact test for a positive-area intersection of two wedges inside the
/// strip.
///
/// The open slices overlap at `ξ` iff `(hi2 - lo1)·ξ + (c2 - c1) > 0` and
/// `(hi1 - lo2)·ξ + (c1 - c2) > 0`; each condition holds on an interval of
/// `ξ`, and the wedges interact iff the two intervals meet inside `(0, 1)`.
pub fn wedges_interact(w1: &DualWedge, w2: &DualWedge) -> Result<bool> {
    if w1.slope_lo >= w1.slope_hi || w2.slope_lo >= w2.slope_hi {
        return Ok(false);
    }
    let mut lower = Frac {
        num: Dyadic::ZERO,
        den: Dyadic::ONE,
    };
    let mut upper = Frac {
        num: Dyadic::ONE,
        den: Dyadic::ONE,
    };
    let constraints = [
        (
            w2.slope_hi.checked_sub(w1.slope_lo)?,
            w2.apex_y.checked_sub(w1.apex_y)?,
        ),
        (
            w1.slope_hi.checked_sub(w2.slope_lo)?,
            w1.apex_y.checked_sub(w2.apex_y)?,
        ),
    ];
    for (a, b) in constraints {
        match a.signum() {
            1 => {
                let f = Frac { num: -b, den: a };
                if f.cmp(&lower) == Ordering::Greater {
                    lower = f;
                }
            }
            -1 => {
                let f = Frac { num: b, den: -a };
                if f.cmp(&upper) == Ordering::Less {
                    upper = f;
                }
            }
            _ => {
                if b.signum() <= 0 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(lower.cmp(&upper) == Ordering::Less)
}

/// Intersection polygon of two wedges within the strip (empty when they
/// do not interact).
pub fn wedge_pair_polygon(w1: &DualWedge, w2: &DualWedge) -> Result<ConvexPolygon> {
    if !wedges_interact(w1, w2)? {
        return Ok(ConvexPolygon::empty());
    }
    Ok(w1.polygon().clip_all(&w2.half_planes()))
}

/// Area of `w1 ∩ w2 ∩ Q`; exactly zero for non-interacting wedges.
pub fn wedge_pair_area(w1: &DualWedge, w2: &DualWedge) -> Result<f64> {
    Ok(wedge_pair_polygon(w1, w2)?.area())
}

fn check_xi(xi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::invalid(format!(
            "slice position {xi} outside [0, 1]"
        )));
    }
    Ok(())
}

/// `|{y : (ξ, y) ∈ fam*}|`, the projection onto `(ξ, 1)`. With
/// `θ = arccot ξ` this is `|p_θ(fam)| / sin θ`.
pub fn slice_measure<S: ProjectionSource + ?Sized>(src: &S, xi: f64) -> Result<f64> {
    check_xi(xi)?;
    Ok(src.project_with(xi, 1.0, 0.0).measure())
}

/// `L²(fam* ∩ Q)` by the midpoint rule over `ξ`, with the half-node change as
/// error bound.
pub fn dual_area_estimate<S: ProjectionSource + ?Sized>(
    src: &S,
    nodes: usize,
) -> Result<FavardEstimate> {
    if nodes < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 nodes, got {nodes}"
        )));
    }
    let h = |xi: f64| src.project_with(xi, 1.0, 0.0).measure();
    let fine = midpoint(0.0, 1.0, nodes, h);
    let coarse = midpoint(0.0, 1.0, nodes / 2, h);
    Ok(FavardEstimate {
        value: fine,
        method: Method::DualArea,
        nodes,
        eps: 0.0,
        error_bound: (fine - coarse).abs(),
    })
}

pub fn dual_area<S: ProjectionSource + ?Sized>(src: &S, nodes: usize) -> Result<f64> {
    Ok(dual_area_estimate(src, nodes)?.value)
}

/// `∫_{π/4}^{π/2} |p_θ(fam)| dθ`, the directions `(ξ, 1)/|(ξ, 1)|` charted
/// by the strip `0 <= ξ <= 1`. Since `dξ = csc²θ dθ`, the dual area is
/// `∫ |p_θ| csc³θ dθ` over this range and lies between one and `2√2` times
/// this integral.
pub fn restricted_angle_integral<S: ProjectionSource + ?Sized>(
    src: &S,
    nodes: usize,
) -> Result<f64> {
    angle_integral(src, 0.0, FRAC_PI_4, FRAC_PI_2, nodes)
}

/// Direction charted by the slice at `ξ`.
pub fn chart_angle(xi: f64) -> f64 {
    1f64.atan2(xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairClass {
    SameSegment,
    /// Deepest shared cell level; level 0 is the unit interval.
    Level(usize),
}

/// Half-cell index of a segment of the level-`n` family.
fn half_cell_index(s: &Segment, p: &ScheduleParams, n: usize) -> Result<u128> {
    let i = s.x_lo.mul_pow2(2 * p.scale(n) as i64 + 1)?;
    if i.exponent() != 0 || i.mantissa() < 0 {
        return Err(Error::invalid("segment is not on the construction grid"));
    }
    Ok(i.mantissa() as u128)
}

/// Level of a segment from its length `4^{-m_n}/2`.
fn segment_level(s: &Segment, p: &ScheduleParams) -> Result<usize> {
    let len = s.length();
    (0..=p.levels())
        .find(|&n| p.cell_width(n).mul_pow2(-1).ok() == Some(len))
        .ok_or_else(|| Error::invalid("segment length does not match any construction level"))
}

/// `floor(C·a_k·4^{-m_k} / w)` with `w = 4^{-m_n}/2`: the largest index
/// distance `j - i - 1` whose gap stays within reach.
fn reach_in_cells(p: &ScheduleParams, n: usize, k: usize, c_reach: u64) -> Result<u128> {
    let shift = 2 * (p.scale(n) - p.scale(k)) as i64 + 1;
    let r = Dyadic::from_int(c_reach as i128)
        .checked_mul(p.increment(k))?
        .mul_pow2(shift)
        .map(|d| d.floor().max(0) as u128)
        .unwrap_or(u128::MAX);
    Ok(r)
}

fn classify_indices(
    i: u128,
    j: u128,
    p: &ScheduleParams,
    n: usize,
    c_reach: u64,
) -> Result<Option<PairClass>> {
    if i == j {
        return Ok(Some(PairClass::SameSegment));
    }
    let mn = p.scale(n);
    let k = (0..=n)
        .rev()
        .find(|&k| {
            let shift = 2 * (mn - p.scale(k)) + 1;
            i >> shift == j >> shift
        })
        .expect("every pair shares the unit cell");
    let gap_cells = i.abs_diff(j) - 1;
    Ok((gap_cells <= reach_in_cells(p, n, k, c_reach)?).then_some(PairClass::Level(k)))
}

/// Deepest level `k` whose `4^{-m_k}` cell holds both segments, provided
/// their horizontal gap is at most `C_reach·a_k·4^{-m_k}`; `None` otherwise.
pub fn classify_pair(
    s1: &Segment,
    s2: &Segment,
    p: &ScheduleParams,
    c_reach: u64,
) -> Result<Option<PairClass>> {
    let n = segment_level(s1, p)?;
    if segment_level(s2, p)? != n {
        return Err(Error::invalid("segments come from different families"));
    }
    classify_indices(
        half_cell_index(s1, p, n)?,
        half_cell_index(s2, p, n)?,
        p,
        n,
        c_reach,
    )
}

/// Number of index pairs `i < j` inside a block of `len` consecutive
/// segments with `j - i <= span`.
fn pairs_within(len: u128, span: u128) -> u128 {
    if len < 2 {
        return 0;
    }
    let d = span.min(len - 1);
    // Σ_{t=1}^{d} (len - t)
    d * len - d * (d + 1) / 2
}

/// Unordered `k`-pair counts for `k = 0..=n` by counting within cells.
pub fn enumerate_k_pairs(fam: &SegmentFamily, c_reach: u64) -> Result<Vec<u128>> {
    let p = fam.params();
    let n = fam.level();
    let mn = p.scale(n);
    let mut counts = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let span = reach_in_cells(p, n, k, c_reach)?.saturating_add(1);
        let cell = 2u128 << (2 * (mn - p.scale(k)));
        let cells = 1u128 << (2 * p.scale(k));
        let mut per_cell = pairs_within(cell, span);
        if k < n {
            let sub = 2u128 << (2 * (mn - p.scale(k + 1)));
            per_cell -= (cell / sub) * pairs_within(sub, span);
        }
        counts.push(cells * per_cell);
    }
    Ok(counts)
}

/// `4^{m_k}·(a_k·4^{m_n - m_k})²`.
pub fn predicted_k_pairs(p: &ScheduleParams, n: usize, k: usize) -> f64 {
    let a = p.increment_f64(k);
    let d = (p.scale(n) - p.scale(k)) as i32;
    4f64.powi(p.scale(k) as i32) * (a * 4f64.powi(d)).powi(2)
}

/// Exhaustive audit of all segment pairs of one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAudit {
    pub level: usize,
    pub c_reach: u64,
    pub segments: usize,
    /// Unordered pair counts per class level `0..=n`.
    pub counts: Vec<u64>,
    /// Interacting pairs per class level.
    pub interacting: Vec<u64>,
    /// Sum of pair areas per class level.
    pub area_sums: Vec<f64>,
    /// Largest `area·(4^{-m_k}·a_k)/4^{-2m_n}` per class level.
    pub max_normalized_area: Vec<f64>,
    pub self_area: f64,
    pub unclassified_pairs: u64,
    pub unclassified_interacting: u64,
    /// Unordered pairs within reach, self pairs counted once.
    pub sum_unordered: f64,
    /// Ordered pairs within reach, self pairs counted once.
    pub sum_ordered: f64,
}

/// All `N(N-1)/2` pairs of a family of at most [`EXHAUSTIVE_SEGMENT_BUDGET`]
/// segments: classification, exact interaction and intersection areas.
pub fn audit_pairs(fam: &SegmentFamily, c_reach: u64) -> Result<PairAudit> {
    let count = fam.len();
    if count > EXHAUSTIVE_SEGMENT_BUDGET {
        return Err(Error::Budget {
            stage: "exhaustive pair scan",
            required: count as u128,
            budget: EXHAUSTIVE_SEGMENT_BUDGET as u128,
        });
    }
    let p = fam.params();
    let n = fam.level();
    let wedges: Vec<DualWedge> = fam.segments().iter().map(dual_wedge).collect();
    let coords = fam.coords();
    let scale: Vec<f64> = (0..=n)
        .map(|k| p.cell_width(k).to_f64() * p.increment_f64(k) / p.cell_width(n).to_f64().powi(2))
        .collect();

    #[derive(Default)]
    struct Row {
        counts: Vec<u64>,
        interacting: Vec<u64>,
        areas: Vec<Vec<f64>>,
        max_norm: Vec<f64>,
        none: u64,
        none_hit: u64,
    }
    let rows: Vec<Result<Row>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut row = Row {
                counts: vec![0; n + 1],
                interacting: vec![0; n + 1],
                areas: vec![Vec::new(); n + 1],
                max_norm: vec![0.0; n + 1],
                ..Row::default()
            };
            for j in i + 1..count {
                let class = classify_indices(i as u128, j as u128, p, n, c_reach)?;
                // segments are sorted by x, so i lies left of j; a positive
                // intersection needs 0 < c_i - c_j < x_hi(j) - x_lo(i)
                let dc = coords[i][2] - coords[j][2];
                let span = coords[j][1] - coords[i][0];
                let maybe = dc > -1e-9 && dc < span + 1e-9;
                let hit = maybe && wedges_interact(&wedges[i], &wedges[j])?;
                let area = if hit {
                    wedge_pair_area(&wedges[i], &wedges[j])?
                } else {
                    0.0
                };
                match class {
                    Some(PairClass::Level(k)) => {
                        row.counts[k] += 1;
                        if hit {
                            row.interacting[k] += 1;
                            row.areas[k].push(area);
                            row.max_norm[k] = row.max_norm[k].max(area * scale[k]);
                        }
                    }
                    Some(PairClass::SameSegment) => unreachable!(),
                    None => {
                        row.none += 1;
                        if hit {
                            row.none_hit += 1;
                        }
                    }
                }
            }
            Ok(row)
        })
        .collect();

    let mut audit = PairAudit {
        level: n,
        c_reach,
        segments: count,
        counts: vec![0; n + 1],
        interacting: vec![0; n + 1],
        area_sums: vec![0.0; n + 1],
        max_normalized_area: vec![0.0; n + 1],
        self_area: compensated_sum(wedges.iter().map(wedge_area)),
        unclassified_pairs: 0,
        unclassified_interacting: 0,
        sum_unordered: 0.0,
        sum_ordered: 0.0,
    };
    let mut per_level: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    for row in rows {
        let row = row?;
        for k in 0..=n {
            audit.counts[k] += row.counts[k];
            audit.interacting[k] += row.interacting[k];
            audit.max_normalized_area[k] = audit.max_normalized_area[k].max(row.max_norm[k]);
            per_level[k].extend(row.areas[k].iter().copied());
        }
        audit.unclassified_pairs += row.none;
        audit.unclassified_interacting += row.none_hit;
    }
    for k in 0..=n {
        audit.area_sums[k] = compensated_sum(per_level[k].iter().copied());
    }
    let cross = compensated_sum(audit.area_sums.iter().copied());
    audit.sum_unordered = audit.self_area + cross;
    audit.sum_ordered = audit.self_area + 2.0 * cross;
    Ok(audit)
}

/// `∫_0^1 ∫ (#wedges over (ξ, y))² dy dξ`, the ordered pair sum over all
/// pairs, by the midpoint rule in `ξ`.
pub fn ordered_pair_sum_by_slices(fam: &SegmentFamily, nodes: usize) -> Result<f64> {
    if nodes < 1 {
        return Err(Error::invalid("need at least one node"));
    }
    let coords = fam.coords();
    Ok(midpoint(0.0, 1.0, nodes, |xi| {
        let mut events: Vec<(f64, i32)> = Vec::with_capacity(2 * coords.len());
        for c in coords {
            let iv = Interval::spanning(c[0] * xi + c[2], c[1] * xi + c[2]);
            if iv.length() > 0.0 {
                events.push((iv.lo, 1));
                events.push((iv.hi, -1));
            }
        }
        events.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut depth = 0i64;
        let mut acc = crate::kernel::CompensatedSum::new();
        for w in events.windows(2) {
            depth += w[0].1 as i64;
            acc.add((depth * depth) as f64 * (w[1].0 - w[0].0));
        }
        acc.value()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairRoute {
    Exhaustive,
    SliceQuadrature,
}

/// The pair-sum statistic and its comparison with `1 + Σ_{k<n} a_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSumBound {
    pub level: usize,
    pub route: PairRoute,
    pub sum_unordered: f64,
    pub sum_ordered: f64,
    /// `1 / sum_unordered`.
    pub lower_bound: f64,
    /// `1 + Σ_{k=1}^{n-1} a_k`.
    pub analytic: f64,
}

/// Reciprocal pair sum. Families within the exhaustive budget are scanned
/// pair by pair (pairs within reach only); larger ones use the slice
/// identity over all pairs with `nodes` quadrature nodes.
pub fn pair_sum_lower_bound(
    fam: &SegmentFamily,
    c_reach: u64,
    nodes: usize,
) -> Result<PairSumBound> {
    let n = fam.level();
    let analytic = 1.0 + fam.params().increment_sum(n.saturating_sub(1));
    let (route, unordered, ordered) = if fam.len() <= EXHAUSTIVE_SEGMENT_BUDGET {
        let a = audit_pairs(fam, c_reach)?;
        (PairRoute::Exhaustive, a.sum_unordered, a.sum_ordered)
    } else {
        let ordered = ordered_pair_sum_by_slices(fam, nodes)?;
        let self_area = compensated_sum(fam.segments().iter().map(|s| wedge_area(&dual_wedge(s))));
        (
            PairRoute::SliceQuadrature,
            (ordered + self_area) / 2.0,
            ordered,
        )
    };
    Ok(PairSumBound {
        level: n,
        route,
        sum_unordered: unordered,
        sum_ordered: ordered,
        lower_bound: 1.0 / unordered,
        analytic,
    })
}
