//! Exact segment and box families of the graph construction.

use serde::{Deserialize, Serialize};

use super::baselines::IfsParams;
use super::schedule::{check_level, ScheduleParams};
use crate::error::{Error, Result};
use crate::kernel::Dyadic;

/// Horizontal segment `[x_lo, x_hi) × {y}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    pub x_lo: Dyadic,
    pub x_hi: Dyadic,
    pub y: Dyadic,
}

impl Segment {
    pub fn length(&self) -> Dyadic {
        self.x_hi
            .checked_sub(self.x_lo)
            .expect("segment length is representable")
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [self.x_lo.to_f64(), self.x_hi.to_f64(), self.y.to_f64()]
    }
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x_lo: Dyadic,
    pub x_hi: Dyadic,
    pub y_lo: Dyadic,
    pub y_hi: Dyadic,
}

impl Rect {
    pub fn contains(&self, other: &Rect) -> bool {
        self.x_lo <= other.x_lo
            && other.x_hi <= self.x_hi
            && self.y_lo <= other.y_lo
            && other.y_hi <= self.y_hi
    }

    pub fn to_f64(&self) -> [f64; 4] {
        [
            self.x_lo.to_f64(),
            self.x_hi.to_f64(),
            self.y_lo.to_f64(),
            self.y_hi.to_f64(),
        ]
    }

    pub fn translate(&self, dx: Dyadic, dy: Dyadic) -> Result<Rect> {
        Ok(Rect {
            x_lo: self.x_lo.checked_add(dx)?,
            x_hi: self.x_hi.checked_add(dx)?,
            y_lo: self.y_lo.checked_add(dy)?,
            y_hi: self.y_hi.checked_add(dy)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    GraphConstruction,
    FourCorner,
    Ifs,
    RandomFourCorner,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::GraphConstruction => "graph-construction",
            FamilyKind::FourCorner => "four-corner",
            FamilyKind::Ifs => "ifs",
            FamilyKind::RandomFourCorner => "random-four-corner",
        }
    }
}

/// The `2·4^{m_n}` horizontal pieces of the graph of `f_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFamily {
    level: usize,
    params: ScheduleParams,
    segments: Vec<Segment>,
    coords: Vec<[f64; 3]>,
}

impl SegmentFamily {
    pub(crate) fn from_parts(level: usize, params: ScheduleParams, segments: Vec<Segment>) -> Self {
        let coords = segments.iter().map(Segment::to_f64).collect();
        SegmentFamily {
            level,
            params,
            segments,
            coords,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn params(&self) -> &ScheduleParams {
        &self.params
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Binary64 copies `[x_lo, x_hi, y]` of the segments.
    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Exact total horizontal length.
    pub fn total_length(&self) -> Result<Dyadic> {
        let mut acc = Dyadic::ZERO;
        for s in &self.segments {
            acc = acc.checked_add(s.length())?;
        }
        Ok(acc)
    }

    /// Index of the segment whose x-range contains `x` in `[0, 1)`.
    pub fn locate(&self, x: Dyadic) -> Option<usize> {
        let k = self.segments.partition_point(|s| s.x_hi <= x);
        (k < self.segments.len() && self.segments[k].x_lo <= x).then_some(k)
    }
}

/// Finite union of closed axis-aligned rectangles.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxFamily {
    level: usize,
    kind: FamilyKind,
    boxes: Vec<Rect>,
    params: Option<ScheduleParams>,
    ifs: Option<IfsParams>,
    seed: Option<u64>,
    coords: Vec<[f64; 4]>,
}

impl BoxFamily {
    pub(crate) fn from_parts(
        level: usize,
        kind: FamilyKind,
        boxes: Vec<Rect>,
        params: Option<ScheduleParams>,
        ifs: Option<IfsParams>,
        seed: Option<u64>,
    ) -> Self {
        let coords = boxes.iter().map(Rect::to_f64).collect();
        BoxFamily {
            level,
            kind,
            boxes,
            params,
            ifs,
            seed,
            coords,
        }
    }

    /// A family made of arbitrary rectangles, e.g. a single filled square.
    pub fn custom(kind: FamilyKind, level: usize, boxes: Vec<Rect>) -> Self {
        Self::from_parts(level, kind, boxes, None, None, None)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn boxes(&self) -> &[Rect] {
        &self.boxes
    }

    /// Binary64 copies `[x_lo, x_hi, y_lo, y_hi]` of the boxes.
    pub fn coords(&self) -> &[[f64; 4]] {
        &self.coords
    }

    pub fn params(&self) -> Option<&ScheduleParams> {
        self.params.as_ref()
    }

    pub fn ifs(&self) -> Option<&IfsParams> {
        self.ifs.as_ref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Whether every box of `self` lies inside some box of `parent`.
    pub fn is_nested_in(&self, parent: &BoxFamily) -> bool {
        let mut order: Vec<&Rect> = parent.boxes.iter().collect();
        order.sort_by(|a, b| a.x_lo.cmp(&b.x_lo).then(a.y_lo.cmp(&b.y_lo)));
        let widest = parent
            .boxes
            .iter()
            .map(|b| b.x_hi.checked_sub(b.x_lo).expect("box width"))
            .max()
            .unwrap_or(Dyadic::ZERO);
        self.boxes.iter().all(|child| {
            // candidate parents start in (child.x_lo - widest, child.x_lo]
            let end = order.partition_point(|p| p.x_lo <= child.x_lo);
            let floor = child.x_lo.checked_sub(widest).ok();
            order[..end]
                .iter()
                .rev()
                .take_while(|p| floor.is_none_or(|f| p.x_lo >= f))
                .any(|p| p.contains(child))
        })
    }
}

/// Exact `2^e` for the segment count of a level, or a budget error.
fn count_at_scale(m: u32, max: u128, stage: &'static str) -> Result<usize> {
    let required = if 2 * m as u64 + 1 >= 127 {
        u128::MAX
    } else {
        2u128 << (2 * m)
    };
    if required > max || required > usize::MAX as u128 {
        return Err(Error::Budget {
            stage,
            required,
            budget: max,
        });
    }
    Ok(required as usize)
}

/// Heights of every half-cell of level `n`, in order.
fn half_cell_heights(n: usize, p: &ScheduleParams, count: usize) -> Result<Vec<Dyadic>> {
    let mn = p.scale(n);
    let disp: Vec<Dyadic> = (0..=n).map(|j| p.displacement(j)).collect::<Result<_>>()?;
    let shifts: Vec<u32> = (0..=n).map(|j| 2 * (mn - p.scale(j))).collect();
    let mut ys = Vec::with_capacity(count);
    for i in 0..count as u128 {
        let mut y = Dyadic::ZERO;
        for j in 0..=n {
            if (i >> shifts[j]) & 1 == 1 {
                y = y.checked_add(disp[j])?;
            }
        }
        ys.push(y);
    }
    Ok(ys)
}

/// Segments `[i·w, (i+1)·w) × {f_n}` with `w = 4^{-m_n}/2`.
pub fn build_segment_family(
    n: usize,
    p: &ScheduleParams,
    max_segments: u128,
) -> Result<SegmentFamily> {
    check_level(n, p)?;
    let mn = p.scale(n);
    let count = count_at_scale(mn, max_segments, "segment family")?;
    let log2_den = 2 * mn + 1;
    let ys = half_cell_heights(n, p, count)?;
    let segments = ys
        .into_iter()
        .enumerate()
        .map(|(i, y)| {
            Ok(Segment {
                x_lo: Dyadic::new(i as i128, log2_den)?,
                x_hi: Dyadic::new(i as i128 + 1, log2_den)?,
                y,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SegmentFamily::from_parts(n, p.clone(), segments))
}

/// Segments of level `n` thickened upward by `4^{-m_n}`.
pub fn build_box_family(n: usize, p: &ScheduleParams, max_boxes: u128) -> Result<BoxFamily> {
    let segs = build_segment_family(n, p, max_boxes)?;
    let h = p.cell_width(n);
    let boxes = segs
        .segments()
        .iter()
        .map(|s| {
            Ok(Rect {
                x_lo: s.x_lo,
                x_hi: s.x_hi,
                y_lo: s.y,
                y_hi: s.y.checked_add(h)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoxFamily::from_parts(
        n,
        FamilyKind::GraphConstruction,
        boxes,
        Some(p.clone()),
        None,
        None,
    ))
}

/// Whether the level-`n + 1` boxes lie inside the level-`n` boxes.
pub fn nestedness_check(n: usize, p: &ScheduleParams, max_boxes: u128) -> Result<bool> {
    check_level(n + 1, p)?;
    let parent = build_box_family(n, p, max_boxes)?;
    let child = build_box_family(n + 1, p, max_boxes)?;
    Ok(child.is_nested_in(&parent))
}
