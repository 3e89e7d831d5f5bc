//! Probes of the limit graph: closeness to the construction grids, exact
//! graph length, oscillation tails and secant angles.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::construction::schedule::check_level;
use crate::construction::{eval_fn, ScheduleParams};
use crate::error::{Error, Result};
use crate::kernel::Dyadic;

pub use crate::construction::nestedness_check;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosenessReport {
    pub levels: usize,
    /// The grid has `4^grid_log4` points `i·4^{-grid_log4}`.
    pub grid_log4: u32,
    pub fraction_hit: f64,
    /// `1 - Π (1 - 2 b_n)` with factors clamped at zero.
    pub predicted_fraction: f64,
}

/// Hit half-width `floor(a_n·P_n)` and period `P_n = 4^{G - m_n}` in grid units.
fn windows(p: &ScheduleParams, levels: usize, g: u32) -> Result<Vec<(u128, u128)>> {
    (1..=levels)
        .map(|n| {
            let shift = 2 * (g - p.scale(n));
            let period = 1u128 << shift;
            let h = p.increment(n).mul_pow2(shift as i64)?.floor() as u128;
            Ok((period, h))
        })
        .collect()
}

struct MissCounter<'a> {
    w: &'a [(u128, u128)],
    full: HashMap<usize, u128>,
}

impl MissCounter<'_> {
    /// Grid indices in `[lo, hi)` missed by every level `>= n` (1-based),
    /// for a range inside one period of level `n - 1`.
    fn range(&mut self, n: usize, lo: u128, hi: u128) -> u128 {
        if lo >= hi {
            return 0;
        }
        if n > self.w.len() {
            return hi - lo;
        }
        let (period, _) = self.w[n - 1];
        let (qs, qe) = (lo.div_ceil(period), hi / period);
        if qs > qe {
            let base = (lo / period) * period;
            return self.within(n, lo - base, hi - base);
        }
        let mut total = 0;
        if lo < qs * period {
            total += self.within(n, lo - (qs - 1) * period, period);
        }
        if qe > qs {
            total += (qe - qs) * self.whole(n);
        }
        if hi > qe * period {
            total += self.within(n, 0, hi - qe * period);
        }
        total
    }

    /// Misses in `[lo, hi) ⊆ [0, P_n)`: level `n` misses exactly the open
    /// window `(h_n, P_n - h_n)`.
    fn within(&mut self, n: usize, lo: u128, hi: u128) -> u128 {
        let (period, h) = self.w[n - 1];
        let start = lo.max(h + 1);
        let end = hi.min(period.saturating_sub(h));
        self.range(n + 1, start, end)
    }

    fn whole(&mut self, n: usize) -> u128 {
        if let Some(&v) = self.full.get(&n) {
            return v;
        }
        let v = self.within(n, 0, self.w[n - 1].0);
        self.full.insert(n, v);
        v
    }
}

/// Fraction of the grid points `t = i·4^{-G}` with `d(t, 4^{-m_n}ℕ) <=
/// a_n·4^{-m_n}` for some `1 <= n <= N`, counted exactly.
pub fn closeness_fraction(
    p: &ScheduleParams,
    levels: usize,
    grid_log4: u32,
) -> Result<ClosenessReport> {
    check_level(levels, p)?;
    if levels == 0 {
        return Err(Error::invalid("closeness needs at least one level"));
    }
    if grid_log4 < p.scale(levels) {
        return Err(Error::invalid(format!(
            "grid 4^{grid_log4} is coarser than 4^{}",
            p.scale(levels)
        )));
    }
    if grid_log4 > 60 {
        return Err(Error::invalid("grid too fine"));
    }
    let w = windows(p, levels, grid_log4)?;
    let total = 1u128 << (2 * grid_log4);
    let mut counter = MissCounter {
        w: &w,
        full: HashMap::new(),
    };
    let missed = counter.range(1, 0, total);
    Ok(ClosenessReport {
        levels,
        grid_log4,
        fraction_hit: 1.0 - missed as f64 / total as f64,
        predicted_fraction: predicted_closeness(p, levels),
    })
}

/// Direct scan over the grid, for small grids.
pub fn closeness_fraction_scan(p: &ScheduleParams, levels: usize, grid_log4: u32) -> Result<f64> {
    let w = windows(p, levels, grid_log4)?;
    let total = 1u128 << (2 * grid_log4);
    let hits = (0..total)
        .filter(|&i| {
            w.iter().any(|&(period, h)| {
                let j = i % period;
                j <= h || period - j <= h
            })
        })
        .count();
    Ok(hits as f64 / total as f64)
}

/// `1 - Π_n max(0, 1 - 2 b_n)` with `b_n = A_n·4^{m_{n-1} - m_n}` and
/// `A_n = floor(a_n·4^{m_n - m_{n-1}})`.
pub fn predicted_closeness(p: &ScheduleParams, levels: usize) -> f64 {
    let mut miss = 1.0;
    for n in 1..=levels {
        let shift = 2 * (p.scale(n) - p.scale(n - 1)) as i64;
        let b = match p.increment(n).mul_pow2(shift) {
            Ok(d) => d.floor() as f64 * 2f64.powi(-(shift as i32)),
            Err(_) => p.increment_f64(n),
        };
        miss *= (1.0 - 2.0 * b).max(0.0);
    }
    1.0 - miss
}

/// Total length of the graph of `f_n` over `[lo, hi]`.
///
/// The graph is a union of horizontal pieces over the half-cells of level
/// `n`; each piece's height is checked against `f_n` at its start.
pub fn graph_length_over_interval(
    lo: Dyadic,
    hi: Dyadic,
    n: usize,
    p: &ScheduleParams,
    max_pieces: u128,
) -> Result<Dyadic> {
    check_level(n, p)?;
    if lo < Dyadic::ZERO || hi > Dyadic::ONE || lo > hi {
        return Err(Error::invalid(format!(
            "[{lo}, {hi}] is not an interval in [0, 1]"
        )));
    }
    let log2_cells = 2 * p.scale(n) as i64 + 1;
    let first = lo.mul_pow2(log2_cells)?.floor();
    let last = {
        let x = hi.mul_pow2(log2_cells)?;
        if x.exponent() == 0 {
            x.floor()
        } else {
            x.floor() + 1
        }
    };
    let pieces = (last - first).max(0) as u128;
    if pieces > max_pieces {
        return Err(Error::Budget {
            stage: "graph length",
            required: pieces,
            budget: max_pieces,
        });
    }
    let mut total = Dyadic::ZERO;
    for i in first..last {
        let a = Dyadic::new(i, log2_cells as u32)?;
        let b = Dyadic::new(i + 1, log2_cells as u32)?;
        let (s, e) = (a.max(lo), b.min(hi));
        if s >= e {
            continue;
        }
        // f_n is constant on the half-cell: the piece is horizontal
        let y0 = eval_fn(s, n, p)?;
        let y1 = eval_fn(a, n, p)?;
        if y0 != y1 {
            return Err(Error::invalid("graph is not horizontal on a half-cell"));
        }
        total = total.checked_add(e.checked_sub(s)?)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationTail {
    pub n: usize,
    pub levels: usize,
    /// `sup_t (f_N - f_n)(t) = (3/4)·Σ_{j=n+1}^{N} a_j·4^{-m_j}`.
    pub tail: Dyadic,
    /// `tail / (a_n·4^{-m_n})`.
    pub ratio: f64,
}

impl OscillationTail {
    /// Exact test `tail <= (num/den)·a_n·4^{-m_n}`.
    pub fn within(&self, num: u64, den: u64, p: &ScheduleParams) -> Result<bool> {
        let lhs = self.tail.checked_mul(Dyadic::from_int(den as i128))?;
        let rhs = p
            .increment(self.n)
            .checked_mul(p.cell_width(self.n))?
            .checked_mul(Dyadic::from_int(num as i128))?;
        Ok(lhs <= rhs)
    }
}

/// Tail of the series after level `n`, summed exactly up to level `N`.
pub fn oscillation_tail(n: usize, p: &ScheduleParams) -> Result<OscillationTail> {
    let levels = p.levels();
    check_level(n, p)?;
    let mut tail = Dyadic::ZERO;
    for j in n + 1..=levels {
        tail = tail.checked_add(p.displacement(j)?)?;
    }
    let unit = p.increment(n).checked_mul(p.cell_width(n))?;
    Ok(OscillationTail {
        n,
        levels,
        tail,
        ratio: ratio(tail, unit),
    })
}

/// `a / b` for positive dyadics, without overflow of the binary64 range.
fn ratio(a: Dyadic, b: Dyadic) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let scale = b.exponent() as i64;
    match (a.mul_pow2(scale), b.mul_pow2(scale)) {
        (Ok(x), Ok(y)) => x.to_f64() / y.to_f64(),
        _ => a.to_f64() / b.to_f64(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecantRecord {
    pub n: usize,
    pub z1: Dyadic,
    pub z2: Dyadic,
    /// `f_N(z1) - f_N(x0)` in units of `a_n·4^{-m_n}`.
    pub rise1: f64,
    pub rise2: f64,
    /// Angle between the two secant lines, in `[0, π/2]`.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecantReport {
    pub x0: Dyadic,
    pub deep_level: usize,
    pub records: Vec<SecantRecord>,
    /// Close levels where no admissible secant pair exists.
    pub unresolved: Vec<usize>,
}

/// Whether `d(x, 4^{-m_n}ℕ) <= a_n·4^{-m_n}`.
pub fn is_close(x: Dyadic, n: usize, p: &ScheduleParams) -> Result<bool> {
    let r = x.mul_pow2(2 * p.scale(n) as i64)?.fract();
    let d = r.min(Dyadic::ONE.checked_sub(r)?);
    Ok(d <= p.increment(n))
}

/// Secants from `(x0, f_N(x0))` at level `n`, with `f_N` standing in for the
/// limit function.
///
/// Candidates are the points `x0 + i·4^{-m_N}/2` within `a_n·4^{-m_n}` of
/// `x0`. `z1` is the farthest one in the level-`n` cell of `x0` with
/// `|f_N(z1) - f_N(x0)| <= a_n·4^{-m_n}/10`; `z2` the farthest one in an
/// adjacent cell with `|f_N(z2) - f_N(x0)| >= 9·a_n·4^{-m_n}/10`.
/// `None` when either point does not exist.
pub fn secant_probe(
    x0: Dyadic,
    n: usize,
    deep: usize,
    p: &ScheduleParams,
    max_candidates: u128,
) -> Result<Option<SecantRecord>> {
    check_level(deep, p)?;
    if n > deep {
        return Err(Error::invalid(format!(
            "level {n} deeper than the surrogate level {deep}"
        )));
    }
    if x0 < Dyadic::ZERO || x0 >= Dyadic::ONE {
        return Err(Error::invalid(format!("base point {x0} outside [0, 1)")));
    }
    if !is_close(x0, n, p)? {
        return Err(Error::invalid(format!(
            "base point {x0} is not within a_{n}·4^-m_{n} of the level-{n} grid"
        )));
    }
    let unit = p.increment(n).checked_mul(p.cell_width(n))?;
    let step_log2 = 2 * p.scale(deep) as i64 + 1;
    let reach = unit.mul_pow2(step_log2)?.floor() as u128;
    if 2 * reach > max_candidates {
        return Err(Error::Budget {
            stage: "secant search",
            required: 2 * reach,
            budget: max_candidates,
        });
    }
    let cells = 2 * p.scale(n) as i64;
    let cell0 = x0.mul_pow2(cells)?.floor();
    let f0 = eval_fn(x0, deep, p)?;
    let tenth_num = unit;
    let mut best1: Option<(u128, Dyadic, Dyadic)> = None;
    let mut best2: Option<(u128, Dyadic, Dyadic)> = None;
    // farthest first; left before right at equal distance
    for dist in (1..=reach).rev() {
        for sign in [-1i128, 1] {
            let z = x0.checked_add(Dyadic::new(sign * dist as i128, 0)?.mul_pow2(-step_log2)?)?;
            if z < Dyadic::ZERO || z >= Dyadic::ONE {
                continue;
            }
            let cell = z.mul_pow2(cells)?.floor();
            let rise = eval_fn(z, deep, p)?.checked_sub(f0)?;
            let size = rise.abs().checked_mul(Dyadic::from_int(10))?;
            if best1.is_none() && cell == cell0 && size <= tenth_num {
                best1 = Some((dist, z, rise));
            }
            if best2.is_none()
                && (cell - cell0).abs() == 1
                && size >= tenth_num.checked_mul(Dyadic::from_int(9))?
            {
                best2 = Some((dist, z, rise));
            }
        }
        if best1.is_some() && best2.is_some() {
            break;
        }
    }
    let (Some((_, z1, r1)), Some((_, z2, r2))) = (best1, best2) else {
        return Ok(None);
    };
    let v1 = (
        ratio_signed(z1.checked_sub(x0)?, unit),
        ratio_signed(r1, unit),
    );
    let v2 = (
        ratio_signed(z2.checked_sub(x0)?, unit),
        ratio_signed(r2, unit),
    );
    let cross = v1.0 * v2.1 - v1.1 * v2.0;
    let dot = v1.0 * v2.0 + v1.1 * v2.1;
    Ok(Some(SecantRecord {
        n,
        z1,
        z2,
        rise1: v1.1,
        rise2: v2.1,
        angle: cross.abs().atan2(dot.abs()),
    }))
}

fn ratio_signed(a: Dyadic, b: Dyadic) -> f64 {
    let r = ratio(a.abs(), b);
    if a.signum() < 0 {
        -r
    } else {
        r
    }
}

/// Secant records at every level of `levels` that satisfies closeness at
/// `x0`; levels where `x0` is not close are skipped.
pub fn secant_report(
    x0: Dyadic,
    levels: std::ops::RangeInclusive<usize>,
    deep: usize,
    p: &ScheduleParams,
    max_candidates: u128,
) -> Result<SecantReport> {
    let mut records = Vec::new();
    let mut unresolved = Vec::new();
    for n in levels {
        if is_close(x0, n, p)? {
            match secant_probe(x0, n, deep, p, max_candidates)? {
                Some(r) => records.push(r),
                None => unresolved.push(n),
            }
        }
    }
    Ok(SecantReport {
        x0,
        deep_level: deep,
        records,
        unresolved,
    })
}
