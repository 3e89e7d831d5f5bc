//! Increments `a_k`, the scale schedule `m_k`, and the graphs `f_n`.

use serde::{Deserialize, Serialize};

use super::growth::GrowthSequence;
use crate::error::{Error, Result};
use crate::kernel::Dyadic;

/// Separation constant used by the construction when none is given.
pub const DEFAULT_SEPARATION: u64 = 1000;

/// `a_1 = min(1, g(1))`, `a_k = min(1, g(k) - g(k-1))`.
///
/// Each increment is the binary64 value of the difference, held exactly as a
/// dyadic rational. A zero increment (flat step of `g`) is rejected.
pub fn derive_increments(g: &GrowthSequence) -> Result<Vec<Dyadic>> {
    let v = g.values();
    let mut out = Vec::with_capacity(v.len());
    for k in 1..=v.len() {
        let raw = if k == 1 { v[0] } else { v[k - 1] - v[k - 2] };
        let a = raw.min(1.0);
        if !(a > 0.0) {
            return Err(Error::config(format!(
                "growth increment a_{k} = {raw} is not positive (flat step of g at k = {k})"
            )));
        }
        out.push(Dyadic::from_f64(a)?);
    }
    Ok(out)
}

/// Increments, scales and separation constant of one construction.
///
/// `scales[0] = 0` is the unit scale; `scales[k]` is `m_k` for `k = 1..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    growth: Option<Vec<f64>>,
    increments: Vec<Dyadic>,
    scales: Vec<u32>,
    c_sep: u64,
}

impl ScheduleParams {
    /// Minimal schedule for the given growth sequence.
    pub fn from_growth(g: &GrowthSequence, c_sep: u64, m_budget: u32) -> Result<Self> {
        let a = derive_increments(g)?;
        let mut p = derive_schedule(&a, c_sep, m_budget)?;
        p.growth = Some(g.values().to_vec());
        Ok(p)
    }

    /// Validating constructor for externally supplied schedules.
    pub fn from_parts(
        growth: Option<Vec<f64>>,
        increments: Vec<Dyadic>,
        scales: Vec<u32>,
        c_sep: u64,
    ) -> Result<Self> {
        let p = ScheduleParams {
            growth,
            increments,
            scales,
            c_sep,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.increments.len();
        if self.scales.len() != n + 1 || self.scales.first() != Some(&0) {
            return Err(Error::config(
                "schedule needs m_0 = 0 and one scale per increment",
            ));
        }
        if self.c_sep < 2 {
            return Err(Error::config("separation constant must be at least 2"));
        }
        for (i, a) in self.increments.iter().enumerate() {
            if *a <= Dyadic::ZERO || *a > Dyadic::ONE {
                return Err(Error::config(format!(
                    "increment a_{} = {a} outside (0, 1]",
                    i + 1
                )));
            }
        }
        for k in 1..=n {
            if self.scales[k] <= self.scales[k - 1] {
                return Err(Error::config(format!("scales not increasing at k = {k}")));
            }
            let delta = self.scales[k] - self.scales[k - 1];
            if !separated(self.c_sep, self.bound(k), delta)? {
                return Err(Error::config(format!(
                    "separation constraint fails at k = {k}"
                )));
            }
        }
        Ok(())
    }

    /// The increment bound entering the constraint at level `k`.
    fn bound(&self, k: usize) -> Dyadic {
        if k == 1 {
            self.increments[0]
        } else {
            self.increments[k - 1].min(self.increments[k - 2])
        }
    }

    /// Number of construction levels `N`.
    pub fn levels(&self) -> usize {
        self.increments.len()
    }

    pub fn growth(&self) -> Option<&[f64]> {
        self.growth.as_deref()
    }

    pub fn increments(&self) -> &[Dyadic] {
        &self.increments
    }

    pub fn scales(&self) -> &[u32] {
        &self.scales
    }

    pub fn c_sep(&self) -> u64 {
        self.c_sep
    }

    /// `a_k` for `1 <= k <= N`; `a_0` is taken to be 1.
    pub fn increment(&self, k: usize) -> Dyadic {
        if k == 0 {
            Dyadic::ONE
        } else {
            self.increments[k - 1]
        }
    }

    pub fn increment_f64(&self, k: usize) -> f64 {
        self.increment(k).to_f64()
    }

    /// `m_k`.
    pub fn scale(&self, k: usize) -> u32 {
        self.scales[k]
    }

    /// `4^{-m_k}`.
    pub fn cell_width(&self, k: usize) -> Dyadic {
        Dyadic::pow4_neg(self.scales[k]).expect("scale within exponent limit")
    }

    /// Height added on the second half of every level-`k` cell:
    /// `(3/4)·a_k·4^{-m_k}`, and `3/4` for the base step at `k = 0`.
    pub fn displacement(&self, k: usize) -> Result<Dyadic> {
        let three_quarters = Dyadic::new(3, 2)?;
        Ok(three_quarters
            .checked_mul(self.increment(k))?
            .mul_pow2(-2 * self.scales[k] as i64)?)
    }

    /// `Σ_{k=1}^{n} a_k` in binary64.
    pub fn increment_sum(&self, n: usize) -> f64 {
        crate::kernel::compensated_sum((1..=n).map(|k| self.increment_f64(k)))
    }

    /// Truncation to the first `n` levels.
    pub fn truncated(&self, n: usize) -> ScheduleParams {
        ScheduleParams {
            growth: self.growth.as_ref().map(|g| g[..n.min(g.len())].to_vec()),
            increments: self.increments[..n].to_vec(),
            scales: self.scales[..=n].to_vec(),
            c_sep: self.c_sep,
        }
    }
}

/// Whether `c_sep·4^{-(m+delta)} <= bound·4^{-m}`, i.e. `c_sep <= bound·4^delta`.
fn separated(c_sep: u64, bound: Dyadic, delta: u32) -> Result<bool> {
    let lhs = Dyadic::from_int(c_sep as i128);
    match bound.mul_pow2(2 * delta as i64) {
        Ok(rhs) => Ok(lhs <= rhs),
        // 4^delta beyond the mantissa range dwarfs any separation constant
        Err(_) => Ok(true),
    }
}

/// Minimal scale schedule: for each `k`, the least `m_k > m_{k-1}` with
/// `C·4^{-m_k} <= a_k·4^{-m_{k-1}}` and `C·4^{-m_k} <= a_{k-1}·4^{-m_{k-1}}`
/// (only the first constraint at `k = 1`, with `m_0 = 0`).
pub fn derive_schedule(a: &[Dyadic], c_sep: u64, m_budget: u32) -> Result<ScheduleParams> {
    if c_sep < 2 {
        return Err(Error::config(format!(
            "separation constant {c_sep} must be at least 2"
        )));
    }
    if a.is_empty() {
        return Err(Error::config("no increments"));
    }
    for (i, ak) in a.iter().enumerate() {
        if *ak <= Dyadic::ZERO || *ak > Dyadic::ONE {
            return Err(Error::config(format!(
                "increment a_{} = {ak} outside (0, 1]",
                i + 1
            )));
        }
    }
    let mut p = ScheduleParams {
        growth: None,
        increments: a.to_vec(),
        scales: vec![0],
        c_sep,
    };
    for k in 1..=a.len() {
        let bound = p.bound(k);
        let mut delta = 1u32;
        while !separated(c_sep, bound, delta)? {
            delta += 1;
        }
        let m = p.scales[k - 1] + delta;
        if m > m_budget {
            return Err(Error::ScheduleBudget {
                k,
                required: m,
                budget: m_budget,
            });
        }
        p.scales.push(m);
    }
    Ok(p)
}

/// The 1-periodic base step: `0` on `[0, 1/2)`, `3/4` on `[1/2, 1)`.
pub fn eval_base_step(x: f64) -> f64 {
    if x - x.floor() < 0.5 {
        0.0
    } else {
        0.75
    }
}

/// Exact base step on a dyadic argument.
pub fn eval_base_step_exact(x: Dyadic) -> Dyadic {
    if x.fract() < Dyadic::new(1, 1).unwrap() {
        Dyadic::ZERO
    } else {
        Dyadic::new(3, 2).unwrap()
    }
}

/// `f_n(x) = f(x) + Σ_{j=1}^{n} a_j 4^{-m_j} f(4^{m_j} x)`, exactly.
pub fn eval_fn(x: Dyadic, n: usize, p: &ScheduleParams) -> Result<Dyadic> {
    check_level(n, p)?;
    let mut acc = Dyadic::ZERO;
    for j in 0..=n {
        let scaled = x.mul_pow2(2 * p.scale(j) as i64)?;
        if !eval_base_step_exact(scaled).is_zero() {
            acc = acc.checked_add(p.displacement(j)?)?;
        }
    }
    Ok(acc)
}

/// Binary64 evaluation of `f_n`.
pub fn eval_fn_f64(x: f64, n: usize, p: &ScheduleParams) -> Result<f64> {
    check_level(n, p)?;
    let mut acc = 0.0;
    for j in 0..=n {
        let scale = 4f64.powi(p.scale(j) as i32);
        if eval_base_step(x * scale) != 0.0 {
            acc += p.displacement(j)?.to_f64();
        }
    }
    Ok(acc)
}

pub(crate) fn check_level(n: usize, p: &ScheduleParams) -> Result<()> {
    if n > p.levels() {
        return Err(Error::invalid(format!(
            "level {n} out of range: schedule has {} levels",
            p.levels()
        )));
    }
    Ok(())
}
