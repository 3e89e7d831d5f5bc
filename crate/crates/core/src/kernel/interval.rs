//! Closed intervals on the line and finite unions of them.

use serde::{Deserialize, Serialize};

use super::sum::compensated_sum;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Panics if `lo > hi` or either end is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "interval requires lo <= hi, got [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Interval spanning two points in either order.
    pub fn spanning(a: f64, b: f64) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn inflate(&self, eps: f64) -> Interval {
        Interval {
            lo: self.lo - eps,
            hi: self.hi + eps,
        }
    }

    pub fn translate(&self, d: f64) -> Interval {
        Interval {
            lo: self.lo + d,
            hi: self.hi + d,
        }
    }
}

/// Sorted, pairwise disjoint, non-adjacent intervals.
///
/// Zero-length parts never survive on their own: a degenerate interval is
/// absorbed when it touches an existing part and dropped otherwise, so the
/// union carries Lebesgue-measure semantics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    parts: Vec<Interval>,
}

impl IntervalUnion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Union of an arbitrary collection of intervals.
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        let mut v: Vec<Interval> = iter.into_iter().collect();
        v.sort_unstable_by(|a, b| a.lo.total_cmp(&b.lo));
        Self::from_sorted(v, 0.0)
    }

    /// Merge intervals already sorted by `lo`. Gaps of at most `tol` are
    /// closed.
    pub(crate) fn from_sorted(sorted: Vec<Interval>, tol: f64) -> Self {
        let mut parts: Vec<Interval> = Vec::with_capacity(sorted.len());
        for i in sorted {
            match parts.last_mut() {
                Some(last) if i.lo <= last.hi + tol => {
                    if i.hi > last.hi {
                        last.hi = i.hi;
                    }
                }
                _ => parts.push(i),
            }
        }
        parts.retain(|p| !p.is_degenerate());
        IntervalUnion { parts }
    }

    /// Set union with one more interval.
    pub fn insert(&self, i: Interval) -> IntervalUnion {
        let mut out = self.clone();
        out.insert_mut(i);
        out
    }

    pub fn insert_mut(&mut self, i: Interval) {
        debug_assert!(i.lo <= i.hi);
        // parts strictly before i (no contact), parts strictly after i
        let start = self.parts.partition_point(|p| p.hi < i.lo);
        let end = self.parts.partition_point(|p| p.lo <= i.hi);
        if start == end {
            if !i.is_degenerate() {
                self.parts.insert(start, i);
            }
            return;
        }
        let lo = i.lo.min(self.parts[start].lo);
        let hi = i.hi.max(self.parts[end - 1].hi);
        self.parts.drain(start + 1..end);
        self.parts[start] = Interval { lo, hi };
    }

    pub fn measure(&self) -> f64 {
        compensated_sum(self.parts.iter().map(Interval::length))
    }

    /// Grow every part by `eps` on both sides and re-merge.
    pub fn inflate(&self, eps: f64) -> Result<IntervalUnion> {
        if !(eps >= 0.0) {
            return Err(Error::invalid(format!("negative inflation radius {eps}")));
        }
        if eps == 0.0 {
            return Ok(self.clone());
        }
        let v: Vec<Interval> = self.parts.iter().map(|p| p.inflate(eps)).collect();
        Ok(Self::from_sorted(v, 0.0))
    }

    pub fn translate(&self, d: f64) -> IntervalUnion {
        IntervalUnion {
            parts: self.parts.iter().map(|p| p.translate(d)).collect(),
        }
    }

    /// Union of two unions by a linear merge. Gaps of at most `tol` are closed.
    pub fn union_with_tolerance(&self, other: &IntervalUnion, tol: f64) -> IntervalUnion {
        self.union_translated(other, 0.0, tol)
    }

    /// `self ∪ (other + shift)` in one merge pass.
    pub fn union_translated(&self, other: &IntervalUnion, shift: f64, tol: f64) -> IntervalUnion {
        let (a, b) = (&self.parts, &other.parts);
        let mut parts: Vec<Interval> = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = if j >= b.len() || (i < a.len() && a[i].lo <= b[j].lo + shift) {
                i += 1;
                a[i - 1]
            } else {
                j += 1;
                b[j - 1].translate(shift)
            };
            match parts.last_mut() {
                Some(last) if next.lo <= last.hi + tol => {
                    if next.hi > last.hi {
                        last.hi = next.hi;
                    }
                }
                _ => parts.push(next),
            }
        }
        if parts.iter().any(Interval::is_degenerate) {
            parts.retain(|p| !p.is_degenerate());
        }
        IntervalUnion { parts }
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        self.union_with_tolerance(other, 0.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        let k = self.parts.partition_point(|p| p.hi < x);
        k < self.parts.len() && self.parts[k].lo <= x
    }

    pub fn hull(&self) -> Option<Interval> {
        Some(Interval {
            lo: self.parts.first()?.lo,
            hi: self.parts.last()?.hi,
        })
    }

    #[cfg(test)]
    fn check(&self) -> bool {
        self.parts.iter().all(|p| p.lo < p.hi) && self.parts.windows(2).all(|w| w[0].hi < w[1].lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn insert_examples() {
        let u = IntervalUnion::new().insert(iv(0.0, 1.0));
        assert_eq!(u.parts(), &[iv(0.0, 1.0)]);

        let u2 = u.insert(iv(0.5, 2.0));
        assert_eq!(u2.parts(), &[iv(0.0, 2.0)]);
        assert_eq!(u2.measure(), 2.0);

        let u3 = IntervalUnion::from_intervals([iv(0.0, 1.0), iv(3.0, 4.0)]).insert(iv(1.0, 3.0));
        assert_eq!(u3.parts(), &[iv(0.0, 4.0)]);
    }

    #[test]
    fn degenerate_intervals() {
        let u = IntervalUnion::new().insert(Interval::point(0.5));
        assert!(u.is_empty());
        let v = IntervalUnion::from_intervals([iv(0.0, 1.0)]).insert(Interval::point(1.0));
        assert_eq!(v.parts(), &[iv(0.0, 1.0)]);
        let w = IntervalUnion::from_intervals([Interval::point(0.0), Interval::point(0.75)]);
        assert_eq!(w.measure(), 0.0);
    }

    #[test]
    fn measure_examples() {
        assert_eq!(IntervalUnion::new().measure(), 0.0);
        let u = IntervalUnion::from_intervals([iv(0.0, 1.0), iv(2.0, 2.5)]);
        assert_eq!(u.measure(), 1.5);
    }

    #[test]
    fn inflate_examples() {
        let u = IntervalUnion::from_intervals([iv(0.0, 1.0)]);
        assert_eq!(u.inflate(0.25).unwrap().parts(), &[iv(-0.25, 1.25)]);

        let v = IntervalUnion::from_intervals([iv(0.0, 1.0), iv(1.1, 2.0)]);
        let w = v.inflate(0.1).unwrap();
        assert_eq!(w.len(), 1);
        assert!((w.measure() - 2.2).abs() < 1e-15);

        assert_eq!(v.inflate(0.0).unwrap(), v);
        assert!(v.inflate(-1.0).is_err());
    }

    #[test]
    fn measure_matches_grid_coverage() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let ivs: Vec<Interval> = (0..40)
            .map(|_| {
                let a: f64 = rng.gen_range(0.0..1.0);
                let l: f64 = rng.gen_range(0.0..0.05);
                iv(a, (a + l).min(1.0))
            })
            .collect();
        let u = IntervalUnion::from_intervals(ivs.iter().copied());
        // grid oracle at resolution 1e-6 on [0, 1)
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|&k| {
                let x = (k as f64 + 0.5) / n as f64;
                ivs.iter().any(|i| i.lo <= x && x <= i.hi)
            })
            .count();
        let grid = hits as f64 / n as f64;
        assert!(
            (u.measure() - grid).abs() < 1e-3,
            "{} vs {}",
            u.measure(),
            grid
        );
    }

    fn arb_intervals() -> impl Strategy<Value = Vec<Interval>> {
        prop::collection::vec((-10.0f64..10.0, 0.0f64..3.0), 0..30)
            .prop_map(|v| v.into_iter().map(|(a, l)| iv(a, a + l)).collect())
    }

    proptest! {
        #[test]
        fn insertion_order_invariance(ivs in arb_intervals(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = ivs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut a = IntervalUnion::new();
            for i in &ivs { a.insert_mut(*i); }
            let mut b = IntervalUnion::new();
            for i in &shuffled { b.insert_mut(*i); }
            prop_assert!(a.check());
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a, IntervalUnion::from_intervals(ivs));
        }

        #[test]
        fn insert_is_monotone(ivs in arb_intervals()) {
            let mut u = IntervalUnion::new();
            let mut last = 0.0;
            for i in ivs {
                u.insert_mut(i);
                let m = u.measure();
                prop_assert!(m >= last - 1e-12);
                last = m;
            }
        }

        #[test]
        fn inflate_semigroup(ivs in arb_intervals(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let u = IntervalUnion::from_intervals(ivs);
            let once = u.inflate(a + b).unwrap();
            let twice = u.inflate(a).unwrap().inflate(b).unwrap();
            prop_assert_eq!(once.len(), twice.len());
            for (p, q) in once.parts().iter().zip(twice.parts()) {
                prop_assert!((p.lo - q.lo).abs() < 1e-12 && (p.hi - q.hi).abs() < 1e-12);
            }
        }

        #[test]
        fn union_matches_bulk(x in arb_intervals(), y in arb_intervals()) {
            let a = IntervalUnion::from_intervals(x.clone());
            let b = IntervalUnion::from_intervals(y.clone());
            let all = IntervalUnion::from_intervals(x.into_iter().chain(y));
            prop_assert_eq!(a.union(&b), all);
        }
    }
}
