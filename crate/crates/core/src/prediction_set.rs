//! Finite unions of closed real intervals.

use serde::{Deserialize, Serialize};

/// A closed interval `[lo, hi]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is inverted");
        Self { lo, hi }
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lo <= y && y <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Sorted, pairwise disjoint, non-touching closed intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictionSet {
    intervals: Vec<Interval>,
}

impl PredictionSet {
    pub fn empty() -> Self {
        Self {
            intervals: Vec::new(),
        }
    }

    pub fn real_line() -> Self {
        Self {
            intervals: vec![Interval::new(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    /// `[lo, hi]`, or the empty set when `lo > hi`.
    pub fn interval(lo: f64, hi: f64) -> Self {
        if lo <= hi {
            Self {
                intervals: vec![Interval::new(lo, hi)],
            }
        } else {
            Self::empty()
        }
    }

    /// Normalizes arbitrary intervals: drops inverted ones, sorts, merges
    /// overlapping or touching pieces.
    pub fn from_intervals(raw: impl IntoIterator<Item = Interval>) -> Self {
        let mut items: Vec<Interval> = raw.into_iter().filter(|iv| iv.lo <= iv.hi).collect();
        items.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(items.len());
        for iv in items {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_real_line(&self) -> bool {
        matches!(self.intervals.as_slice(), [iv] if iv.lo == f64::NEG_INFINITY && iv.hi == f64::INFINITY)
    }

    pub fn contains(&self, y: f64) -> bool {
        // first interval whose upper end is >= y
        let idx = self.intervals.partition_point(|iv| iv.hi < y);
        self.intervals.get(idx).is_some_and(|iv| iv.lo <= y)
    }

    /// Lebesgue measure; infinite for unbounded sets.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::width).sum()
    }

    pub fn inf(&self) -> Option<f64> {
        self.intervals.first().map(|iv| iv.lo)
    }

    pub fn sup(&self) -> Option<f64> {
        self.intervals.last().map(|iv| iv.hi)
    }

    /// Whether every point exceeds `t`, i.e. the set lies in `(t, ∞)`.
    pub fn lies_above(&self, t: f64) -> bool {
        self.inf().is_none_or(|lo| lo > t)
    }

    /// Whether the set lies in the open interval `(lo, hi)`.
    pub fn lies_within_open(&self, lo: f64, hi: f64) -> bool {
        match (self.inf(), self.sup()) {
            (Some(a), Some(b)) => a > lo && b < hi,
            _ => true,
        }
    }

    /// Set inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &PredictionSet) -> bool {
        self.intervals.iter().all(|iv| {
            let idx = other.intervals.partition_point(|o| o.hi < iv.lo);
            other
                .intervals
                .get(idx)
                .is_some_and(|o| o.lo <= iv.lo && iv.hi <= o.hi)
        })
    }

    /// Intersection with `[lo, hi]`.
    pub fn clip(&self, lo: f64, hi: f64) -> PredictionSet {
        PredictionSet::from_intervals(self.intervals.iter().map(|iv| Interval {
            lo: iv.lo.max(lo),
            hi: iv.hi.min(hi),
        }))
    }

    fn distance_to(&self, y: f64) -> f64 {
        let idx = self.intervals.partition_point(|iv| iv.hi < y);
        let mut best = f64::INFINITY;
        if let Some(iv) = self.intervals.get(idx) {
            best = if iv.lo <= y { 0.0 } else { iv.lo - y };
        }
        if idx > 0 {
            best = best.min(y - self.intervals[idx - 1].hi);
        }
        best
    }

    /// `sup_{a ∈ self} dist(a, other)`.
    fn directed_hausdorff(&self, other: &PredictionSet) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if other.is_empty() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for iv in &self.intervals {
            if iv.lo.is_infinite() && other.inf().is_some_and(f64::is_finite) {
                return f64::INFINITY;
            }
            if iv.hi.is_infinite() && other.sup().is_some_and(f64::is_finite) {
                return f64::INFINITY;
            }
            for y in [iv.lo, iv.hi] {
                if y.is_finite() {
                    worst = worst.max(other.distance_to(y));
                }
            }
            // deepest points of `other`'s gaps that fall inside this interval
            for w in other.intervals.windows(2) {
                let mid = 0.5 * (w[0].hi + w[1].lo);
                let clamped = mid.clamp(iv.lo, iv.hi);
                if clamped > w[0].hi && clamped < w[1].lo {
                    worst = worst.max(other.distance_to(clamped));
                }
            }
        }
        worst
    }

    /// Hausdorff distance between two sets (infinite if exactly one is empty
    /// or their unbounded directions differ).
    pub fn hausdorff_distance(&self, other: &PredictionSet) -> f64 {
        if self.is_empty() && other.is_empty() {
            return 0.0;
        }
        if self.is_empty() || other.is_empty() {
            return f64::INFINITY;
        }
        self.directed_hausdorff(other)
            .max(other.directed_hausdorff(self))
    }
}
