//! Finite unions of arcs of the circle `[0,1)`.

use crate::error::{Error, Result};
use crate::numeric::wrap01;
use serde::Serialize;

/// Sorted, pairwise disjoint intervals `[start, end]` with `0 ≤ start < end ≤ 1`.
/// An interval ending at 1 and one starting at 0 together form a single arc
/// through the origin.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SimpleSet {
    intervals: Vec<(f64, f64)>,
}

/// A connected component: the arc `[start, start + len]` taken mod 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Arc {
    pub start: f64,
    pub len: f64,
}

impl Arc {
    pub fn end(&self) -> f64 {
        self.start + self.len
    }

    pub fn contains(&self, t: f64) -> bool {
        let d = wrap01(t - self.start);
        d <= self.len || self.len >= 1.0
    }

    /// Position `start + x·len` reduced mod 1.
    pub fn point(&self, x: f64) -> f64 {
        wrap01(self.start + x * self.len)
    }
}

impl SimpleSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        SimpleSet { intervals: vec![(0.0, 1.0)] }
    }

    /// Normalizes arbitrary intervals inside `[0,1]`: sorts, merges overlaps and
    /// drops empty pieces.
    pub fn new(mut raw: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &raw {
            if !(a.is_finite() && b.is_finite() && 0.0 <= a && a <= b && b <= 1.0) {
                return Err(Error::Precondition(format!("bad interval [{a}, {b}]")));
            }
        }
        raw.retain(|(a, b)| b > a);
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match intervals.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => intervals.push((a, b)),
            }
        }
        Ok(SimpleSet { intervals })
    }

    /// The arc `[start, start + len]` mod 1 (`len ≥ 1` gives the full circle).
    pub fn arc(start: f64, len: f64) -> Self {
        if len >= 1.0 {
            return Self::full();
        }
        if len <= 0.0 {
            return Self::empty();
        }
        let a = wrap01(start);
        let b = a + len;
        let pieces = if b <= 1.0 { vec![(a, b)] } else { vec![(0.0, b - 1.0), (a, 1.0)] };
        Self::new(pieces).expect("arc pieces are valid")
    }

    pub fn from_arcs(arcs: &[Arc]) -> Self {
        let mut pieces = Vec::new();
        for a in arcs {
            pieces.extend(Self::arc(a.start, a.len).intervals);
        }
        Self::new(pieces).expect("arc pieces are valid")
    }

    /// Set of grid cells `[k/K, (k+1)/K]` whose flag is set.
    pub fn from_grid_mask(mask: &[bool]) -> Self {
        let k = mask.len() as f64;
        let mut pieces = Vec::new();
        let mut i = 0;
        while i < mask.len() {
            if mask[i] {
                let start = i;
                while i < mask.len() && mask[i] {
                    i += 1;
                }
                pieces.push((start as f64 / k, i as f64 / k));
            } else {
                i += 1;
            }
        }
        Self::new(pieces).expect("grid cells are valid")
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        let t = wrap01(t);
        let idx = self.intervals.partition_point(|&(a, _)| a <= t);
        let hit = |i: usize| self.intervals.get(i).is_some_and(|&(a, b)| a <= t && t <= b);
        (idx > 0 && hit(idx - 1)) || (t == 0.0 && self.intervals.last().is_some_and(|iv| iv.1 == 1.0))
    }

    /// Connected components as arcs, merging the piece through the origin.
    pub fn arcs(&self) -> Vec<Arc> {
        let mut arcs: Vec<Arc> =
            self.intervals.iter().map(|&(a, b)| Arc { start: a, len: b - a }).collect();
        if arcs.len() >= 2 {
            let first = arcs[0];
            let last = arcs[arcs.len() - 1];
            if first.start == 0.0 && last.end() == 1.0 {
                arcs.pop();
                arcs[0] = Arc { start: last.start, len: last.len + first.len };
            }
        }
        arcs
    }

    pub fn component_count(&self) -> usize {
        self.arcs().len()
    }

    pub fn union(&self, other: &SimpleSet) -> SimpleSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        SimpleSet::new(all).expect("inputs are valid")
    }

    pub fn intersect(&self, other: &SimpleSet) -> SimpleSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a0, a1) = self.intervals[i];
            let (b0, b1) = other.intervals[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        SimpleSet { intervals: out }
    }

    pub fn complement(&self) -> SimpleSet {
        let mut out = Vec::new();
        let mut cursor = 0.0;
        for &(a, b) in &self.intervals {
            if a > cursor {
                out.push((cursor, a));
            }
            cursor = b;
        }
        if cursor < 1.0 {
            out.push((cursor, 1.0));
        }
        SimpleSet { intervals: out }
    }

    /// Grid mask: `mask[k]` is true iff `k/K` lies in the set.
    pub fn grid_mask(&self, k: usize) -> Vec<bool> {
        let mut mask = vec![false; k];
        for &(a, b) in &self.intervals {
            let lo = (a * k as f64).ceil() as usize;
            let hi = ((b * k as f64).floor() as usize).min(k - 1);
            for m in mask.iter_mut().take(hi + 1).skip(lo) {
                *m = true;
            }
            if b == 1.0 {
                mask[0] = true;
            }
        }
        mask
    }
}
