//! Sets of base-space coordinate indices.
//!
//! Stored as sorted, disjoint, maximal closed intervals of big integers.
//! The canonical projection classes carry either an empty set or the full
//! range `1..=s(n)`, so they stay one interval deep even when `s(n)` has
//! hundreds of digits.

use num_bigint::BigInt;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoordSet {
    // closed intervals (lo, hi) with lo <= hi, sorted, pairwise non-adjacent
    runs: Vec<(BigInt, BigInt)>,
}

impl CoordSet {
    pub fn empty() -> Self {
        CoordSet { runs: Vec::new() }
    }

    /// The closed range lo..=hi; empty when lo > hi.
    pub fn range(lo: BigInt, hi: BigInt) -> Self {
        if lo > hi {
            CoordSet::empty()
        } else {
            CoordSet { runs: vec![(lo, hi)] }
        }
    }

    pub fn from_indices<I: IntoIterator<Item = BigInt>>(indices: I) -> Self {
        let runs = indices.into_iter().map(|i| (i.clone(), i)).collect();
        CoordSet { runs: normalize(runs) }
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Cardinality.
    pub fn len(&self) -> BigInt {
        let mut total = BigInt::zero();
        for (lo, hi) in &self.runs {
            total += hi - lo + 1;
        }
        total
    }

    pub fn min(&self) -> Option<&BigInt> {
        self.runs.first().map(|(lo, _)| lo)
    }

    pub fn max(&self) -> Option<&BigInt> {
        self.runs.last().map(|(_, hi)| hi)
    }

    pub fn contains(&self, idx: &BigInt) -> bool {
        self.runs
            .binary_search_by(|(lo, hi)| {
                if idx < lo {
                    std::cmp::Ordering::Greater
                } else if idx > hi {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    /// Every index translated by `offset`.
    pub fn shift(&self, offset: &BigInt) -> Self {
        CoordSet {
            runs: self
                .runs
                .iter()
                .map(|(lo, hi)| (lo + offset, hi + offset))
                .collect(),
        }
    }

    pub fn intersects(&self, other: &Self) -> bool {
        let (a, b) = (&self.runs, &other.runs);
        let (mut i, mut j) = (0usize, 0usize);
        while i < a.len() && j < b.len() {
            if a[i].1 < b[j].0 {
                i += 1;
            } else if b[j].1 < a[i].0 {
                j += 1;
            } else {
                return true;
            }
        }
        false
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut runs = self.runs.clone();
        runs.extend(other.runs.iter().cloned());
        CoordSet { runs: normalize(runs) }
    }

    /// |self ∩ other|.
    pub fn intersection_len(&self, other: &Self) -> BigInt {
        let (a, b) = (&self.runs, &other.runs);
        let (mut i, mut j) = (0usize, 0usize);
        let mut total = BigInt::zero();
        while i < a.len() && j < b.len() {
            let lo = (&a[i].0).max(&b[j].0);
            let hi = (&a[i].1).min(&b[j].1);
            if lo <= hi {
                total += hi - lo + 1;
            }
            if a[i].1 <= b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        total
    }

    /// |self \ other|.
    pub fn difference_len(&self, other: &Self) -> BigInt {
        self.len() - self.intersection_len(other)
    }

    pub fn runs(&self) -> &[(BigInt, BigInt)] {
        &self.runs
    }

    /// Materializes the indices, refusing sets too large to expand.
    pub fn indices(&self, cap: usize) -> Option<Vec<BigInt>> {
        let len = self.len();
        if len > BigInt::from(cap) {
            return None;
        }
        let mut out = Vec::new();
        for (lo, hi) in &self.runs {
            let mut cur = lo.clone();
            while cur <= *hi {
                out.push(cur.clone());
                cur += BigInt::one();
            }
        }
        Some(out)
    }
}

fn normalize(mut runs: Vec<(BigInt, BigInt)>) -> Vec<(BigInt, BigInt)> {
    runs.retain(|(lo, hi)| lo <= hi);
    runs.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut out: Vec<(BigInt, BigInt)> = Vec::with_capacity(runs.len());
    for (lo, hi) in runs {
        if let Some(last) = out.last_mut() {
            if lo <= &last.1 + 1 {
                if hi > last.1 {
                    last.1 = hi;
                }
                continue;
            }
        }
        out.push((lo, hi));
    }
    out
}
