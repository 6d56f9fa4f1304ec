//! Dense `k`-partitions of ordered graphs.
//!
//! A `k`-partition is a boundary sequence
//! `0 = b_0 <= m_0 <= b_1 <= m_1 <= ... <= b_k = N`; it is `ell`-dense if every
//! part `i` has `|E(b_i, m_i, b_{i+1})| >= ell`. Thresholds are exact
//! rationals.

mod bounds;
mod brute;

pub use bounds::{
    certify, edge_lower_bound_from_certificate, expected_edge_lower_bound, parts_disjoint_from,
    theorem_k_max, PartitionCertificate,
};
pub use brute::{brute_force_dense_partition, BRUTE_FORCE_LIMIT};

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::AccessGraph;

/// Exact rational used for density thresholds and edge bounds.
pub type Rational = Ratio<i64>;

/// Smallest integer edge count meeting `count >= ell`.
pub(crate) fn required_edges(ell: &Rational) -> usize {
    if *ell <= Rational::zero() {
        0
    } else {
        ell.ceil().to_integer().to_usize().unwrap_or(usize::MAX)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    /// `b_0, m_0, b_1, m_1, ..., b_{k-1}, m_{k-1}, b_k`.
    boundaries: Vec<usize>,
}

impl Partition {
    pub fn new(boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.len() < 3 || boundaries.len().is_multiple_of(2) {
            return Err(Error::Boundaries(format!(
                "expected 2k+1 boundaries with k >= 1, got {}",
                boundaries.len()
            )));
        }
        if boundaries[0] != 0 {
            return Err(Error::Boundaries("b_0 must be 0".into()));
        }
        if boundaries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Boundaries(format!("not monotone: {boundaries:?}")));
        }
        Ok(Self { boundaries })
    }

    pub fn k(&self) -> usize {
        self.boundaries.len() / 2
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Total vertex count `b_k`.
    pub fn end(&self) -> usize {
        *self.boundaries.last().expect("non-empty")
    }

    /// `(b_i, m_i, b_{i+1})` for `i` in `0..k`.
    pub fn part(&self, i: usize) -> (usize, usize, usize) {
        (
            self.boundaries[2 * i],
            self.boundaries[2 * i + 1],
            self.boundaries[2 * i + 2],
        )
    }

    pub fn parts(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.k()).map(|i| self.part(i))
    }

    /// Re-checks every part's crossing count against `ell`.
    pub fn verify(&self, g: &AccessGraph, ell: &Rational) -> Result<()> {
        if self.end() != g.len() {
            return Err(Error::Boundaries(format!(
                "b_k = {} but the graph has {} vertices",
                self.end(),
                g.len()
            )));
        }
        let need = required_edges(ell);
        for (i, (b, m, e)) in self.parts().enumerate() {
            let c = g.crossing_edge_count(b, m, e)?;
            if c < need {
                return Err(Error::Boundaries(format!(
                    "part {i} = ({b}, {m}, {e}) has {c} crossing edges, needs {ell}"
                )));
            }
        }
        Ok(())
    }
}

/// The `t` smallest elements of a set of distinct vertex ids under inserts
/// and removals of the current minimum. Removed minima are left in `low` as
/// stale entries; they are all below every live element, so they never
/// surface at the top of the max-heap while a live element remains.
struct SmallestT {
    t: usize,
    low: BinaryHeap<u32>,
    low_live: usize,
    high: BinaryHeap<Reverse<u32>>,
}

impl SmallestT {
    fn new(t: usize) -> Self {
        Self {
            t,
            low: BinaryHeap::new(),
            low_live: 0,
            high: BinaryHeap::new(),
        }
    }

    fn insert(&mut self, x: u32) {
        self.low.push(x);
        self.low_live += 1;
        if self.low_live > self.t {
            let top = self.low.pop().expect("non-empty");
            self.high.push(Reverse(top));
            self.low_live -= 1;
        }
    }

    fn remove_min(&mut self) {
        debug_assert!(self.low_live > 0);
        self.low_live -= 1;
        if let Some(Reverse(x)) = self.high.pop() {
            self.low.push(x);
            self.low_live += 1;
        }
        if self.low_live == 0 {
            self.low.clear();
        }
    }

    /// The `t`-th smallest live element.
    fn kth(&self) -> Option<u32> {
        (self.low_live == self.t).then(|| *self.low.peek().expect("non-empty"))
    }
}

/// Smallest `b'` such that some `m` in `[b, b']` has `|E(b, m, b')| >= t`.
///
/// For a fixed split `m`, the edges leaving `[b, m)` and landing at or after
/// `m` are `S_m = { succ(u) : b <= u < m, succ(u) >= m }`, and the part closes
/// as soon as it swallows the `t`-th smallest of them. Moving `m` to `m + 1`
/// adds `succ(m)` and drops `m` itself, which is always the minimum of `S_m`.
fn earliest_close(g: &AccessGraph, b: usize, t: usize) -> Option<usize> {
    if t == 0 {
        return Some(b);
    }
    let n = g.len();
    let mut set = SmallestT::new(t);
    let mut best: Option<usize> = None;
    let mut m = b;
    while m < n && best.is_none_or(|c| m + 1 < c) {
        if let Some(p) = g.pred(m) {
            if p >= b {
                set.remove_min();
            }
        }
        if let Some(s) = g.succ(m) {
            set.insert(s as u32);
        }
        m += 1;
        if let Some(v) = set.kth() {
            let close = v as usize + 1;
            best = Some(best.map_or(close, |c| c.min(close)));
        }
    }
    best
}

/// Smallest `m` in `[b, e]` maximising `|E(b, m, e)|`, with that count.
fn best_split(g: &AccessGraph, b: usize, e: usize) -> (usize, usize) {
    let mut count = 0usize;
    let (mut best_m, mut best_c) = (b, 0usize);
    for m in b..e {
        // moving the split past m: edges out of m start crossing, the edge into m stops
        if let Some(s) = g.succ(m) {
            if s < e {
                count += 1;
            }
        }
        if let Some(p) = g.pred(m) {
            if p >= b {
                count -= 1;
            }
        }
        if count > best_c {
            best_c = count;
            best_m = m + 1;
        }
    }
    (best_m, best_c)
}

/// Left-to-right greedy test for an `ell`-dense `k`-partition.
///
/// Each part is closed at the smallest feasible right boundary, which leaves
/// the longest suffix for the remaining parts; the last part is stretched to
/// `N`. The recorded split of each part is its smallest maximiser. Runs in
/// `O(N log N)` per query.
pub fn greedy_dense_partition(g: &AccessGraph, k: usize, ell: &Rational) -> Option<Partition> {
    if k == 0 {
        return None;
    }
    let t = required_edges(ell);
    let n = g.len();
    let mut boundaries = Vec::with_capacity(2 * k + 1);
    let mut b = 0;
    boundaries.push(0);
    for i in 0..k {
        let close = earliest_close(g, b, t)?;
        let end = if i + 1 == k { n } else { close };
        let (m, _) = best_split(g, b, end);
        boundaries.push(m);
        boundaries.push(end);
        b = end;
    }
    Some(Partition { boundaries })
}
