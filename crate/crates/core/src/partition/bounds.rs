//! Edge-count lower bounds implied by families of dense partitions.

use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;

use super::{greedy_dense_partition, Partition, Rational};
use crate::error::{Error, Result};
use crate::graph::AccessGraph;

/// A set `K` of powers of 4 together with, for each `k` in `K`, a witnessed
/// `(base_ell / k)`-dense `k`-partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionCertificate {
    pub base_ell: Rational,
    pub witnessed: BTreeMap<usize, Partition>,
}

impl PartitionCertificate {
    pub fn new(base_ell: Rational) -> Self {
        Self {
            base_ell,
            witnessed: BTreeMap::new(),
        }
    }

    /// The witnessed key set `K`.
    pub fn keys(&self) -> Vec<usize> {
        self.witnessed.keys().copied().collect()
    }

    /// Density each part of the `k`-partition must reach.
    pub fn part_threshold(&self, k: usize) -> Rational {
        self.base_ell / Rational::from_integer(k as i64)
    }

    /// Re-verifies every witness against `g`.
    pub fn verify(&self, g: &AccessGraph) -> Result<()> {
        for (&k, p) in &self.witnessed {
            if !is_power_of_four(k) {
                return Err(Error::Certificate(format!("key {k} is not a power of 4")));
            }
            if p.k() != k {
                return Err(Error::Certificate(format!(
                    "witness for k = {k} has {} parts",
                    p.k()
                )));
            }
            p.verify(g, &self.part_threshold(k))
                .map_err(|e| Error::Certificate(format!("witness for k = {k}: {e}")))?;
        }
        Ok(())
    }
}

fn is_power_of_four(k: usize) -> bool {
    k.is_power_of_two() && k.trailing_zeros().is_multiple_of(2)
}

/// `ceil((base_ell / 2) * |K|)`, after re-verifying every witness on `g`.
pub fn edge_lower_bound_from_certificate(
    cert: &PartitionCertificate,
    g: &AccessGraph,
) -> Result<u64> {
    cert.verify(g)?;
    Ok(cert.bound())
}

fn floor_log4(x: u64) -> i64 {
    debug_assert!(x >= 1);
    (63 - x.leading_zeros() as i64) / 2
}

fn ceil_log4(x: u64) -> i64 {
    let f = floor_log4(x);
    if 1u64 << (2 * f) == x {
        f
    } else {
        f + 1
    }
}

/// `(p * ell / 2) * (floor(log4 t) - ceil(log4 s))`, clamped below at 0.
pub fn expected_edge_lower_bound(ell: Rational, s: u64, t: u64, p: Rational) -> Result<Rational> {
    if s < 1 || s > t {
        return Err(Error::Argument(format!(
            "need 1 <= s <= t, got s = {s}, t = {t}"
        )));
    }
    if p < Rational::zero() || p > Rational::from_integer(1) {
        return Err(Error::Argument(format!("probability {p} outside [0, 1]")));
    }
    let powers = floor_log4(t) - ceil_log4(s);
    let bound = p * ell / Rational::from_integer(2) * Rational::from_integer(powers);
    Ok(if bound < Rational::zero() {
        Rational::zero()
    } else {
        bound
    })
}

/// Runs the greedy tester for every power of 4 `k <= k_max` at threshold
/// `ell / k` and records the successes.
pub fn certify(g: &AccessGraph, ell: Rational, k_max: usize) -> PartitionCertificate {
    let mut cert = PartitionCertificate::new(ell);
    let mut k = 1usize;
    while k <= k_max {
        if let Some(p) = greedy_dense_partition(g, k, &cert.part_threshold(k)) {
            cert.witnessed.insert(k, p);
        }
        match k.checked_mul(4) {
            Some(next) => k = next,
            None => break,
        }
    }
    cert
}

/// `floor(n / (10 (m + 2 log2 n + 11)))`, the largest block count for which
/// an `n`-op block workload is guaranteed dense partitions.
pub fn theorem_k_max(n: usize, m: usize) -> usize {
    if n < 2 {
        return 0;
    }
    let n_f = n as f64;
    let denom = 10.0 * (m as f64 + 2.0 * n_f.log2() + 11.0);
    (n_f / denom).floor().to_usize().unwrap_or(0)
}

/// Number of parts of `fine` whose crossing edges avoid every crossing edge
/// of every part of `coarse`.
pub fn parts_disjoint_from(g: &AccessGraph, fine: &Partition, coarse: &Partition) -> usize {
    let crossing = |p: &Partition| -> Vec<Vec<(usize, usize)>> {
        p.parts()
            .map(|(b, m, e)| {
                (b..m)
                    .filter_map(|u| g.succ(u).filter(|&v| v >= m && v < e).map(|v| (u, v)))
                    .collect()
            })
            .collect()
    };
    let coarse_edges: rustc_hash::FxHashSet<(usize, usize)> =
        crossing(coarse).into_iter().flatten().collect();
    crossing(fine)
        .iter()
        .filter(|part| part.iter().all(|e| !coarse_edges.contains(e)))
        .count()
}

impl PartitionCertificate {
    /// `ceil((base_ell / 2) * |K|)` without re-verification.
    pub fn bound(&self) -> u64 {
        let b = self.base_ell / Rational::from_integer(2)
            * Rational::from_integer(self.witnessed.len() as i64);
        b.ceil().to_integer().max(0) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.witnessed.is_empty()
    }
}
