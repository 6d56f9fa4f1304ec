//! Statistical (total-variation) distance, exact and plug-in.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::server::AccessSequence;

/// Both forms of the distance between two finite distributions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDistance {
    /// `(1/2) * sum_s |Pr[X = s] - Pr[Y = s]|`.
    pub half_l1: BigRational,
    /// `Pr[X in S] - Pr[Y in S]` for `S = { s : Pr[X = s] > Pr[Y = s] }`.
    pub one_sided: BigRational,
}

fn merge<T: Hash + Eq + Clone>(
    table: &[(T, BigRational)],
    which: &str,
) -> Result<FxHashMap<T, BigRational>> {
    let mut out: FxHashMap<T, BigRational> = FxHashMap::default();
    let mut total = BigRational::zero();
    for (s, p) in table {
        if p.is_negative() {
            return Err(Error::Distribution(format!(
                "{which} has a negative probability"
            )));
        }
        total += p;
        *out.entry(s.clone()).or_insert_with(BigRational::zero) += p;
    }
    if !total.is_one() {
        return Err(Error::Distribution(format!(
            "{which} sums to {total}, not 1"
        )));
    }
    Ok(out)
}

/// Exact distance between two explicit `(outcome, probability)` tables.
/// Repeated outcomes are summed; each table must sum to exactly 1.
pub fn statistical_distance_exact<T: Hash + Eq + Clone>(
    x: &[(T, BigRational)],
    y: &[(T, BigRational)],
) -> Result<ExactDistance> {
    let px = merge(x, "first distribution")?;
    let py = merge(y, "second distribution")?;
    let zero = BigRational::zero();
    let mut l1 = BigRational::zero();
    let mut one_sided = BigRational::zero();
    for s in px.keys().chain(py.keys().filter(|s| !px.contains_key(*s))) {
        let diff = px.get(s).unwrap_or(&zero) - py.get(s).unwrap_or(&zero);
        if diff.is_positive() {
            one_sided += &diff;
        }
        l1 += diff.abs();
    }
    let half_l1 = l1 / BigRational::from_integer(BigInt::from(2));
    debug_assert_eq!(half_l1, one_sided);
    Ok(ExactDistance { half_l1, one_sided })
}

/// Summary of a trace used by the plug-in estimator: its length and a
/// 64-bit polynomial rolling hash of its address list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceDigest {
    pub len: usize,
    pub hash: u64,
}

impl TraceDigest {
    pub fn of(trace: &AccessSequence) -> Self {
        const BASE: u64 = 0x0000_0100_0000_01b3;
        let hash = trace
            .addrs()
            .iter()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, &a| {
                h.wrapping_mul(BASE).wrapping_add(a)
            });
        Self {
            len: trace.len(),
            hash,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistance {
    /// Plug-in distance between the two empirical digest distributions.
    pub estimate: f64,
    pub samples_x: usize,
    pub samples_y: usize,
}

/// Plug-in distance between the empirical distributions of two digest
/// multisets. Computed in integers, so identical multisets give exactly 0.
pub fn statistical_distance_empirical_digests(
    xs: &[TraceDigest],
    ys: &[TraceDigest],
) -> Result<EmpiricalDistance> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Argument("both sample sets must be non-empty".into()));
    }
    let mut counts: FxHashMap<TraceDigest, (u128, u128)> = FxHashMap::default();
    for d in xs {
        counts.entry(*d).or_default().0 += 1;
    }
    for d in ys {
        counts.entry(*d).or_default().1 += 1;
    }
    let (nx, ny) = (xs.len() as u128, ys.len() as u128);
    // sum |cx/nx - cy/ny| / 2 = sum |cx*ny - cy*nx| / (2 nx ny)
    let numer: u128 = counts
        .values()
        .map(|&(cx, cy)| (cx * ny).abs_diff(cy * nx))
        .sum();
    let estimate = BigRational::new(BigInt::from(numer), BigInt::from(2 * nx * ny))
        .to_f64()
        .unwrap_or(f64::NAN);
    Ok(EmpiricalDistance {
        estimate,
        samples_x: xs.len(),
        samples_y: ys.len(),
    })
}

/// Plug-in distance between two multisets of traces, via [`TraceDigest`].
/// Biased upwards for small samples; by data processing on the digest it
/// stays below the distance between the full trace distributions only in
/// the large-sample limit.
pub fn statistical_distance_empirical(
    xs: &[AccessSequence],
    ys: &[AccessSequence],
) -> Result<EmpiricalDistance> {
    let dx: Vec<TraceDigest> = xs.iter().map(TraceDigest::of).collect();
    let dy: Vec<TraceDigest> = ys.iter().map(TraceDigest::of).collect();
    statistical_distance_empirical_digests(&dx, &dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn unit_identities() {
        let u = vec![("a", q(1, 2)), ("b", q(1, 2))];
        assert!(statistical_distance_exact(&u, &u)
            .unwrap()
            .half_l1
            .is_zero());
        let disjoint = vec![("c", q(1, 1))];
        assert!(statistical_distance_exact(&u, &disjoint)
            .unwrap()
            .half_l1
            .is_one());
        let point = vec![("a", q(1, 1))];
        let d = statistical_distance_exact(&u, &point).unwrap();
        assert_eq!(d.half_l1, q(1, 2));
        assert_eq!(d.one_sided, q(1, 2));
    }

    #[test]
    fn repeated_outcomes_are_merged() {
        let x = vec![("a", q(1, 4)), ("a", q(1, 4)), ("b", q(1, 2))];
        let y = vec![("a", q(1, 2)), ("b", q(1, 2))];
        assert!(statistical_distance_exact(&x, &y)
            .unwrap()
            .half_l1
            .is_zero());
    }

    #[test]
    fn rejects_unnormalised_tables() {
        let x = vec![("a", q(1, 3))];
        let y = vec![("a", q(1, 1))];
        assert!(matches!(
            statistical_distance_exact(&x, &y),
            Err(Error::Distribution(_))
        ));
        let neg = vec![("a", q(3, 2)), ("b", q(-1, 2))];
        assert!(statistical_distance_exact(&neg, &y).is_err());
    }

    #[test]
    fn empirical_identities() {
        let t1 = AccessSequence::new(vec![1, 2, 3]);
        let t2 = AccessSequence::new(vec![1, 2, 4]);
        let same =
            statistical_distance_empirical(&[t1.clone(), t2.clone()], &[t2.clone(), t1.clone()])
                .unwrap();
        assert_eq!(same.estimate, 0.0);
        let apart =
            statistical_distance_empirical(std::slice::from_ref(&t1), &[t2.clone(), t2.clone()])
                .unwrap();
        assert_eq!(apart.estimate, 1.0);
        let half = statistical_distance_empirical(&[t1.clone(), t2.clone()], &[t1]).unwrap();
        assert_eq!(half.estimate, 0.5);
        assert!(statistical_distance_empirical(&[], &[t2]).is_err());
    }

    #[test]
    fn digest_separates_length_and_content() {
        let a = TraceDigest::of(&AccessSequence::new(vec![1, 2]));
        let b = TraceDigest::of(&AccessSequence::new(vec![2, 1]));
        let c = TraceDigest::of(&AccessSequence::new(vec![1, 2, 0]));
        assert_ne!(a, b);
        assert_ne!(a.len, c.len);
    }

    fn table(weights: &[u32]) -> Vec<(usize, BigRational)> {
        let total: u32 = weights.iter().sum();
        weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (i, q(w as i64, total as i64)))
            .collect()
    }

    proptest! {
        #[test]
        fn data_processing_bound(
            wx in prop::collection::vec(0u32..10, 4),
            wy in prop::collection::vec(0u32..10, 4),
            mask in 0u8..16,
        ) {
            prop_assume!(wx.iter().sum::<u32>() > 0 && wy.iter().sum::<u32>() > 0);
            let (x, y) = (table(&wx), table(&wy));
            let sd = statistical_distance_exact(&x, &y).unwrap();
            prop_assert_eq!(&sd.half_l1, &sd.one_sided);
            let in_set = |s: usize| mask & (1 << s) != 0;
            let px: BigRational = x.iter().filter(|(s, _)| in_set(*s)).map(|(_, p)| p.clone()).sum();
            let py: BigRational = y.iter().filter(|(s, _)| in_set(*s)).map(|(_, p)| p.clone()).sum();
            prop_assert!((px - py).abs() <= sd.half_l1);
        }
    }
}
