use rand::Rng as _;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_access_graph, AccessGraph};
use crate::model::{InputSequence, OpKind};
use crate::partition::{greedy_dense_partition, Rational};
use crate::server::AccessSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictReason {
    /// The trace has no `(n/5k')`-dense `k'`-partition.
    NoPartition,
    /// A partition exists and the guess is a fair coin.
    CoinFlip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinguisherVerdict {
    /// 1 means "the trace came from `y`", 2 means "from `y'`".
    pub guess: u8,
    pub reason: VerdictReason,
}

fn is_pad_pair(y: &InputSequence, pos: usize) -> bool {
    let ops = y.ops();
    ops[pos].kind == OpKind::Write
        && ops[pos].addr == 1
        && ops[pos].data == 0
        && ops[pos + 1].kind == OpKind::Read
        && ops[pos + 1].addr == 1
}

fn is_block_pair(y: &InputSequence, pos: usize, ell: usize) -> bool {
    let ops = &y.ops()[pos..pos + 2 * ell];
    let (writes, reads) = ops.split_at(ell);
    writes
        .iter()
        .enumerate()
        .all(|(j, op)| op.kind == OpKind::Write && op.addr == j as u64 + 1)
        && reads
            .iter()
            .enumerate()
            .all(|(j, op)| op.kind == OpKind::Read && op.addr == j as u64 + 1 && op.data == 0)
}

/// Recovers `k'` from a sequence shaped like the block workload: `k'` pairs
/// of writes to `1..=ell` followed by reads of `1..=ell`, then alternating
/// padding on address 1, with `ell = floor(n / 2k')`.
///
/// When `ell = 1` blocks and padding look alike except for payloads, so
/// `k'` is taken as the smallest count with `floor(n / 2k') = 1` that covers
/// every pair with a non-zero payload.
pub fn extract_block_count(y_prime: &InputSequence) -> Result<usize> {
    let n = y_prime.len();
    let reject = |why: String| Err(Error::NotBlockShaped(why));
    if n < 2 || !n.is_multiple_of(2) {
        return reject(format!("length {n} is not a positive even number"));
    }
    let ops = y_prime.ops();
    let ell = ops
        .iter()
        .enumerate()
        .take_while(|(j, op)| op.kind == OpKind::Write && op.addr == *j as u64 + 1)
        .count();
    if ell == 0 || 2 * ell > n {
        return reject("no leading write block".into());
    }
    let mut pos = 0;
    let mut pairs = 0;
    while pos + 2 * ell <= n && is_block_pair(y_prime, pos, ell) {
        pos += 2 * ell;
        pairs += 1;
    }
    let mut tail = pos;
    while tail + 2 <= n && is_pad_pair(y_prime, tail) {
        tail += 2;
    }
    if tail != n {
        return reject(format!("unexpected operation at index {tail}"));
    }
    let k = if ell == 1 {
        let last_payload = (0..pairs)
            .rev()
            .find(|&p| ops[2 * p].data != 0)
            .map_or(0, |p| p + 1);
        last_payload.max(n / 4 + 1)
    } else {
        pairs
    };
    if k == 0 || k > n / 2 || n / (2 * k) != ell {
        return reject(format!("{pairs} blocks of length {ell} do not fit n = {n}"));
    }
    Ok(k)
}

/// Density threshold `n / 5k'` used by the distinguisher.
pub fn distinguisher_threshold(n: usize, k: usize) -> Rational {
    Rational::new(n as i64, 5 * k as i64)
}

/// Guesses whether `trace` came from `y` or `y_prime`: answers 1 when the
/// trace's access graph has no `(n/5k')`-dense `k'`-partition, otherwise
/// flips a fair coin. Only the address list is consulted.
pub fn distinguish<R: RngCore + ?Sized>(
    y: &InputSequence,
    y_prime: &InputSequence,
    trace: &AccessSequence,
    coin: &mut R,
) -> Result<DistinguisherVerdict> {
    let n = y.len();
    if y_prime.len() != n {
        return Err(Error::Argument(format!(
            "inputs differ in length: {n} vs {}",
            y_prime.len()
        )));
    }
    let k = extract_block_count(y_prime)?;
    distinguish_with_blocks(n, k, trace, coin)
}

/// [`distinguish`] with `n` and `k'` already computed.
pub fn distinguish_with_blocks<R: RngCore + ?Sized>(
    n: usize,
    k: usize,
    trace: &AccessSequence,
    coin: &mut R,
) -> Result<DistinguisherVerdict> {
    distinguish_graph(n, k, &build_access_graph(trace)?, coin)
}

/// [`distinguish_with_blocks`] on an already built access graph.
pub fn distinguish_graph<R: RngCore + ?Sized>(
    n: usize,
    k: usize,
    g: &AccessGraph,
    coin: &mut R,
) -> Result<DistinguisherVerdict> {
    if greedy_dense_partition(g, k, &distinguisher_threshold(n, k)).is_none() {
        return Ok(DistinguisherVerdict {
            guess: 1,
            reason: VerdictReason::NoPartition,
        });
    }
    Ok(DistinguisherVerdict {
        guess: if coin.gen_bool(0.5) { 1 } else { 2 },
        reason: VerdictReason::CoinFlip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_sequence, EngineKind};
    use crate::model::{InputOp, OramConfig};
    use crate::seed::rng_from_seed;
    use crate::workload::{gen_alternating_sequence, gen_write_read_blocks};

    fn blocks(n: usize, k: usize, seed: u64) -> InputSequence {
        gen_write_read_blocks(n, k, 32, &mut rng_from_seed(seed))
            .unwrap()
            .0
    }

    #[test]
    fn block_count_round_trips() {
        for (n, k) in [
            (8, 2),
            (10, 2),
            (40, 2),
            (200, 4),
            (64, 1),
            (12, 3),
            (30, 7),
        ] {
            assert_eq!(
                extract_block_count(&blocks(n, k, 1)).unwrap(),
                k,
                "n={n} k={k}"
            );
        }
    }

    #[test]
    fn unit_blocks_use_payloads() {
        // n = 12 gives ell = 1 for k in 4..=6
        let unit = |payloads: [u64; 6]| -> InputSequence {
            payloads
                .iter()
                .flat_map(|&d| [InputOp::write(1, d), InputOp::read(1)])
                .collect::<Vec<_>>()
                .into()
        };
        assert_eq!(extract_block_count(&unit([9, 0, 0, 7, 0, 0])).unwrap(), 4);
        assert_eq!(extract_block_count(&unit([9, 0, 0, 7, 1, 0])).unwrap(), 5);
        assert_eq!(extract_block_count(&unit([0, 0, 0, 0, 0, 3])).unwrap(), 6);
        assert_eq!(
            extract_block_count(&gen_alternating_sequence(12).unwrap()).unwrap(),
            4
        );
    }

    #[test]
    fn rejects_unshaped_inputs() {
        let mut ops = blocks(40, 2, 1).into_ops();
        ops[12] = InputOp::read(7);
        assert!(matches!(
            extract_block_count(&InputSequence::new(ops)),
            Err(Error::NotBlockShaped(_))
        ));
        assert!(extract_block_count(&InputSequence::new(vec![InputOp::read(1)])).is_err());
        let reads: InputSequence = vec![InputOp::read(1), InputOp::read(1)].into();
        assert!(extract_block_count(&reads).is_err());
    }

    fn trace_of(kind: EngineKind, y: &InputSequence, range: u64) -> AccessSequence {
        let cfg = OramConfig::new(1, range, 32).unwrap();
        run_sequence(kind, &cfg, y, 0)
            .unwrap()
            .server
            .adversary_view()
    }

    #[test]
    fn passthrough_alternating_trace_is_answered_one() {
        let y = gen_alternating_sequence(40).unwrap();
        let yp = blocks(40, 2, 5);
        let t = trace_of(EngineKind::Passthrough, &y, 40);
        let v = distinguish(&y, &yp, &t, &mut rng_from_seed(1)).unwrap();
        assert_eq!(
            v,
            DistinguisherVerdict {
                guess: 1,
                reason: VerdictReason::NoPartition
            }
        );
    }

    #[test]
    fn passthrough_block_trace_flips_coin() {
        let y = gen_alternating_sequence(40).unwrap();
        let yp = blocks(40, 2, 5);
        let t = trace_of(EngineKind::Passthrough, &yp, 40);
        let v = distinguish(&y, &yp, &t, &mut rng_from_seed(1)).unwrap();
        assert_eq!(v.reason, VerdictReason::CoinFlip);
    }

    #[test]
    fn linear_scan_trace_flips_coin() {
        let y = gen_alternating_sequence(40).unwrap();
        let yp = blocks(40, 2, 5);
        for input in [&y, &yp] {
            let t = trace_of(EngineKind::LinearScan, input, 40);
            let v = distinguish(&y, &yp, &t, &mut rng_from_seed(2)).unwrap();
            assert_eq!(v.reason, VerdictReason::CoinFlip);
        }
    }

    #[test]
    fn both_coin_outcomes_occur() {
        let y = gen_alternating_sequence(40).unwrap();
        let yp = blocks(40, 2, 5);
        let t = trace_of(EngineKind::Passthrough, &yp, 40);
        let guesses: Vec<u8> = (0..32)
            .map(|s| {
                distinguish(&y, &yp, &t, &mut rng_from_seed(s))
                    .unwrap()
                    .guess
            })
            .collect();
        assert!(guesses.contains(&1) && guesses.contains(&2));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let y = gen_alternating_sequence(38).unwrap();
        let yp = blocks(40, 2, 5);
        let t = AccessSequence::default();
        assert!(distinguish(&y, &yp, &t, &mut rng_from_seed(0)).is_err());
    }
}
