//! The two adversarial workload families: the alternating sequence on
//! address 1, and `k` write/read block pairs over addresses `1..=ell` with
//! uniformly random payloads.

use rand::Rng as _;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{word_mask, InputOp, InputSequence};
use crate::seed::{rng_from_seed, Rng};

/// Where each write block `W_i` and read block `R_i` sits inside a generated
/// block workload. Block indices are 1-based in the public API.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    pub k: usize,
    /// Block length `floor(n / 2k)`.
    pub ell: usize,
    pub write_ranges: Vec<Range<usize>>,
    pub read_ranges: Vec<Range<usize>>,
    /// First index of the alternating padding tail; always `2 * k * ell`.
    pub pad_start: usize,
}

impl BlockLayout {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        check_block_params(n, k)?;
        let ell = n / (2 * k);
        let write_ranges = (0..k).map(|i| 2 * i * ell..(2 * i + 1) * ell).collect();
        let read_ranges = (0..k)
            .map(|i| (2 * i + 1) * ell..(2 * i + 2) * ell)
            .collect();
        Ok(Self {
            k,
            ell,
            write_ranges,
            read_ranges,
            pad_start: 2 * k * ell,
        })
    }

    /// Index interval of `W_i`, for `i` in `1..=k`.
    pub fn write_block(&self, i: usize) -> Result<Range<usize>> {
        self.check_block(i)?;
        Ok(self.write_ranges[i - 1].clone())
    }

    /// Index interval of `R_i`, for `i` in `1..=k`.
    pub fn read_block(&self, i: usize) -> Result<Range<usize>> {
        self.check_block(i)?;
        Ok(self.read_ranges[i - 1].clone())
    }

    fn check_block(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.k {
            return Err(Error::Argument(format!(
                "block index {i} outside [1, {}]",
                self.k
            )));
        }
        Ok(())
    }
}

fn check_block_params(n: usize, k: usize) -> Result<()> {
    if !n.is_multiple_of(2) {
        return Err(Error::Workload(format!("odd length n = {n}")));
    }
    if k < 1 || k > n / 2 {
        return Err(Error::Workload(format!(
            "block count k = {k} outside [1, n/2 = {}]",
            n / 2
        )));
    }
    Ok(())
}

/// `[(W, 1, 0^w), (R, 1, 0^w)]^(n/2)`.
pub fn gen_alternating_sequence(n: usize) -> Result<InputSequence> {
    if !n.is_multiple_of(2) {
        return Err(Error::Workload(format!("odd length n = {n}")));
    }
    let mut ops = Vec::with_capacity(n);
    push_alternating(&mut ops, n);
    Ok(InputSequence::new(ops))
}

fn push_alternating(ops: &mut Vec<InputOp>, len: usize) {
    for j in 0..len {
        ops.push(if j % 2 == 0 {
            InputOp::write(1, 0)
        } else {
            InputOp::read(1)
        });
    }
}

/// Draws one instance of the block workload: `k` pairs of a write block
/// over addresses `1..=ell` with fresh uniform `w`-bit payloads followed by a
/// read block over the same addresses, padded to length `n` with
/// alternating writes and reads on address 1.
pub fn gen_write_read_blocks(
    n: usize,
    k: usize,
    w: u32,
    rng: &mut Rng,
) -> Result<(InputSequence, BlockLayout)> {
    let layout = BlockLayout::new(n, k)?;
    let mask = word_mask(w);
    let mut ops = Vec::with_capacity(n);
    for _ in 0..k {
        for a in 1..=layout.ell as u64 {
            ops.push(InputOp::write(a, rng.gen::<u64>() & mask));
        }
        for a in 1..=layout.ell as u64 {
            ops.push(InputOp::read(a));
        }
    }
    push_alternating(&mut ops, n - layout.pad_start);
    Ok((InputSequence::new(ops), layout))
}

/// Replaces the payloads of write block `W_i` with `payload`.
pub fn with_block_payload(
    y: &InputSequence,
    layout: &BlockLayout,
    i: usize,
    payload: &[u64],
) -> Result<InputSequence> {
    let range = layout.write_block(i)?;
    if payload.len() != range.len() {
        return Err(Error::Argument(format!(
            "payload has {} words, block has {}",
            payload.len(),
            range.len()
        )));
    }
    let mut out = y.clone();
    for (op, &d) in out.ops_mut()[range].iter_mut().zip(payload) {
        op.data = d;
    }
    Ok(out)
}

/// Workload selector as accepted on the command line:
/// `alt:n=<N>` or `blocks:n=<N>,k=<K>,seed=<S>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WorkloadSpec {
    Alternating { n: usize },
    Blocks { n: usize, k: usize, seed: u64 },
}

impl WorkloadSpec {
    pub fn len(&self) -> usize {
        match *self {
            WorkloadSpec::Alternating { n } | WorkloadSpec::Blocks { n, .. } => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn generate(&self, w: u32) -> Result<(InputSequence, Option<BlockLayout>)> {
        match *self {
            WorkloadSpec::Alternating { n } => Ok((gen_alternating_sequence(n)?, None)),
            WorkloadSpec::Blocks { n, k, seed } => {
                let (y, layout) = gen_write_read_blocks(n, k, w, &mut rng_from_seed(seed))?;
                Ok((y, Some(layout)))
            }
        }
    }

    /// Same family with a different data seed. Alternating workloads are unchanged.
    pub fn reseeded(&self, seed: u64) -> Self {
        match *self {
            WorkloadSpec::Blocks { n, k, .. } => WorkloadSpec::Blocks { n, k, seed },
            ref alt => alt.clone(),
        }
    }
}

impl fmt::Display for WorkloadSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkloadSpec::Alternating { n } => write!(f, "alt:n={n}"),
            WorkloadSpec::Blocks { n, k, seed } => write!(f, "blocks:n={n},k={k},seed={seed}"),
        }
    }
}

impl FromStr for WorkloadSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Workload(format!("{why} in {s:?}"));
        let (family, params) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let mut n = None;
        let mut k = None;
        let mut seed = None;
        for kv in params.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = kv.split_once('=').ok_or_else(|| bad("missing '='"))?;
            let slot = match key.trim() {
                "n" => &mut n,
                "k" => &mut k,
                "seed" => &mut seed,
                other => return Err(bad(&format!("unknown key {other:?}"))),
            };
            let parsed: u64 = value.trim().parse().map_err(|_| bad("bad integer"))?;
            if slot.replace(parsed).is_some() {
                return Err(bad(&format!("duplicate key {key:?}")));
            }
        }
        let n = n.ok_or_else(|| bad("missing n"))? as usize;
        let spec = match family.trim() {
            "alt" => {
                if k.is_some() || seed.is_some() {
                    return Err(bad("alt takes only n"));
                }
                WorkloadSpec::Alternating { n }
            }
            "blocks" => WorkloadSpec::Blocks {
                n,
                k: k.ok_or_else(|| bad("missing k"))? as usize,
                seed: seed.ok_or_else(|| bad("missing seed"))?,
            },
            other => return Err(bad(&format!("unknown family {other:?}"))),
        };
        match spec {
            WorkloadSpec::Alternating { n } if n % 2 != 0 => {
                Err(Error::Workload(format!("odd length n = {n}")))
            }
            WorkloadSpec::Blocks { n, k, .. } => check_block_params(n, k).map(|_| spec),
            _ => Ok(spec),
        }
    }
}
