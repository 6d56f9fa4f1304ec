//! Non-recursive Path-ORAM-style engine.
//!
//! Server layout: a complete binary tree with `2^L` leaves,
//! `L = ceil(log2 M)`, stored in heap order. Bucket `b` (0-based) occupies
//! server cells `1 + b*Z ..= (b+1)*Z`. Each slot cell holds only the block
//! payload; which logical address a slot holds is tracked client side
//! together with the position map and the stash.

use rand::Rng as _;
use rustc_hash::FxHashMap;
use std::collections::BTreeMap;

use super::Coins;
use crate::error::{Error, Result};
use crate::model::{InputOp, OpKind, OramConfig, Word};
use crate::server::Server;

/// Slots per bucket.
pub const BUCKET_SLOTS: usize = 4;

/// The run aborts once the stash holds more blocks than this.
pub const STASH_BOUND: usize = 64;

const EMPTY: u64 = 0;

#[derive(Clone, Debug)]
pub struct TreeOram {
    address_range: u64,
    depth: u32,
    coins: Coins,
    /// Logical address -> leaf in `[0, 2^L)`.
    positions: FxHashMap<u64, u64>,
    /// Logical address held by each slot, `EMPTY` for dummies.
    slot_tags: Vec<u64>,
    stash: BTreeMap<u64, Word>,
    max_stash: usize,
    pub(crate) steps: usize,
}

impl TreeOram {
    pub fn new(config: OramConfig, seed: u64) -> Result<Self> {
        let depth = ceil_log2(config.address_range);
        let buckets = (1u64 << (depth + 1)) - 1;
        let cells = buckets * BUCKET_SLOTS as u64;
        if cells > config.server_cells() {
            return Err(Error::Model(format!(
                "tree needs {cells} server cells but w = {} provides {}",
                config.w,
                config.server_cells()
            )));
        }
        Ok(Self {
            address_range: config.address_range,
            depth,
            coins: Coins::new(seed),
            positions: FxHashMap::default(),
            slot_tags: vec![EMPTY; cells as usize],
            stash: BTreeMap::new(),
            max_stash: 0,
            steps: 0,
        })
    }

    /// Tree depth `L`; a path has `L + 1` buckets.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn leaves(&self) -> u64 {
        1 << self.depth
    }

    /// Server probes per logical operation: `2 * Z * (L + 1)`.
    pub fn probes_per_op(&self) -> usize {
        2 * BUCKET_SLOTS * (self.depth as usize + 1)
    }

    pub fn stash_len(&self) -> usize {
        self.stash.len()
    }

    /// Largest stash occupancy observed after any write-back.
    pub fn max_stash(&self) -> usize {
        self.max_stash
    }

    pub(crate) fn deviation(&self) -> String {
        format!(
            "tree: position map, slot tags and stash kept client side ({} cells), exceeding m <= sqrt(n)",
            self.client_cells()
        )
    }

    /// Heap index of the level-`level` bucket on the path to `leaf`.
    fn bucket_on_path(&self, leaf: u64, level: u32) -> u64 {
        ((leaf + self.leaves()) >> (self.depth - level)) - 1
    }

    fn slot_addr(bucket: u64, slot: usize) -> u64 {
        1 + bucket * BUCKET_SLOTS as u64 + slot as u64
    }

    pub fn step<S: Server>(&mut self, server: &mut S, op: &InputOp) -> Result<Word> {
        let mut rng = self.coins.for_step(self.steps);
        let leaves = self.leaves();
        let leaf = match self.positions.get(&op.addr) {
            Some(&l) => l,
            None => rng.gen_range(0..leaves),
        };
        let fresh_leaf = rng.gen_range(0..leaves);

        for level in 0..=self.depth {
            let bucket = self.bucket_on_path(leaf, level);
            for slot in 0..BUCKET_SLOTS {
                let v = server.probe(OpKind::Read, Self::slot_addr(bucket, slot), 0)?;
                let tag = &mut self.slot_tags[bucket as usize * BUCKET_SLOTS + slot];
                if *tag != EMPTY {
                    self.stash.insert(*tag, v);
                    *tag = EMPTY;
                }
            }
        }

        let answer = match op.kind {
            OpKind::Write => {
                self.stash.insert(op.addr, op.data);
                0
            }
            OpKind::Read => self.stash.get(&op.addr).copied().unwrap_or(0),
        };
        self.positions.insert(op.addr, fresh_leaf);

        // Evict deepest-first so blocks sink as far as their leaf allows.
        let mut placed: Vec<[Option<(u64, Word)>; BUCKET_SLOTS]> =
            vec![[None; BUCKET_SLOTS]; self.depth as usize + 1];
        for level in (0..=self.depth).rev() {
            let bucket = self.bucket_on_path(leaf, level);
            let fits: Vec<u64> = self
                .stash
                .keys()
                .copied()
                .filter(|a| self.bucket_on_path(self.positions[a], level) == bucket)
                .take(BUCKET_SLOTS)
                .collect();
            for (slot, a) in fits.into_iter().enumerate() {
                let data = self.stash.remove(&a).expect("stash key");
                placed[level as usize][slot] = Some((a, data));
            }
        }
        for level in 0..=self.depth {
            let bucket = self.bucket_on_path(leaf, level);
            for (slot, entry) in placed[level as usize].iter().enumerate() {
                let (tag, data) = entry.unwrap_or((EMPTY, 0));
                server.probe(OpKind::Write, Self::slot_addr(bucket, slot), data)?;
                self.slot_tags[bucket as usize * BUCKET_SLOTS + slot] = tag;
            }
        }

        self.max_stash = self.max_stash.max(self.stash.len());
        if self.stash.len() > STASH_BOUND {
            return Err(Error::StashOverflow {
                occupancy: self.stash.len(),
                bound: STASH_BOUND,
            });
        }
        self.steps += 1;
        Ok(answer)
    }

    /// Image layout: `M` position cells (leaf + 1, or 0 if unmapped), one
    /// tag cell per slot, then `STASH_BOUND` (address, payload) pairs.
    pub(crate) fn client_cells(&self) -> usize {
        self.address_range as usize + self.slot_tags.len() + 2 * STASH_BOUND
    }

    pub(crate) fn snapshot(&self) -> Vec<Word> {
        let mut image = Vec::with_capacity(self.client_cells());
        image
            .extend((1..=self.address_range).map(|a| self.positions.get(&a).map_or(0, |&l| l + 1)));
        image.extend_from_slice(&self.slot_tags);
        let mut stash = self.stash.iter().flat_map(|(&a, &d)| [a, d]);
        image.extend((0..2 * STASH_BOUND).map(|_| stash.next().unwrap_or(0)));
        image
    }

    pub(crate) fn restore(&mut self, image: &[Word]) -> Result<()> {
        let (positions, rest) = image.split_at(self.address_range as usize);
        let (tags, stash) = rest.split_at(self.slot_tags.len());
        self.positions = positions
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0)
            .map(|(i, &p)| (i as u64 + 1, p - 1))
            .collect();
        if self.positions.values().any(|&l| l >= self.leaves()) {
            return Err(Error::Argument(
                "position map entry outside the tree".into(),
            ));
        }
        self.slot_tags.copy_from_slice(tags);
        self.stash = stash
            .chunks_exact(2)
            .filter(|c| c[0] != EMPTY)
            .map(|c| (c[0], c[1]))
            .collect();
        Ok(())
    }
}

fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}
