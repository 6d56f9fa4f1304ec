use rand::Rng as _;

use super::Coins;
use crate::error::{Error, Result};
use crate::model::{InputOp, OpKind, OramConfig, Word};
use crate::server::Server;

/// Constant-overhead engine whose length distribution leaks the addresses.
///
/// Draws `i` uniform in `[n]` and `r` uniform in `[M]` before the first
/// operation. Operations `j < i` get two extra reads of address 1,
/// operation `i` gets two if `r <= a_i` and one otherwise, and later
/// operations get none. `(i, r)` are derived from the seed and are kept as
/// control registers, not client cells.
#[derive(Clone, Debug)]
pub struct DummyLengthLeaker {
    n: usize,
    pivot: usize,
    threshold: u64,
    mem: Vec<Word>,
    pub(crate) steps: usize,
}

impl DummyLengthLeaker {
    pub fn new(config: OramConfig, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Ok(Self::with_choice(config, 0, 1, 1));
        }
        let mut rng = Coins::new(seed).for_setup();
        let pivot = rng.gen_range(1..=n);
        let threshold = rng.gen_range(1..=config.address_range);
        Ok(Self::with_choice(config, n, pivot, threshold))
    }

    /// Engine with fixed coins: pivot `i` (1-based) and threshold `r`.
    pub fn with_choice(config: OramConfig, n: usize, pivot: usize, threshold: u64) -> Self {
        Self {
            n,
            pivot,
            threshold,
            mem: vec![0; config.m],
            steps: 0,
        }
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn step<S: Server>(&mut self, server: &mut S, op: &InputOp) -> Result<Word> {
        if self.steps >= self.n {
            return Err(Error::Argument(format!(
                "dummy-leaker was built for {} operations",
                self.n
            )));
        }
        let j = self.steps + 1;
        let v = server.probe(op.kind, op.addr, op.data)?;
        let extra = match j.cmp(&self.pivot) {
            std::cmp::Ordering::Less => 2,
            std::cmp::Ordering::Equal if self.threshold <= op.addr => 2,
            std::cmp::Ordering::Equal => 1,
            std::cmp::Ordering::Greater => 0,
        };
        for _ in 0..extra {
            server.probe(OpKind::Read, 1, 0)?;
        }
        self.steps += 1;
        Ok(match op.kind {
            OpKind::Read => v,
            OpKind::Write => 0,
        })
    }

    pub(crate) fn client_cells(&self) -> usize {
        self.mem.len()
    }

    pub(crate) fn snapshot(&self) -> Vec<Word> {
        self.mem.clone()
    }

    pub(crate) fn restore(&mut self, image: &[Word]) -> Result<()> {
        self.mem.copy_from_slice(image);
        Ok(())
    }
}
