use rand::Rng as _;

use super::Coins;
use crate::error::{Error, Result};
use crate::model::{InputOp, OpKind, OramConfig, Word};
use crate::seed::Rng;
use crate::server::Server;

/// Outcome so far of comparing the random sequence `r` against `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LexState {
    Equal = 0,
    RandomSmaller = 1,
    RandomLarger = 2,
}

impl LexState {
    fn from_word(w: Word) -> Result<Self> {
        match w {
            0 => Ok(LexState::Equal),
            1 => Ok(LexState::RandomSmaller),
            2 => Ok(LexState::RandomLarger),
            _ => Err(Error::Argument(format!("invalid comparison state {w}"))),
        }
    }
}

/// Constant-overhead engine whose length distribution encodes the input.
///
/// Every operation is executed directly and followed by a read of address 1.
/// In parallel the engine streams a uniformly random sequence `r` over
/// `({W,R} x [M] x {0,1}^w)^n` and compares it to `y` op by op; after the
/// last operation it issues one extra read of address 1 iff `r < y`
/// strictly. The comparison state lives in client cell 0.
#[derive(Clone, Debug)]
pub struct DummyLengthEncoder {
    config: OramConfig,
    coins: Coins,
    mem: Vec<Word>,
    pub(crate) steps: usize,
}

impl DummyLengthEncoder {
    pub fn new(config: OramConfig, seed: u64) -> Self {
        Self {
            config,
            coins: Coins::new(seed),
            mem: vec![0; config.m],
            steps: 0,
        }
    }

    /// One uniform element of the per-position sample space.
    pub fn draw_op(config: &OramConfig, rng: &mut Rng) -> InputOp {
        let kind = if rng.gen::<bool>() {
            OpKind::Read
        } else {
            OpKind::Write
        };
        InputOp {
            kind,
            addr: rng.gen_range(1..=config.address_range),
            data: rng.gen::<u64>() & config.word_mask(),
        }
    }

    pub fn lex_state(&self) -> LexState {
        LexState::from_word(self.mem[0]).unwrap_or(LexState::Equal)
    }

    pub fn step<S: Server>(&mut self, server: &mut S, op: &InputOp) -> Result<Word> {
        let r = Self::draw_op(&self.config, &mut self.coins.for_step(self.steps));
        self.step_with_draw(server, op, &r)
    }

    /// Step with an explicitly supplied element `r_j` of the random sequence.
    pub fn step_with_draw<S: Server>(
        &mut self,
        server: &mut S,
        op: &InputOp,
        r: &InputOp,
    ) -> Result<Word> {
        let v = server.probe(op.kind, op.addr, op.data)?;
        server.probe(OpKind::Read, 1, 0)?;
        if self.lex_state() == LexState::Equal {
            self.mem[0] = match r.cmp(op) {
                std::cmp::Ordering::Less => LexState::RandomSmaller,
                std::cmp::Ordering::Greater => LexState::RandomLarger,
                std::cmp::Ordering::Equal => LexState::Equal,
            } as Word;
        }
        self.steps += 1;
        Ok(match op.kind {
            OpKind::Read => v,
            OpKind::Write => 0,
        })
    }

    pub fn finish<S: Server>(&mut self, server: &mut S) -> Result<()> {
        if self.lex_state() == LexState::RandomSmaller {
            server.probe(OpKind::Read, 1, 0)?;
        }
        Ok(())
    }

    pub(crate) fn client_cells(&self) -> usize {
        self.mem.len()
    }

    pub(crate) fn snapshot(&self) -> Vec<Word> {
        self.mem.clone()
    }

    pub(crate) fn restore(&mut self, image: &[Word]) -> Result<()> {
        LexState::from_word(image[0])?;
        self.mem.copy_from_slice(image);
        Ok(())
    }
}
