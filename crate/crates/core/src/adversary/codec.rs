//! Two-party transfer of a write block's payload through an engine's
//! client memory and the probes that read it back.
//!
//! Both parties know the engine, its seed and every operation outside
//! `W_i`. Alice also knows the payload `b` of `W_i`. She runs the engine
//! through `R_i` and sends the client memory image after `W_i` plus every
//! probe of `R_i` that reads a cell last written during `W_i`. Bob replays
//! everything before `W_i`, installs the image and runs `R_i`, whose answers
//! are `b`.

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::ops::Range;

use crate::engine::{Engine, EngineKind};
use crate::error::{Error, Result};
use crate::model::{InputSequence, OpKind, OramConfig, Word};
use crate::seed::{derive_seed, rng_from_seed, stream};
use crate::server::{Server, ServerState};
use crate::workload::{gen_write_read_blocks, with_block_payload, BlockLayout};

/// Shared knowledge of both parties.
#[derive(Clone, Debug)]
pub struct CodecContext {
    pub engine: EngineKind,
    pub config: OramConfig,
    /// Block workload whose block `i` payload is irrelevant to Bob.
    pub template: InputSequence,
    pub layout: BlockLayout,
    pub seed: u64,
}

impl CodecContext {
    pub fn new(
        engine: EngineKind,
        config: OramConfig,
        template: InputSequence,
        layout: BlockLayout,
        seed: u64,
    ) -> Result<Self> {
        template.validate(&config)?;
        if template.len() < layout.pad_start {
            return Err(Error::Argument(
                "template shorter than its block layout".into(),
            ));
        }
        Ok(Self {
            engine,
            config,
            template,
            layout,
            seed,
        })
    }

    /// Context with a fresh block workload drawn from `seed`.
    pub fn random(
        engine: EngineKind,
        config: OramConfig,
        n: usize,
        k: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = rng_from_seed(derive_seed(seed, 0, stream::WORKLOAD));
        let (template, layout) = gen_write_read_blocks(n, k, config.w, &mut rng)?;
        Self::new(engine, config, template, layout, seed)
    }

    pub fn ell(&self) -> usize {
        self.layout.ell
    }

    fn fresh_engine(&self) -> Result<Engine> {
        Engine::new(
            self.engine,
            self.config,
            self.seed,
            Some(self.template.len()),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferMessage {
    pub client_mem_snapshot: Vec<Word>,
    /// `(address, content)` of every matched read, in probe order.
    pub matched_probes: Vec<(u64, Word)>,
    pub w: u32,
    /// Hash of the payload, for detecting corrupted messages. Not counted
    /// in [`TransferMessage::bit_length`].
    pub checksum: Option<u64>,
}

impl TransferMessage {
    /// `cells * w + 2 * w * t`, with `t` matched probes.
    pub fn bit_length(&self) -> u64 {
        let w = self.w as u64;
        self.client_mem_snapshot.len() as u64 * w + 2 * w * self.matched_probes.len() as u64
    }

    pub fn with_checksum(mut self, b: &[Word]) -> Self {
        self.checksum = Some(payload_checksum(b));
        self
    }
}

pub fn payload_checksum(b: &[Word]) -> u64 {
    b.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &x| {
        (h ^ x).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Server wrapper that remembers which operation last wrote each cell and
/// captures reads of cells last written inside a window of operations.
struct LastWriter {
    inner: ServerState,
    last_write: FxHashMap<u64, usize>,
    op: usize,
    window: Range<usize>,
    capture: bool,
    matched: Vec<(u64, Word)>,
}

impl Server for LastWriter {
    fn probe(&mut self, kind: OpKind, addr: u64, data: Word) -> Result<Word> {
        let v = self.inner.probe(kind, addr, data)?;
        match kind {
            OpKind::Write => {
                self.last_write.insert(addr, self.op);
            }
            OpKind::Read => {
                if self.capture
                    && self
                        .last_write
                        .get(&addr)
                        .is_some_and(|j| self.window.contains(j))
                {
                    self.matched.push((addr, v));
                }
            }
        }
        Ok(v)
    }
}

fn check_payload(ctx: &CodecContext, i: usize, b: &[Word]) -> Result<()> {
    ctx.layout.write_block(i)?;
    if let Some(&d) = b.iter().find(|&&d| d & !ctx.config.word_mask() != 0) {
        return Err(Error::DataTooWide {
            data: d,
            w: ctx.config.w,
        });
    }
    Ok(())
}

/// Alice's message for payload `b` in block `i` (1-based).
pub fn alice_encode(ctx: &CodecContext, i: usize, b: &[Word]) -> Result<TransferMessage> {
    check_payload(ctx, i, b)?;
    let y = with_block_payload(&ctx.template, &ctx.layout, i, b)?;
    let (wr, rr) = (ctx.layout.write_block(i)?, ctx.layout.read_block(i)?);
    let mut engine = ctx.fresh_engine()?;
    let mut server = LastWriter {
        inner: ServerState::new(ctx.config.w),
        last_write: FxHashMap::default(),
        op: 0,
        window: wr.clone(),
        capture: false,
        matched: Vec::new(),
    };
    let mut snapshot = Vec::new();
    for (j, op) in y.iter().enumerate().take(rr.end) {
        if j == rr.start {
            snapshot = engine.snapshot();
            server.capture = true;
        }
        server.op = j;
        server.inner.begin_op(j);
        engine.step(&mut server, op)?;
    }
    Ok(TransferMessage {
        client_mem_snapshot: snapshot,
        matched_probes: server.matched,
        w: ctx.config.w,
        checksum: None,
    })
}

/// Bob's view of the server while replaying `R_i`: his own copy, with
/// reads of cells he has not rewritten served from Alice's list whenever
/// its next entry names the probed address.
struct Overlay {
    inner: ServerState,
    queue: VecDeque<(u64, Word)>,
    rewritten: FxHashSet<u64>,
}

impl Server for Overlay {
    fn probe(&mut self, kind: OpKind, addr: u64, data: Word) -> Result<Word> {
        let v = self.inner.probe(kind, addr, data)?;
        match kind {
            OpKind::Write => {
                self.rewritten.insert(addr);
                Ok(v)
            }
            OpKind::Read => {
                if !self.rewritten.contains(&addr)
                    && self.queue.front().is_some_and(|&(a, _)| a == addr)
                {
                    Ok(self.queue.pop_front().map(|(_, d)| d).unwrap_or(v))
                } else {
                    Ok(v)
                }
            }
        }
    }
}

/// Recovers the payload of block `i` from Alice's message.
pub fn bob_decode(ctx: &CodecContext, i: usize, msg: &TransferMessage) -> Result<Vec<Word>> {
    if msg.w != ctx.config.w {
        return Err(Error::Decode(format!(
            "message word size {} != {}",
            msg.w, ctx.config.w
        )));
    }
    let (wr, rr) = (ctx.layout.write_block(i)?, ctx.layout.read_block(i)?);
    let mut engine = ctx.fresh_engine()?;
    let mut server = ServerState::new(ctx.config.w);
    for (j, op) in ctx.template.iter().enumerate().take(wr.start) {
        server.begin_op(j);
        engine.step(&mut server, op)?;
    }
    engine.skip_steps(wr.len());
    engine
        .restore(&msg.client_mem_snapshot)
        .map_err(|e| Error::Decode(e.to_string()))?;
    let mut overlay = Overlay {
        inner: server,
        queue: msg.matched_probes.iter().copied().collect(),
        rewritten: FxHashSet::default(),
    };
    let mut b = Vec::with_capacity(rr.len());
    for j in rr {
        let op = &ctx.template.ops()[j];
        overlay.inner.begin_op(j);
        let answer = engine
            .step(&mut overlay, op)
            .map_err(|e| Error::Decode(format!("replay diverged at op {j}: {e}")))?;
        if op.kind == OpKind::Read {
            b.push(answer);
        }
    }
    if !overlay.queue.is_empty() {
        return Err(Error::Decode(format!(
            "{} matched probes left unconsumed",
            overlay.queue.len()
        )));
    }
    if let Some(sum) = msg.checksum {
        if payload_checksum(&b) != sum {
            return Err(Error::Decode("payload checksum mismatch".into()));
        }
    }
    Ok(b)
}

/// Draws a uniformly random payload for one block.
pub fn random_payload(ctx: &CodecContext, seed: u64) -> Vec<Word> {
    use rand::Rng as _;
    let mut rng = rng_from_seed(derive_seed(seed, 0, stream::PAYLOAD));
    (0..ctx.ell())
        .map(|_| rng.gen::<u64>() & ctx.config.word_mask())
        .collect()
}
