//! ORAM engines: client-side state machines with `m` cells of internal
//! memory that turn each logical operation into a sequence of server probes.
//!
//! All engines are online: the probes for `y_j` depend only on
//! `y_1, ..., y_j` and on internal randomness. Randomness for step `j` is
//! drawn from a generator seeded by `(seed, j)`, so the coins of any step are
//! reproducible from the shared seed alone.

mod dummy_encoder;
mod dummy_leaker;
mod linear_scan;
mod passthrough;
mod tree;

pub use dummy_encoder::{DummyLengthEncoder, LexState};
pub use dummy_leaker::DummyLengthLeaker;
pub use linear_scan::LinearScan;
pub use passthrough::Passthrough;
pub use tree::{TreeOram, BUCKET_SLOTS, STASH_BOUND};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{InputOp, InputSequence, OramConfig, Word};
use crate::seed::{derive_seed, rng_from_seed, stream, Rng};
use crate::server::{Recording, Server, ServerState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Passthrough,
    LinearScan,
    TreeOram,
    DummyLengthEncoder,
    DummyLengthLeaker,
}

impl EngineKind {
    pub const ALL: [EngineKind; 5] = [
        EngineKind::Passthrough,
        EngineKind::LinearScan,
        EngineKind::TreeOram,
        EngineKind::DummyLengthEncoder,
        EngineKind::DummyLengthLeaker,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EngineKind::Passthrough => "passthrough",
            EngineKind::LinearScan => "linear-scan",
            EngineKind::TreeOram => "tree",
            EngineKind::DummyLengthEncoder => "dummy-encoder",
            EngineKind::DummyLengthLeaker => "dummy-leaker",
        }
    }

    /// Engines whose probe pattern depends on internal coins.
    pub fn is_randomized(&self) -> bool {
        matches!(
            self,
            EngineKind::TreeOram | EngineKind::DummyLengthEncoder | EngineKind::DummyLengthLeaker
        )
    }

    /// Engines that must know the input length before the first operation.
    pub fn requires_length(&self) -> bool {
        matches!(self, EngineKind::DummyLengthLeaker)
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EngineKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::Argument(format!(
                    "unknown engine {s:?} (expected passthrough | linear-scan | tree | dummy-encoder | dummy-leaker)"
                ))
            })
    }
}

/// Per-step random source derived from the engine seed.
#[derive(Clone, Debug)]
pub(crate) struct Coins {
    seed: u64,
}

impl Coins {
    pub(crate) fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub(crate) fn for_step(&self, step: usize) -> Rng {
        rng_from_seed(derive_seed(self.seed, step as u64, stream::ENGINE))
    }

    /// Coins drawn once before the first operation.
    pub(crate) fn for_setup(&self) -> Rng {
        rng_from_seed(derive_seed(self.seed, u64::MAX, stream::ENGINE))
    }
}

/// A running engine of any kind.
#[derive(Clone, Debug)]
pub enum Engine {
    Passthrough(Passthrough),
    LinearScan(LinearScan),
    TreeOram(TreeOram),
    DummyLengthEncoder(DummyLengthEncoder),
    DummyLengthLeaker(DummyLengthLeaker),
}

macro_rules! dispatch {
    ($self:expr, $e:ident => $body:expr) => {
        match $self {
            Engine::Passthrough($e) => $body,
            Engine::LinearScan($e) => $body,
            Engine::TreeOram($e) => $body,
            Engine::DummyLengthEncoder($e) => $body,
            Engine::DummyLengthLeaker($e) => $body,
        }
    };
}

impl Engine {
    /// Fresh engine. `n` is required by fixed-length engines and ignored otherwise.
    pub fn new(kind: EngineKind, config: OramConfig, seed: u64, n: Option<usize>) -> Result<Self> {
        Ok(match kind {
            EngineKind::Passthrough => Engine::Passthrough(Passthrough::new(config)),
            EngineKind::LinearScan => Engine::LinearScan(LinearScan::new(config)),
            EngineKind::TreeOram => Engine::TreeOram(TreeOram::new(config, seed)?),
            EngineKind::DummyLengthEncoder => {
                Engine::DummyLengthEncoder(DummyLengthEncoder::new(config, seed))
            }
            EngineKind::DummyLengthLeaker => {
                let n = n.ok_or_else(|| {
                    Error::Argument("dummy-leaker needs the input length up front".into())
                })?;
                Engine::DummyLengthLeaker(DummyLengthLeaker::new(config, n, seed)?)
            }
        })
    }

    pub fn kind(&self) -> EngineKind {
        match self {
            Engine::Passthrough(_) => EngineKind::Passthrough,
            Engine::LinearScan(_) => EngineKind::LinearScan,
            Engine::TreeOram(_) => EngineKind::TreeOram,
            Engine::DummyLengthEncoder(_) => EngineKind::DummyLengthEncoder,
            Engine::DummyLengthLeaker(_) => EngineKind::DummyLengthLeaker,
        }
    }

    /// Processes one logical operation and returns its answer: the stored
    /// value for reads, `0^w` for writes.
    pub fn step<S: Server>(&mut self, server: &mut S, op: &InputOp) -> Result<Word> {
        dispatch!(self, e => e.step(server, op))
    }

    /// Probes issued after the last operation, if the engine has any.
    pub fn finish<S: Server>(&mut self, server: &mut S) -> Result<()> {
        match self {
            Engine::DummyLengthEncoder(e) => e.finish(server),
            _ => Ok(()),
        }
    }

    /// Operations processed so far.
    pub fn steps(&self) -> usize {
        dispatch!(self, e => e.steps)
    }

    /// Advances the operation counter without probing. Used when replaying
    /// from a transferred client-memory snapshot.
    pub fn skip_steps(&mut self, count: usize) {
        dispatch!(self, e => e.steps += count)
    }

    /// Number of `w`-bit cells in the client memory image.
    pub fn client_cells(&self) -> usize {
        dispatch!(self, e => e.client_cells())
    }

    /// Image of the client memory. Control registers that are a function of
    /// the shared seed and the operation counter are not included.
    pub fn snapshot(&self) -> Vec<Word> {
        dispatch!(self, e => e.snapshot())
    }

    pub fn restore(&mut self, image: &[Word]) -> Result<()> {
        if image.len() != self.client_cells() {
            return Err(Error::Argument(format!(
                "client image has {} cells, engine expects {}",
                image.len(),
                self.client_cells()
            )));
        }
        dispatch!(self, e => e.restore(image))
    }

    /// Ways in which this engine departs from the model's memory bound.
    pub fn deviations(&self) -> Vec<String> {
        match self {
            Engine::TreeOram(t) => vec![t.deviation()],
            _ => Vec::new(),
        }
    }
}

/// Result of driving one engine over one input sequence.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    /// Answer per input operation; writes answer `0^w`.
    pub answers: Vec<Word>,
    pub server: ServerState,
    pub engine: Engine,
}

impl RunOutcome {
    /// Answers of the read operations of `y`, in order.
    pub fn read_answers(&self, y: &InputSequence) -> Vec<Word> {
        y.iter()
            .zip(&self.answers)
            .filter(|(op, _)| op.kind == crate::model::OpKind::Read)
            .map(|(_, &a)| a)
            .collect()
    }
}

/// Runs a fresh engine and server over `y` with a full probe log.
pub fn run_sequence(
    kind: EngineKind,
    config: &OramConfig,
    y: &InputSequence,
    seed: u64,
) -> Result<RunOutcome> {
    run_sequence_with(kind, config, y, seed, Recording::Full)
}

pub fn run_sequence_with(
    kind: EngineKind,
    config: &OramConfig,
    y: &InputSequence,
    seed: u64,
    recording: Recording,
) -> Result<RunOutcome> {
    y.validate(config)?;
    let mut engine = Engine::new(kind, *config, seed, Some(y.len()))?;
    let mut server = ServerState::with_recording(config.w, recording);
    let mut answers = Vec::with_capacity(y.len());
    for (j, op) in y.iter().enumerate() {
        server.begin_op(j);
        answers.push(engine.step(&mut server, op)?);
    }
    engine.finish(&mut server)?;
    Ok(RunOutcome {
        answers,
        server,
        engine,
    })
}
