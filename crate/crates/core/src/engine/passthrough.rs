use crate::error::Result;
use crate::model::{InputOp, OpKind, OramConfig, Word};
use crate::server::Server;

/// Executes every operation directly as a single probe. Leaks everything.
#[derive(Clone, Debug)]
pub struct Passthrough {
    mem: Vec<Word>,
    pub(crate) steps: usize,
}

impl Passthrough {
    pub fn new(config: OramConfig) -> Self {
        Self {
            mem: vec![0; config.m],
            steps: 0,
        }
    }

    pub fn step<S: Server>(&mut self, server: &mut S, op: &InputOp) -> Result<Word> {
        let v = server.probe(op.kind, op.addr, op.data)?;
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
