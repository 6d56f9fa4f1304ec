use crate::error::Result;
use crate::model::{InputOp, OpKind, OramConfig, Word};
use crate::server::Server;

/// Touches every cell `1..=M` on every operation: read it, then write back
/// the (possibly updated) value. The access sequence is a fixed function of
/// `(n, M)`.
#[derive(Clone, Debug)]
pub struct LinearScan {
    address_range: u64,
    mem: Vec<Word>,
    pub(crate) steps: usize,
}

impl LinearScan {
    pub fn new(config: OramConfig) -> Self {
        Self {
            address_range: config.address_range,
            mem: vec![0; config.m],
            steps: 0,
        }
    }

    pub fn step<S: Server>(&mut self, server: &mut S, op: &InputOp) -> Result<Word> {
        let mut answer = 0;
        for j in 1..=self.address_range {
            let mut v = server.probe(OpKind::Read, j, 0)?;
            if j == op.addr {
                match op.kind {
                    OpKind::Write => v = op.data,
                    OpKind::Read => answer = v,
                }
            }
            // unchanged cells are written back too
            server.probe(OpKind::Write, j, v)?;
        }
        self.steps += 1;
        Ok(answer)
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
