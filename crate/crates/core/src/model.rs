//! Model parameters and the operations fed to an ORAM.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A `w`-bit cell value. Only the low `w` bits are ever set.
pub type Word = u64;

/// Largest supported cell width. Server addresses live in `[1, 2^w]`, which
/// must fit in a `u64`.
pub const MAX_WORD_BITS: u32 = 63;

/// Parameters of an online ORAM: `m` cells of client memory, logical
/// address range `M` and cell width `w`. Correctness is perfect (`p_fail = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OramConfig {
    /// Cells of client-side internal memory.
    pub m: usize,
    /// Logical address range; addresses are `1..=address_range`.
    pub address_range: u64,
    /// Cell width in bits.
    pub w: u32,
}

impl OramConfig {
    pub fn new(m: usize, address_range: u64, w: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::Model("client memory m must be at least 1".into()));
        }
        if !(1..=MAX_WORD_BITS).contains(&w) {
            return Err(Error::Model(format!(
                "cell width w must lie in [1, {MAX_WORD_BITS}], got {w}"
            )));
        }
        let cfg = Self {
            m,
            address_range,
            w,
        };
        if address_range < 1 || address_range > cfg.server_cells() {
            return Err(Error::Model(format!(
                "address range M must lie in [1, 2^w = {}], got {address_range}",
                cfg.server_cells()
            )));
        }
        Ok(cfg)
    }

    /// Always zero: every engine answers every read correctly.
    pub const fn p_fail(&self) -> f64 {
        0.0
    }

    /// Number of server cells, `2^w`.
    pub fn server_cells(&self) -> u64 {
        1u64 << self.w
    }

    pub fn word_mask(&self) -> Word {
        word_mask(self.w)
    }

    /// Checks the workload-dependent constraints `m <= sqrt(n)` and `n <= M`.
    pub fn bind(&self, n: usize) -> Result<()> {
        if (self.m as u128) * (self.m as u128) > n as u128 {
            return Err(Error::Model(format!(
                "client memory m = {} exceeds sqrt(n) for n = {n}",
                self.m
            )));
        }
        if n as u64 > self.address_range {
            return Err(Error::Model(format!(
                "workload length n = {n} exceeds address range M = {}",
                self.address_range
            )));
        }
        Ok(())
    }

    pub fn check_op(&self, op: &InputOp) -> Result<()> {
        if op.addr < 1 || op.addr > self.address_range {
            return Err(Error::AddressOutOfRange {
                addr: op.addr,
                max: self.address_range,
            });
        }
        if op.data & !self.word_mask() != 0 {
            return Err(Error::DataTooWide {
                data: op.data,
                w: self.w,
            });
        }
        Ok(())
    }
}

pub(crate) fn word_mask(w: u32) -> Word {
    if w >= 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

/// Write sorts before Read in the lexicographic order on operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OpKind {
    Write,
    Read,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::Write => "W",
            OpKind::Read => "R",
        })
    }
}

/// One Array Maintenance operation `(o, a, d)`. Reads carry all-zero data.
///
/// The derived ordering is kind, then address, then data as an unsigned
/// integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InputOp {
    pub kind: OpKind,
    pub addr: u64,
    pub data: Word,
}

impl InputOp {
    pub fn write(addr: u64, data: Word) -> Self {
        Self {
            kind: OpKind::Write,
            addr,
            data,
        }
    }

    pub fn read(addr: u64) -> Self {
        Self {
            kind: OpKind::Read,
            addr,
            data: 0,
        }
    }
}

impl fmt::Display for InputOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {:#x})", self.kind, self.addr, self.data)
    }
}

/// An ordered input sequence `y = y_1, ..., y_n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputSequence {
    ops: Vec<InputOp>,
}

impl InputSequence {
    pub fn new(ops: Vec<InputOp>) -> Self {
        Self { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[InputOp] {
        &self.ops
    }

    pub fn ops_mut(&mut self) -> &mut [InputOp] {
        &mut self.ops
    }

    pub fn into_ops(self) -> Vec<InputOp> {
        self.ops
    }

    pub fn iter(&self) -> std::slice::Iter<'_, InputOp> {
        self.ops.iter()
    }

    /// Validates every op against `config` and the binding constraints.
    pub fn validate(&self, config: &OramConfig) -> Result<()> {
        config.bind(self.len())?;
        self.ops.iter().try_for_each(|op| config.check_op(op))
    }

    /// The sequence truncated to its first `len` operations.
    pub fn prefix(&self, len: usize) -> InputSequence {
        InputSequence::new(self.ops[..len.min(self.ops.len())].to_vec())
    }
}

impl From<Vec<InputOp>> for InputSequence {
    fn from(ops: Vec<InputOp>) -> Self {
        Self::new(ops)
    }
}

impl<'a> IntoIterator for &'a InputSequence {
    type Item = &'a InputOp;
    type IntoIter = std::slice::Iter<'a, InputOp>;

    fn into_iter(self) -> Self::IntoIter {
        self.ops.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_ranges() {
        assert!(OramConfig::new(0, 4, 8).is_err());
        assert!(OramConfig::new(1, 0, 8).is_err());
        assert!(OramConfig::new(1, 256, 8).is_ok());
        assert!(OramConfig::new(1, 257, 8).is_err());
        assert!(OramConfig::new(1, 4, 0).is_err());
        assert!(OramConfig::new(1, 4, 64).is_err());
        assert_eq!(OramConfig::new(1, 4, 8).unwrap().p_fail(), 0.0);
    }

    #[test]
    fn binding_checks_sqrt_and_range() {
        let cfg = OramConfig::new(4, 64, 32).unwrap();
        assert!(cfg.bind(16).is_ok());
        assert!(cfg.bind(15).is_err());
        assert!(cfg.bind(64).is_ok());
        assert!(cfg.bind(66).is_err());
    }

    #[test]
    fn op_order_puts_writes_first() {
        assert!(InputOp::write(9, 9) < InputOp::read(1));
        assert!(InputOp::read(1) < InputOp::read(2));
        assert!(InputOp::write(2, 0) < InputOp::write(2, 1));
    }

    #[test]
    fn check_op_rejects_wide_data() {
        let cfg = OramConfig::new(1, 4, 4).unwrap();
        assert!(cfg.check_op(&InputOp::write(1, 0xf)).is_ok());
        assert_eq!(
            cfg.check_op(&InputOp::write(1, 0x10)),
            Err(Error::DataTooWide { data: 0x10, w: 4 })
        );
        assert!(cfg.check_op(&InputOp::read(5)).is_err());
    }
}
