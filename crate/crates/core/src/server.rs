//! Instrumented Array Maintenance server.
//!
//! The server stores `2^w` cells of `w` bits and logs every probe. Low
//! addresses live in a flat array, the rest in a hash map.
//! What the adversary sees is only the projection of that log onto
//! addresses, see [`ServerState::adversary_view`].

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{word_mask, OpKind, Word};

/// Anything an engine can issue probes against.
pub trait Server {
    /// Executes one probe. Writes return `0^w`; reads return the last value
    /// written at `addr`, or `0^w` if the cell was never written.
    fn probe(&mut self, kind: OpKind, addr: u64, data: Word) -> Result<Word>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeRecord {
    /// 0-based timestamp.
    pub t: usize,
    pub kind: OpKind,
    pub addr: u64,
    /// Payload written, or payload returned for reads.
    pub data: Word,
    /// Input operation that triggered the probe. Never part of the
    /// adversary's view.
    pub op_index: usize,
}

/// How much of each probe the server keeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Recording {
    /// Full [`ProbeRecord`]s.
    #[default]
    Full,
    /// Addresses only. Enough for every adversarial analysis and far
    /// cheaper on long traces.
    AddressesOnly,
}

/// The adversary's view `A(M, y) = a_0, ..., a_{N-1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AccessSequence {
    addrs: Vec<u64>,
}

impl AccessSequence {
    pub fn new(addrs: Vec<u64>) -> Self {
        Self { addrs }
    }

    pub fn len(&self) -> usize {
        self.addrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.addrs.is_empty()
    }

    pub fn addrs(&self) -> &[u64] {
        &self.addrs
    }

    pub fn into_addrs(self) -> Vec<u64> {
        self.addrs
    }

    pub fn distinct_addresses(&self) -> usize {
        let mut v = self.addrs.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }
}

impl From<Vec<u64>> for AccessSequence {
    fn from(addrs: Vec<u64>) -> Self {
        Self::new(addrs)
    }
}

#[derive(Clone, Debug)]
pub struct ServerState {
    w: u32,
    dense: Vec<Word>,
    sparse: FxHashMap<u64, Word>,
    written: usize,
    recording: Recording,
    log: Vec<ProbeRecord>,
    addrs: Vec<u64>,
    op_index: usize,
}

impl ServerState {
    pub fn new(w: u32) -> Self {
        Self::with_recording(w, Recording::Full)
    }

    pub fn with_recording(w: u32, recording: Recording) -> Self {
        Self {
            w,
            dense: Vec::new(),
            sparse: FxHashMap::default(),
            written: 0,
            recording,
            log: Vec::new(),
            addrs: Vec::new(),
            op_index: 0,
        }
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn recording(&self) -> Recording {
        self.recording
    }

    /// Largest valid server address, `2^w`.
    pub fn max_addr(&self) -> u64 {
        1u64 << self.w
    }

    /// Tags subsequent probes with input operation `index`.
    pub fn begin_op(&mut self, index: usize) {
        self.op_index = index;
    }

    pub fn current_op(&self) -> usize {
        self.op_index
    }

    /// Number of probes issued so far.
    pub fn probe_count(&self) -> usize {
        match self.recording {
            Recording::Full => self.log.len(),
            Recording::AddressesOnly => self.addrs.len(),
        }
    }

    /// Full probe log. Empty under [`Recording::AddressesOnly`].
    pub fn probe_log(&self) -> &[ProbeRecord] {
        &self.log
    }

    /// Cell contents without issuing a probe.
    pub fn peek(&self, addr: u64) -> Word {
        match self.dense.get(addr as usize) {
            Some(&v) if v != UNWRITTEN => v,
            Some(_) => 0,
            None => self.sparse.get(&addr).copied().unwrap_or(0),
        }
    }

    /// Number of cells that have ever been written.
    pub fn written_cells(&self) -> usize {
        self.written
    }

    /// Addresses of all probes in order; boundaries, kinds and data are dropped.
    pub fn adversary_view(&self) -> AccessSequence {
        match self.recording {
            Recording::Full => AccessSequence::new(self.log.iter().map(|r| r.addr).collect()),
            Recording::AddressesOnly => AccessSequence::new(self.addrs.clone()),
        }
    }

    pub fn into_adversary_view(self) -> AccessSequence {
        match self.recording {
            Recording::Full => self.adversary_view(),
            Recording::AddressesOnly => AccessSequence::new(self.addrs),
        }
    }

    /// Probe counts indexed by input operation, over `n` operations.
    /// Requires a full log.
    pub fn probes_per_op(&self, n: usize) -> Vec<usize> {
        let mut counts = vec![0; n];
        for r in &self.log {
            if let Some(c) = counts.get_mut(r.op_index) {
                *c += 1;
            }
        }
        counts
    }
}

impl ServerState {
    fn store(&mut self, addr: u64, data: Word) {
        if addr < DENSE_CELLS {
            let i = addr as usize;
            if i >= self.dense.len() {
                self.dense.resize(i + 1, UNWRITTEN);
            }
            if self.dense[i] == UNWRITTEN {
                self.written += 1;
            }
            self.dense[i] = data;
        } else if self.sparse.insert(addr, data).is_none() {
            self.written += 1;
        }
    }
}

/// Addresses below this are stored in the flat array.
const DENSE_CELLS: u64 = 1 << 22;
/// Never a valid `w`-bit word since `w <= 63`.
const UNWRITTEN: Word = u64::MAX;

impl Server for ServerState {
    fn probe(&mut self, kind: OpKind, addr: u64, data: Word) -> Result<Word> {
        if addr < 1 || addr > self.max_addr() {
            return Err(Error::AddressOutOfRange {
                addr,
                max: self.max_addr(),
            });
        }
        if data & !word_mask(self.w) != 0 {
            return Err(Error::DataTooWide { data, w: self.w });
        }
        let (ret, logged) = match kind {
            OpKind::Write => {
                self.store(addr, data);
                (0, data)
            }
            OpKind::Read => {
                let v = self.peek(addr);
                (v, v)
            }
        };
        match self.recording {
            Recording::Full => {
                let t = self.log.len();
                self.log.push(ProbeRecord {
                    t,
                    kind,
                    addr,
                    data: logged,
                    op_index: self.op_index,
                });
            }
            Recording::AddressesOnly => self.addrs.push(addr),
        }
        Ok(ret)
    }
}
