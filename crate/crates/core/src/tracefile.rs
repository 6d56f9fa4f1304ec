//! Line-oriented trace files.
//!
//! ```text
//! #format_version=1
//! #engine=passthrough
//! #workload=alt:n=4
//! #n=4
//! #m=1
//! #M=4
//! #w=32
//! #seed=0
//! #N=4
//! 1
//! 1
//! ...
//! ```
//!
//! With boundaries, a `#op <index>` line precedes the probes of each
//! operation. Readers that only want the adversary's view ignore them.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::engine::{run_sequence_with, EngineKind};
use crate::error::{Error, Result};
use crate::model::OramConfig;
use crate::server::{AccessSequence, Recording};
use crate::workload::WorkloadSpec;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceHeader {
    pub format_version: u32,
    pub engine: EngineKind,
    pub workload: WorkloadSpec,
    pub n: usize,
    pub m: usize,
    pub address_range: u64,
    pub w: u32,
    pub seed: u64,
    /// Number of probes in the body.
    pub probes: usize,
}

impl TraceHeader {
    pub fn config(&self) -> Result<OramConfig> {
        OramConfig::new(self.m, self.address_range, self.w)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceFile {
    pub header: TraceHeader,
    pub trace: AccessSequence,
    /// Index of the first probe of each operation, when recorded.
    pub op_starts: Option<Vec<usize>>,
}

impl TraceFile {
    /// Runs `engine` on `workload` and captures the trace.
    pub fn simulate(
        engine: EngineKind,
        config: &OramConfig,
        workload: &WorkloadSpec,
        seed: u64,
        with_boundaries: bool,
    ) -> Result<Self> {
        let (y, _) = workload.generate(config.w)?;
        let recording = if with_boundaries {
            Recording::Full
        } else {
            Recording::AddressesOnly
        };
        let out = run_sequence_with(engine, config, &y, seed, recording)?;
        let op_starts = with_boundaries.then(|| {
            let counts = out.server.probes_per_op(y.len());
            counts
                .iter()
                .scan(0, |start, &c| {
                    let s = *start;
                    *start += c;
                    Some(s)
                })
                .collect()
        });
        let trace = out.server.into_adversary_view();
        Ok(Self {
            header: TraceHeader {
                format_version: FORMAT_VERSION,
                engine,
                workload: workload.clone(),
                n: y.len(),
                m: config.m,
                address_range: config.address_range,
                w: config.w,
                seed,
                probes: trace.len(),
            },
            trace,
            op_starts,
        })
    }

    /// Same trace without boundary annotations.
    pub fn without_boundaries(&self) -> Self {
        Self {
            op_starts: None,
            ..self.clone()
        }
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut s = String::with_capacity(16 + 8 * self.trace.len());
        let _ = writeln!(s, "#format_version={}", h.format_version);
        let _ = writeln!(s, "#engine={}", h.engine);
        let _ = writeln!(s, "#workload={}", h.workload);
        let _ = writeln!(s, "#n={}", h.n);
        let _ = writeln!(s, "#m={}", h.m);
        let _ = writeln!(s, "#M={}", h.address_range);
        let _ = writeln!(s, "#w={}", h.w);
        let _ = writeln!(s, "#seed={}", h.seed);
        let _ = writeln!(s, "#N={}", h.probes);
        let starts = self.op_starts.as_deref().unwrap_or(&[]);
        let mut next = 0;
        for (t, a) in self.trace.addrs().iter().enumerate() {
            while next < starts.len() && starts[next] == t {
                let _ = writeln!(s, "#op {next}");
                next += 1;
            }
            let _ = writeln!(s, "{a}");
        }
        for j in next..starts.len() {
            let _ = writeln!(s, "#op {j}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad =
            |line: usize, why: String| Error::TraceFormat(format!("line {}: {why}", line + 1));
        let mut lines = text.lines().enumerate();
        const KEYS: [&str; 9] = [
            "format_version",
            "engine",
            "workload",
            "n",
            "m",
            "M",
            "w",
            "seed",
            "N",
        ];
        let mut values = Vec::with_capacity(KEYS.len());
        for key in KEYS {
            let (no, line) = lines
                .next()
                .ok_or_else(|| Error::TraceFormat(format!("missing header key {key}")))?;
            let value = line
                .strip_prefix('#')
                .and_then(|l| l.strip_prefix(key))
                .and_then(|l| l.strip_prefix('='))
                .ok_or_else(|| bad(no, format!("expected #{key}=<value>")))?;
            values.push((no, value));
        }
        fn num<T: FromStr>(v: (usize, &str), key: &str) -> Result<T> {
            v.1.parse().map_err(|_| {
                Error::TraceFormat(format!("line {}: bad value for {key}: {:?}", v.0 + 1, v.1))
            })
        }
        let header = TraceHeader {
            format_version: num(values[0], "format_version")?,
            engine: values[1]
                .1
                .parse()
                .map_err(|e| bad(values[1].0, format!("{e}")))?,
            workload: values[2]
                .1
                .parse()
                .map_err(|e| bad(values[2].0, format!("{e}")))?,
            n: num(values[3], "n")?,
            m: num(values[4], "m")?,
            address_range: num(values[5], "M")?,
            w: num(values[6], "w")?,
            seed: num(values[7], "seed")?,
            probes: num(values[8], "N")?,
        };
        if header.format_version != FORMAT_VERSION {
            return Err(bad(
                values[0].0,
                format!("unsupported format version {}", header.format_version),
            ));
        }
        let mut addrs = Vec::with_capacity(header.probes);
        let mut starts = Vec::new();
        for (no, line) in lines {
            if let Some(rest) = line.strip_prefix("#op ") {
                let j: usize = rest
                    .parse()
                    .map_err(|_| bad(no, format!("bad boundary {rest:?}")))?;
                if j != starts.len() {
                    return Err(bad(no, format!("boundary {j} out of order")));
                }
                starts.push(addrs.len());
            } else {
                let a: u64 = line
                    .parse()
                    .map_err(|_| bad(no, format!("bad address {line:?}")))?;
                // canonical decimal only, so the file round-trips byte for byte
                if a.to_string() != line {
                    return Err(bad(no, format!("non-canonical address {line:?}")));
                }
                addrs.push(a);
            }
        }
        if addrs.len() != header.probes {
            return Err(Error::TraceFormat(format!(
                "header says N = {} but body has {} addresses",
                header.probes,
                addrs.len()
            )));
        }
        if !starts.is_empty() && starts.len() != header.n {
            return Err(Error::TraceFormat(format!(
                "{} boundaries for n = {} operations",
                starts.len(),
                header.n
            )));
        }
        if text.lines().count() > 0 && !text.ends_with('\n') {
            return Err(Error::TraceFormat("missing final newline".into()));
        }
        Ok(Self {
            header,
            trace: AccessSequence::new(addrs),
            op_starts: (!starts.is_empty()).then_some(starts),
        })
    }
}
