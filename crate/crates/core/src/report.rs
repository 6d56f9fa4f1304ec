//! Lower-bound reports for a single trace.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::engine::Engine;
use crate::error::Result;
use crate::graph::build_access_graph;
use crate::partition::{certify, edge_lower_bound_from_certificate, theorem_k_max, Rational};
use crate::tracefile::TraceFile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KVerdict {
    pub k: usize,
    /// Per-part threshold `ell / k`.
    pub ell_over_k: String,
    pub found: bool,
    /// `ceil((ell / 2) * |K|)` over the keys found so far.
    pub bound_cumulative: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub engine: String,
    pub workload: String,
    pub n: usize,
    pub measured_probes: usize,
    pub ell: String,
    pub k_max: usize,
    pub certified_edge_bound: u64,
    /// Every edge ends at a probe, so the edge bound is also a probe bound.
    pub certified_probe_bound: u64,
    pub overhead_ratio: f64,
    pub verdicts: Vec<KVerdict>,
    pub deviations: Vec<String>,
}

impl ExperimentReport {
    pub const CSV_HEADER: &'static str = "k,ell_over_k,found,bound_cumulative";

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", Self::CSV_HEADER);
        for v in &self.verdicts {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                v.k, v.ell_over_k, v.found, v.bound_cumulative
            );
        }
        s
    }
}

/// Default density parameter `floor(n / 5)`.
pub fn default_ell(n: usize) -> Rational {
    Rational::from_integer((n / 5) as i64)
}

/// Certifies an edge lower bound for `file`'s trace. `ell` defaults to
/// `floor(n / 5)` and `k_max` to [`theorem_k_max`] for the header's `n, m`.
pub fn analyze_trace(
    file: &TraceFile,
    ell: Option<Rational>,
    k_max: Option<usize>,
) -> Result<ExperimentReport> {
    let h = &file.header;
    let ell = ell.unwrap_or_else(|| default_ell(h.n));
    let k_max = k_max.unwrap_or_else(|| theorem_k_max(h.n, h.m));
    let g = build_access_graph(&file.trace)?;
    let cert = certify(&g, ell, k_max);
    let bound = edge_lower_bound_from_certificate(&cert, &g)?;
    let mut verdicts = Vec::new();
    let mut found = 0i64;
    let mut k = 1usize;
    while k <= k_max {
        let hit = cert.witnessed.contains_key(&k);
        found += hit as i64;
        let cumulative = (ell / Rational::from_integer(2) * Rational::from_integer(found))
            .ceil()
            .to_integer()
            .max(0) as u64;
        verdicts.push(KVerdict {
            k,
            ell_over_k: cert.part_threshold(k).to_string(),
            found: hit,
            bound_cumulative: cumulative,
        });
        match k.checked_mul(4) {
            Some(next) => k = next,
            None => break,
        }
    }
    let deviations = match h.config() {
        Ok(cfg) => Engine::new(h.engine, cfg, h.seed, Some(h.n))
            .map(|e| e.deviations())
            .unwrap_or_default(),
        Err(_) => Vec::new(),
    };
    let measured = file.trace.len();
    Ok(ExperimentReport {
        engine: h.engine.to_string(),
        workload: h.workload.to_string(),
        n: h.n,
        measured_probes: measured,
        ell: ell.to_string(),
        k_max,
        certified_edge_bound: bound,
        certified_probe_bound: bound,
        overhead_ratio: if h.n == 0 {
            0.0
        } else {
            measured as f64 / h.n as f64
        },
        verdicts,
        deviations,
    })
}
