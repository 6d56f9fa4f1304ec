//! Access graphs: vertices are probe timestamps `0..N`, and `(i, j)` is an
//! edge iff `a_i = a_j` and no probe strictly between them touches the same
//! address. Every vertex has in- and outdegree at most one.

use rustc_hash::FxHashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::server::AccessSequence;

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccessGraph {
    succ: Vec<u32>,
    pred: Vec<u32>,
    edges: usize,
}

impl AccessGraph {
    /// Vertex count `N`.
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn succ(&self, v: usize) -> Option<usize> {
        match self.succ[v] {
            NONE => None,
            s => Some(s as usize),
        }
    }

    pub fn pred(&self, v: usize) -> Option<usize> {
        match self.pred[v] {
            NONE => None,
            p => Some(p as usize),
        }
    }

    /// Edges ordered by source vertex.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != NONE)
            .map(|(u, &s)| (u, s as usize))
    }

    /// An arbitrary ordered graph with in- and outdegree at most one.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        check_vertex_count(n)?;
        let mut succ = vec![NONE; n];
        let mut pred = vec![NONE; n];
        for &(u, v) in edges {
            if u >= v || v >= n {
                return Err(Error::Argument(format!(
                    "edge ({u}, {v}) is not ordered within {n} vertices"
                )));
            }
            if succ[u] != NONE || pred[v] != NONE {
                return Err(Error::Argument(format!(
                    "edge ({u}, {v}) breaks the degree bound"
                )));
            }
            succ[u] = v as u32;
            pred[v] = u as u32;
        }
        Ok(Self {
            succ,
            pred,
            edges: edges.len(),
        })
    }

    /// `|E(a, m, b)|`: edges leaving `{a..m-1}` and landing in `{m..b-1}`.
    pub fn crossing_edge_count(&self, a: usize, m: usize, b: usize) -> Result<usize> {
        if !(a <= m && m <= b && b <= self.len()) {
            return Err(Error::Boundaries(format!(
                "need a <= m <= b <= N, got ({a}, {m}, {b}) with N = {}",
                self.len()
            )));
        }
        Ok(self.succ[a..m]
            .iter()
            .filter(|&&s| s != NONE && (m..b).contains(&(s as usize)))
            .count())
    }

    /// Graphviz rendering, vertices laid out left to right.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph access {\n  rankdir=LR;\n");
        for v in 0..self.len() {
            let _ = writeln!(out, "  {v};");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {u} -> {v};");
        }
        out.push_str("}\n");
        out
    }

    /// One `u v` pair per line, ordered by source.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

fn check_vertex_count(n: usize) -> Result<()> {
    if n >= NONE as usize {
        return Err(Error::Argument(format!(
            "{n} vertices exceed the supported maximum"
        )));
    }
    Ok(())
}

/// Largest address space indexed by a flat table while building graphs.
const DENSE_ADDRS: u64 = 1 << 24;

/// Links each probe to the previous probe of the same address in one pass.
pub fn build_access_graph(seq: &AccessSequence) -> Result<AccessGraph> {
    let addrs = seq.addrs();
    check_vertex_count(addrs.len())?;
    let mut succ = vec![NONE; addrs.len()];
    let mut pred = vec![NONE; addrs.len()];
    let mut edges = 0;
    let mut link = |i: u32, j: usize| {
        succ[i as usize] = j as u32;
        pred[j] = i;
        edges += 1;
    };
    let max = addrs.iter().copied().max().unwrap_or(0);
    if max < DENSE_ADDRS {
        let mut last = vec![NONE; max as usize + 1];
        for (j, &a) in addrs.iter().enumerate() {
            let i = std::mem::replace(&mut last[a as usize], j as u32);
            if i != NONE {
                link(i, j);
            }
        }
    } else {
        let mut last: FxHashMap<u64, u32> = FxHashMap::default();
        for (j, &a) in addrs.iter().enumerate() {
            if let Some(i) = last.insert(a, j as u32) {
                link(i, j);
            }
        }
    }
    Ok(AccessGraph { succ, pred, edges })
}
