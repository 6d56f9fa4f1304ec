//! Exhaustive search over boundary sequences; the reference the greedy
//! tester is checked against.

use rustc_hash::FxHashSet;

use super::{required_edges, Partition, Rational};
use crate::error::{Error, Result};
use crate::graph::AccessGraph;

/// Largest vertex count accepted by [`brute_force_dense_partition`].
pub const BRUTE_FORCE_LIMIT: usize = 18;

struct Search<'a> {
    edges: &'a [(usize, usize)],
    n: usize,
    k: usize,
    need: usize,
    dead: FxHashSet<(usize, usize)>,
}

impl Search<'_> {
    /// Counted straight from the edge list, independent of the graph's own
    /// crossing query.
    fn crossing(&self, a: usize, m: usize, b: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| a <= u && u < m && m <= v && v < b)
            .count()
    }

    /// Tries every `(m_i, b_{i+1})` for part `i` starting at `b`.
    fn extend(&mut self, i: usize, b: usize, out: &mut Vec<usize>) -> bool {
        if self.dead.contains(&(i, b)) {
            return false;
        }
        let last = i + 1 == self.k;
        for m in b..=self.n {
            let ends = if last { self.n..=self.n } else { m..=self.n };
            for e in ends {
                if self.crossing(b, m, e) < self.need {
                    continue;
                }
                out.push(m);
                out.push(e);
                if last || self.extend(i + 1, e, out) {
                    return true;
                }
                out.truncate(out.len() - 2);
            }
        }
        self.dead.insert((i, b));
        false
    }
}

/// Exhaustive counterpart of [`super::greedy_dense_partition`]; `N` is
/// limited to [`BRUTE_FORCE_LIMIT`].
pub fn brute_force_dense_partition(
    g: &AccessGraph,
    k: usize,
    ell: &Rational,
) -> Result<Option<Partition>> {
    if g.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n: g.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if k == 0 {
        return Ok(None);
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut search = Search {
        edges: &edges,
        n: g.len(),
        k,
        need: required_edges(ell),
        dead: FxHashSet::default(),
    };
    let mut out = vec![0];
    Ok(search
        .extend(0, 0, &mut out)
        .then(|| Partition::new(out).expect("search emits monotone boundaries")))
}
