use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{EventId, HappensBeforeDag, OrderError};

/// Node-count bound used by [`count_linear_extensions`].
pub const DEFAULT_COUNT_BOUND: usize = 20;

/// Hard ceiling for exact counting. Downsets are bitmasks and counts are
/// accumulated in `u128`, which holds 34! without overflow.
pub const MAX_COUNT_BOUND: usize = 34;

/// One admissible total order of all events.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinearExtension(pub Vec<EventId>);

impl LinearExtension {
    pub fn events(&self) -> &[EventId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when the sequence covers every node of `dag` exactly once and
    /// puts the source of every edge before its target.
    pub fn respects(&self, dag: &HappensBeforeDag) -> bool {
        if self.0.len() != dag.len() {
            return false;
        }
        let mut position = vec![usize::MAX; dag.len()];
        for (pos, e) in self.0.iter().enumerate() {
            match dag.index_of(e) {
                Ok(i) if position[i] == usize::MAX => position[i] = pos,
                _ => return false,
            }
        }
        dag.edges().iter().all(|edge| {
            let from = dag.index_of(&edge.from).expect("edge endpoints are nodes");
            let to = dag.index_of(&edge.to).expect("edge endpoints are nodes");
            position[from] < position[to]
        })
    }
}

impl std::fmt::Display for LinearExtension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Outcome of an exhaustive enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Enumeration {
    /// Every linear extension, in lexicographic order of (chain, height).
    Complete(Vec<LinearExtension>),
    /// More than `limit` extensions exist. `first` holds the first `limit`
    /// and `found` how many were seen before stopping (`limit + 1`).
    Overflow {
        first: Vec<LinearExtension>,
        found: usize,
    },
    /// The progress hook asked to stop.
    Cancelled {
        first: Vec<LinearExtension>,
        found: usize,
    },
}

impl Enumeration {
    pub fn extensions(&self) -> &[LinearExtension] {
        match self {
            Enumeration::Complete(all) => all,
            Enumeration::Overflow { first, .. } | Enumeration::Cancelled { first, .. } => first,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, Enumeration::Complete(_))
    }
}

/// Kahn's order, smallest (chain, height) first among ready events.
pub fn canonical_order(dag: &HappensBeforeDag) -> LinearExtension {
    LinearExtension(
        dag.topo_indices()
            .iter()
            .map(|&i| dag.node(i).clone())
            .collect(),
    )
}

/// True when the DAG admits exactly one linear extension: every adjacent
/// pair of the canonical order is joined by a path.
pub fn has_unique_extension(dag: &HappensBeforeDag) -> bool {
    dag.topo_indices()
        .windows(2)
        .all(|w| dag.reaches(w[0], w[1]))
}

/// All linear extensions of `dag`, or [`Enumeration::Overflow`] once more
/// than `limit` exist.
pub fn linear_extensions(dag: &HappensBeforeDag, limit: usize) -> Enumeration {
    linear_extensions_with(dag, limit, |_| ControlFlow::Continue(()))
}

/// Like [`linear_extensions`], calling `progress` with the running count
/// after each extension is found. Returning `Break` cancels.
pub fn linear_extensions_with<F>(
    dag: &HappensBeforeDag,
    limit: usize,
    mut progress: F,
) -> Enumeration
where
    F: FnMut(usize) -> ControlFlow<()>,
{
    let n = dag.len();
    let mut indegree: Vec<usize> = (0..n).map(|i| dag.predecessors(i).len()).collect();
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut prefix: Vec<usize> = Vec::with_capacity(n);
    let mut found = Vec::new();
    let mut count = 0usize;
    // Smallest candidate index allowed at the current depth.
    let mut start = 0usize;

    loop {
        if prefix.len() == n {
            count += 1;
            if count > limit {
                return Enumeration::Overflow {
                    first: found,
                    found: count,
                };
            }
            found.push(LinearExtension(
                prefix.iter().map(|&i| dag.node(i).clone()).collect(),
            ));
            if progress(count).is_break() {
                return Enumeration::Cancelled {
                    first: found,
                    found: count,
                };
            }
        } else if let Some(c) = ready.range(start..).next().copied() {
            ready.remove(&c);
            for &w in dag.successors(c) {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.insert(w);
                }
            }
            prefix.push(c);
            start = 0;
            continue;
        }
        // Backtrack: undo the last choice and try the next candidate.
        let Some(c) = prefix.pop() else {
            return Enumeration::Complete(found);
        };
        for &w in dag.successors(c) {
            if indegree[w] == 0 {
                ready.remove(&w);
            }
            indegree[w] += 1;
        }
        ready.insert(c);
        start = c + 1;
    }
}

/// Exact number of linear extensions for DAGs of at most
/// [`DEFAULT_COUNT_BOUND`] events.
pub fn count_linear_extensions(dag: &HappensBeforeDag) -> Result<BigUint, OrderError> {
    count_linear_extensions_bounded(dag, DEFAULT_COUNT_BOUND)
}

/// Dynamic programming over downsets: the number of ways to reach downset
/// `S ∪ {v}` sums the ways to reach `S` over every minimal remaining `v`.
/// `bound` is clamped to [`MAX_COUNT_BOUND`].
pub fn count_linear_extensions_bounded(
    dag: &HappensBeforeDag,
    bound: usize,
) -> Result<BigUint, OrderError> {
    let bound = bound.min(MAX_COUNT_BOUND);
    let n = dag.len();
    if n > bound {
        return Err(OrderError::TooLarge { nodes: n, bound });
    }
    let pred_mask: Vec<u64> = (0..n)
        .map(|v| dag.predecessors(v).iter().fold(0u64, |m, &p| m | 1 << p))
        .collect();
    let mut layer: HashMap<u64, u128> = HashMap::from([(0, 1)]);
    for _ in 0..n {
        let mut next: HashMap<u64, u128> = HashMap::with_capacity(layer.len());
        for (&mask, &ways) in &layer {
            for (v, &needs) in pred_mask.iter().enumerate() {
                let bit = 1u64 << v;
                if mask & bit == 0 && needs & !mask == 0 {
                    *next.entry(mask | bit).or_insert(0) += ways;
                }
            }
        }
        layer = next;
    }
    let total = layer.values().copied().sum::<u128>();
    Ok(BigUint::from(total))
}
