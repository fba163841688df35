use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::chain::{ChainId, NetworkSnapshot};

use super::{HappensBeforeDag, OrderError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainGranularity {
    pub block_count: u64,
    /// `None` when the chain has fewer than two blocks.
    pub mean_interval: Option<Ratio<u64>>,
    pub max_interval: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GranularityReport {
    pub per_chain: BTreeMap<ChainId, ChainGranularity>,
    /// Ordered cross-chain pairs over all cross-chain pairs.
    pub comparability_ratio: Ratio<u64>,
}

/// Fraction of unordered pairs of events on different chains that the DAG
/// orders. A network with no such pairs has nothing left to order and
/// scores 1.
pub fn comparability_ratio(dag: &HappensBeforeDag) -> Ratio<u64> {
    let (total, ordered) = dag.cross_chain_pairs();
    if total == 0 {
        Ratio::from_integer(1)
    } else {
        Ratio::new(ordered, total)
    }
}

/// Per-chain block intervals plus the network comparability ratio.
///
/// An interval is the timestamp difference between consecutive blocks
/// when both carry one, and 1 otherwise. Timestamps are never used for
/// ordering; a decreasing pair counts as 0.
pub fn granularity(snapshot: &NetworkSnapshot, dag: &HappensBeforeDag) -> GranularityReport {
    let per_chain = snapshot
        .chains
        .iter()
        .map(|(id, chain)| {
            let intervals: Vec<u64> = chain
                .blocks
                .windows(2)
                .map(|w| match (w[0].local_timestamp, w[1].local_timestamp) {
                    (Some(a), Some(b)) => b.saturating_sub(a),
                    _ => 1,
                })
                .collect();
            let mean_interval = (!intervals.is_empty())
                .then(|| Ratio::new(intervals.iter().sum(), intervals.len() as u64));
            let report = ChainGranularity {
                block_count: chain.len() as u64,
                mean_interval,
                max_interval: intervals.iter().copied().max(),
            };
            (id.clone(), report)
        })
        .collect();
    GranularityReport {
        per_chain,
        comparability_ratio: comparability_ratio(dag),
    }
}

/// Half-open height range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeightWindow {
    pub start: u64,
    pub end: u64,
}

impl HeightWindow {
    pub fn contains(&self, height: u64) -> bool {
        self.start <= height && height < self.end
    }
}

/// How many times each chain's blocks were accepted by other chains.
///
/// With a window, only source blocks inside their chain's range count;
/// chains without an entry are not restricted.
pub fn mainstream_score(
    dag: &HappensBeforeDag,
    window: Option<&BTreeMap<ChainId, HeightWindow>>,
) -> Result<BTreeMap<ChainId, u64>, OrderError> {
    if let Some(window) = window {
        for (chain, w) in window {
            if w.start > w.end {
                return Err(OrderError::InvalidWindow(format!(
                    "{chain}: start {} is after end {}",
                    w.start, w.end
                )));
            }
            if !dag.chains().contains(chain) {
                return Err(OrderError::InvalidWindow(format!("{chain}: no such chain")));
            }
        }
    }
    let mut scores: BTreeMap<ChainId, u64> = dag.chains().iter().map(|c| (c.clone(), 0)).collect();
    for edge in dag.cross_edges() {
        let in_window = window
            .and_then(|w| w.get(&edge.from.chain))
            .is_none_or(|w| w.contains(edge.from.height));
        if in_window {
            *scores
                .get_mut(&edge.from.chain)
                .expect("edge source is a node") += 1;
        }
    }
    Ok(scores)
}
