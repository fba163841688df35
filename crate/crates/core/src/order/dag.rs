use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use crate::chain::{verify_snapshot, ChainId, NetworkSnapshot};

use super::{EventId, OrderError, OrderRelation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    /// (X, k) -> (X, k + 1)
    IntraChain,
    /// Referenced block -> accepting block.
    CrossChain,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: EventId,
    pub to: EventId,
    pub kind: EdgeKind,
}

/// Happens-before graph over block-creation events.
///
/// Nodes are kept sorted by `(chain, height)`, so node indices follow the
/// canonical tie-break. Reachability is answered with per-chain clocks:
/// `clock[v][c]` is one more than the highest height on chain `c` that
/// reaches `v` (zero when none does). Since consecutive blocks of a chain
/// are always linked, `(c, h)` reaches `v` exactly when `clock[v][c] > h`.
#[derive(Debug, Clone)]
pub struct HappensBeforeDag {
    nodes: Vec<EventId>,
    index: HashMap<EventId, usize>,
    chains: Vec<ChainId>,
    chain_of: Vec<usize>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    topo: Vec<usize>,
    clocks: Vec<u64>,
}

impl PartialEq for HappensBeforeDag {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for HappensBeforeDag {}

/// Derives the happens-before DAG of a snapshot after checking it with
/// [`verify_snapshot`].
pub fn build_dag(snapshot: &NetworkSnapshot) -> Result<HappensBeforeDag, OrderError> {
    let violations = verify_snapshot(snapshot);
    if !violations.is_empty() {
        return Err(OrderError::InvalidSnapshot(violations));
    }
    build_dag_unchecked(snapshot)
}

/// Derives the DAG without hash verification. References are resolved by
/// the summary hash each block claims; a dangling reference is still an
/// error, and so is a cycle.
pub fn build_dag_unchecked(snapshot: &NetworkSnapshot) -> Result<HappensBeforeDag, OrderError> {
    let mut nodes = Vec::with_capacity(snapshot.block_count());
    for chain in snapshot.chains.values() {
        nodes.extend((0..chain.len() as u64).map(|h| EventId::new(chain.id.clone(), h)));
    }
    let mut cross = Vec::new();
    for chain in snapshot.chains.values() {
        for block in &chain.blocks {
            for r in &block.accepted {
                let source = snapshot
                    .resolve(r)
                    .ok_or_else(|| OrderError::DanglingReference {
                        at: EventId::new(chain.id.clone(), block.height),
                        from_chain: r.from_chain.clone(),
                    })?;
                cross.push((
                    EventId::new(r.from_chain.clone(), source.height),
                    EventId::new(chain.id.clone(), block.height),
                ));
            }
        }
    }
    HappensBeforeDag::from_edges(nodes, cross)
}

impl HappensBeforeDag {
    /// Builds a DAG from explicit events and extra edges. Every chain's
    /// heights must be contiguous from 0; intra-chain succession edges are
    /// added automatically. Extra edges between different chains become
    /// cross-chain edges; extra edges within a chain are kept as given.
    pub fn from_edges<N, E>(nodes: N, extra: E) -> Result<Self, OrderError>
    where
        N: IntoIterator<Item = EventId>,
        E: IntoIterator<Item = (EventId, EventId)>,
    {
        let nodes: BTreeSet<EventId> = nodes.into_iter().collect();
        let nodes: Vec<EventId> = nodes.into_iter().collect();
        let index: HashMap<EventId, usize> = nodes
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();

        let mut chain_ids: BTreeMap<ChainId, usize> = BTreeMap::new();
        for e in &nodes {
            let next = chain_ids.len();
            chain_ids.entry(e.chain.clone()).or_insert(next);
        }
        // `nodes` is sorted, so first-seen order is sorted order.
        let chains: Vec<ChainId> = chain_ids.keys().cloned().collect();
        let chain_of: Vec<usize> = nodes.iter().map(|e| chain_ids[&e.chain]).collect();

        let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (i, e) in nodes.iter().enumerate() {
            if e.height > 0 {
                let below = EventId::new(e.chain.clone(), e.height - 1);
                let j = *index.get(&below).ok_or(OrderError::UnknownEvent(below))?;
                edge_set.insert((j, i));
            }
        }
        for (a, b) in extra {
            let i = *index
                .get(&a)
                .ok_or_else(|| OrderError::UnknownEvent(a.clone()))?;
            let j = *index
                .get(&b)
                .ok_or_else(|| OrderError::UnknownEvent(b.clone()))?;
            if i == j {
                return Err(OrderError::CyclicReferences(vec![a]));
            }
            edge_set.insert((i, j));
        }

        let n = nodes.len();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(edge_set.len());
        for &(i, j) in &edge_set {
            succ[i].push(j);
            pred[j].push(i);
            let kind = if chain_of[i] == chain_of[j] {
                EdgeKind::IntraChain
            } else {
                EdgeKind::CrossChain
            };
            edges.push(Edge {
                from: nodes[i].clone(),
                to: nodes[j].clone(),
                kind,
            });
        }

        let topo = kahn(&succ, &pred).map_err(|stuck| {
            OrderError::CyclicReferences(stuck.into_iter().map(|i| nodes[i].clone()).collect())
        })?;

        let k = chains.len();
        let mut clocks = vec![0u64; n * k];
        let mut row = vec![0u64; k];
        for &v in &topo {
            row.fill(0);
            for &p in &pred[v] {
                for (r, &x) in row.iter_mut().zip(&clocks[p * k..p * k + k]) {
                    *r = (*r).max(x);
                }
            }
            let own = chain_of[v];
            row[own] = row[own].max(nodes[v].height + 1);
            clocks[v * k..v * k + k].copy_from_slice(&row);
        }

        Ok(Self {
            nodes,
            index,
            chains,
            chain_of,
            succ,
            pred,
            edges,
            topo,
            clocks,
        })
    }

    /// Events sorted by (chain, height).
    pub fn nodes(&self) -> &[EventId] {
        &self.nodes
    }

    /// Edges sorted by (from, to).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cross_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::CrossChain)
    }

    /// Chains that own at least one event, sorted.
    pub fn chains(&self) -> &[ChainId] {
        &self.chains
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, e: &EventId) -> bool {
        self.index.contains_key(e)
    }

    pub fn index_of(&self, e: &EventId) -> Result<usize, OrderError> {
        self.index
            .get(e)
            .copied()
            .ok_or_else(|| OrderError::UnknownEvent(e.clone()))
    }

    pub(crate) fn node(&self, i: usize) -> &EventId {
        &self.nodes[i]
    }

    pub(crate) fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    pub(crate) fn predecessors(&self, i: usize) -> &[usize] {
        &self.pred[i]
    }

    /// Canonical topological order as node indices.
    pub(crate) fn topo_indices(&self) -> &[usize] {
        &self.topo
    }

    fn clock(&self, v: usize) -> &[u64] {
        let k = self.chains.len();
        &self.clocks[v * k..v * k + k]
    }

    /// True when node `a` reaches node `b` by a nonempty path.
    pub(crate) fn reaches(&self, a: usize, b: usize) -> bool {
        a != b && self.clock(b)[self.chain_of[a]] > self.nodes[a].height
    }

    pub fn precedes(&self, a: &EventId, b: &EventId) -> Result<OrderRelation, OrderError> {
        let ia = self.index_of(a)?;
        let ib = self.index_of(b)?;
        Ok(if ia == ib {
            OrderRelation::Equal
        } else if self.reaches(ia, ib) {
            OrderRelation::Before
        } else if self.reaches(ib, ia) {
            OrderRelation::After
        } else {
            OrderRelation::Concurrent
        })
    }

    /// Number of (unordered) pairs of events on different chains, and how
    /// many of those pairs are ordered.
    pub fn cross_chain_pairs(&self) -> (u64, u64) {
        let k = self.chains.len();
        let mut sizes = vec![0u64; k];
        for &c in &self.chain_of {
            sizes[c] += 1;
        }
        let n: u64 = sizes.iter().sum();
        let same: u64 = sizes.iter().map(|s| s * s).sum();
        let total = (n * n - same) / 2;
        let mut ordered = 0u64;
        for v in 0..self.nodes.len() {
            let own = self.chain_of[v];
            ordered += self
                .clock(v)
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != own)
                .map(|(_, &x)| x)
                .sum::<u64>();
        }
        (total, ordered)
    }
}

/// Kahn's algorithm taking the smallest ready index first. On a cycle,
/// returns the indices that could not be scheduled.
fn kahn(succ: &[Vec<usize>], pred: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = succ.len();
    let mut indegree: Vec<usize> = pred.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &succ[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&i| indegree[i] > 0).collect())
    }
}
