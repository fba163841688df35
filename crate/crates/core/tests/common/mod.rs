//! Helpers shared by the integration tests: random DAGs and brute-force
//! oracles that do not use the library's ordering code.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use hashorder::chain::ChainId;
use hashorder::order::{EventId, HappensBeforeDag, LinearExtension};
use hashorder::sim::SimRng;

pub fn id(s: &str) -> ChainId {
    ChainId::new(s).unwrap()
}

pub fn ev(c: &str, h: u64) -> EventId {
    EventId::new(id(c), h)
}

/// Events plus cross-chain edges of a random acyclic network.
#[derive(Debug, Clone)]
pub struct RandomDag {
    pub nodes: Vec<EventId>,
    /// Every edge, intra-chain links included.
    pub edges: Vec<(EventId, EventId)>,
}

impl RandomDag {
    pub fn build(&self) -> HappensBeforeDag {
        HappensBeforeDag::from_edges(self.nodes.iter().cloned(), self.edges.iter().cloned())
            .unwrap()
    }
}

/// Interleaves `n` events over at most `chains` chains in a random creation
/// order, then adds each forward cross-chain edge with probability `q`.
pub fn random_dag(rng: &mut SimRng, n: usize, chains: usize, q: f64) -> RandomDag {
    let names: Vec<String> = (0..chains.max(1)).map(|i| format!("c{i}")).collect();
    let mut heights = vec![0u64; names.len()];
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.below(names.len() as u64) as usize;
        nodes.push(EventId::new(id(&names[c]), heights[c]));
        heights[c] += 1;
    }
    let mut edges = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if a.chain == b.chain {
                if b.height == a.height + 1 {
                    edges.push((a.clone(), b.clone()));
                }
            } else if rng.next_unit() < q {
                edges.push((a.clone(), b.clone()));
            }
        }
    }
    RandomDag { nodes, edges }
}

fn position(nodes: &[EventId], e: &EventId) -> usize {
    nodes.iter().position(|x| x == e).unwrap()
}

/// `reach[i][j]`: a BFS from node `i` visits node `j` (with `i != j`).
pub fn bfs_reach(g: &RandomDag) -> Vec<Vec<bool>> {
    let n = g.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for (a, b) in &g.edges {
        adj[position(&g.nodes, a)].push(position(&g.nodes, b));
    }
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut queue: VecDeque<usize> = adj[s].iter().copied().collect();
            while let Some(v) = queue.pop_front() {
                if !seen[v] {
                    seen[v] = true;
                    queue.extend(adj[v].iter().copied());
                }
            }
            seen
        })
        .collect()
}

/// Every permutation of the events that puts each edge's source first,
/// sorted lexicographically by (chain, height).
pub fn brute_force_extensions(g: &RandomDag) -> Vec<Vec<EventId>> {
    let mut sorted: Vec<EventId> = g.nodes.clone();
    sorted.sort();
    let n = sorted.len();
    let edges: Vec<(usize, usize)> = g
        .edges
        .iter()
        .map(|(a, b)| (position(&sorted, a), position(&sorted, b)))
        .collect();
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let mut pos = vec![0; n];
        for (p, &v) in perm.iter().enumerate() {
            pos[v] = p;
        }
        if edges.iter().all(|&(a, b)| pos[a] < pos[b]) {
            out.push(perm.iter().map(|&i| sorted[i].clone()).collect());
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

pub fn as_vecs(exts: &[LinearExtension]) -> Vec<Vec<EventId>> {
    exts.iter().map(|e| e.0.clone()).collect()
}

pub fn chain_names(n: usize) -> Vec<ChainId> {
    (0..n).map(|i| id(&format!("n{i:03}"))).collect()
}

pub fn distinct<T: Ord + Clone>(items: &[T]) -> usize {
    items.iter().cloned().collect::<BTreeSet<_>>().len()
}
