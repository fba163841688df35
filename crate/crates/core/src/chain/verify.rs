use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use super::{AssociationRef, Chain, ChainId, Digest, NetworkSnapshot};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub chain: ChainId,
    /// `None` for violations that belong to the chain as a whole or to a
    /// pending association.
    pub height: Option<u64>,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// Block stored at position `expected` carries a different height.
    HeightMismatch {
        expected: u64,
        found: u64,
    },
    /// Block stored under one chain claims to belong to another.
    WrongChain {
        found: ChainId,
    },
    /// Genesis block with a nonzero prev_hash.
    GenesisPrevHash,
    /// prev_hash differs from the recomputed summary of the predecessor.
    PrevHashMismatch,
    /// Stored summary_hash differs from the hash of the block's fields.
    SummaryMismatch {
        stored: Digest,
        recomputed: Digest,
    },
    SelfAssociation,
    DuplicateAssociation(AssociationRef),
    /// No block on the source chain carries this summary hash.
    DanglingReference(AssociationRef),
    /// The referenced block exists but its fields no longer hash to the
    /// referenced value.
    ReferenceHashMismatch(AssociationRef),
    /// The block takes part in a reference cycle.
    CyclicReferences,
    /// A forgotten height that has no block.
    ForgottenOutOfRange(u64),
    /// A pending association that names an unknown chain, itself, or a
    /// block that does not exist.
    InvalidPending {
        to_chain: ChainId,
        reason: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.height {
            Some(h) => write!(f, "{}:{}: ", self.chain, h)?,
            None => write!(f, "{}: ", self.chain)?,
        }
        match &self.kind {
            ViolationKind::HeightMismatch { expected, found } => {
                write!(f, "height {found} stored at position {expected}")
            }
            ViolationKind::WrongChain { found } => write!(f, "block claims chain {found}"),
            ViolationKind::GenesisPrevHash => f.write_str("genesis prev_hash is not zero"),
            ViolationKind::PrevHashMismatch => {
                f.write_str("prev_hash does not match predecessor summary")
            }
            ViolationKind::SummaryMismatch { stored, recomputed } => {
                write!(
                    f,
                    "summary mismatch (stored {stored}, recomputed {recomputed})"
                )
            }
            ViolationKind::SelfAssociation => f.write_str("block references its own chain"),
            ViolationKind::DuplicateAssociation(r) => {
                write!(
                    f,
                    "duplicate reference to {} {}",
                    r.from_chain, r.from_block_hash
                )
            }
            ViolationKind::DanglingReference(r) => {
                write!(
                    f,
                    "reference to {} {} does not resolve",
                    r.from_chain, r.from_block_hash
                )
            }
            ViolationKind::ReferenceHashMismatch(r) => write!(
                f,
                "referenced block {} {} no longer hashes to the referenced value",
                r.from_chain, r.from_block_hash
            ),
            ViolationKind::CyclicReferences => f.write_str("block is part of a reference cycle"),
            ViolationKind::ForgottenOutOfRange(h) => write!(f, "forgotten height {h} has no block"),
            ViolationKind::InvalidPending { to_chain, reason } => {
                write!(f, "pending association to {to_chain}: {reason}")
            }
        }
    }
}

/// Checks one chain in isolation. An empty result means the chain is intact.
pub fn verify_chain(chain: &Chain) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |height: Option<u64>, kind| {
        out.push(Violation {
            chain: chain.id.clone(),
            height,
            kind,
        })
    };
    let mut prev_recomputed: Option<Digest> = None;
    for (k, block) in chain.blocks.iter().enumerate() {
        let k = k as u64;
        let at = Some(k);
        if block.height != k {
            push(
                at,
                ViolationKind::HeightMismatch {
                    expected: k,
                    found: block.height,
                },
            );
        }
        if block.chain != chain.id {
            push(
                at,
                ViolationKind::WrongChain {
                    found: block.chain.clone(),
                },
            );
        }
        match prev_recomputed {
            None if !block.prev_hash.is_zero() => push(at, ViolationKind::GenesisPrevHash),
            Some(prev) if block.prev_hash != prev => push(at, ViolationKind::PrevHashMismatch),
            _ => {}
        }
        let recomputed = block.recompute_summary();
        if recomputed != block.summary_hash {
            push(
                at,
                ViolationKind::SummaryMismatch {
                    stored: block.summary_hash,
                    recomputed,
                },
            );
        }
        let mut seen = BTreeSet::new();
        for r in &block.accepted {
            if r.from_chain == chain.id {
                push(at, ViolationKind::SelfAssociation);
            } else if !seen.insert(r) {
                push(at, ViolationKind::DuplicateAssociation(r.clone()));
            }
        }
        prev_recomputed = Some(recomputed);
    }
    for &h in &chain.forgotten {
        if chain.block(h).is_none() {
            push(None, ViolationKind::ForgottenOutOfRange(h));
        }
    }
    out
}

/// Checks every chain, every cross-chain reference, every pending
/// association, and acyclicity of the reference graph.
pub fn verify_snapshot(snapshot: &NetworkSnapshot) -> Vec<Violation> {
    let mut out: Vec<Violation> = Vec::new();
    for (id, chain) in &snapshot.chains {
        if &chain.id != id {
            out.push(Violation {
                chain: id.clone(),
                height: None,
                kind: ViolationKind::WrongChain {
                    found: chain.id.clone(),
                },
            });
        }
        out.extend(verify_chain(chain));
    }

    let index = StoredHashIndex::new(snapshot);
    for (id, chain) in &snapshot.chains {
        for block in &chain.blocks {
            for r in &block.accepted {
                let kind = match index.get(&r.from_chain, &r.from_block_hash) {
                    None => ViolationKind::DanglingReference(r.clone()),
                    Some(h) => {
                        let target = &snapshot.chains[&r.from_chain].blocks[h];
                        if target.recompute_summary() == r.from_block_hash {
                            continue;
                        }
                        ViolationKind::ReferenceHashMismatch(r.clone())
                    }
                };
                out.push(Violation {
                    chain: id.clone(),
                    height: Some(block.height),
                    kind,
                });
            }
        }
    }

    for p in &snapshot.pending {
        let reason = if p.from_chain == p.to_chain {
            Some("sender and receiver are the same chain".to_owned())
        } else if !snapshot.chains.contains_key(&p.to_chain) {
            Some("unknown receiving chain".to_owned())
        } else if !snapshot.chains.contains_key(&p.from_chain) {
            Some(format!("unknown sending chain {}", p.from_chain))
        } else if index.get(&p.from_chain, &p.from_block_hash).is_none() {
            Some(format!(
                "hash {} not found on {}",
                p.from_block_hash, p.from_chain
            ))
        } else {
            None
        };
        if let Some(reason) = reason {
            out.push(Violation {
                chain: p.from_chain.clone(),
                height: None,
                kind: ViolationKind::InvalidPending {
                    to_chain: p.to_chain.clone(),
                    reason,
                },
            });
        }
    }

    out.extend(
        cycle_members(snapshot, &index)
            .into_iter()
            .map(|(chain, height)| Violation {
                chain,
                height: Some(height),
                kind: ViolationKind::CyclicReferences,
            }),
    );
    out
}

/// Maps (chain, stored summary hash) to height.
pub(crate) struct StoredHashIndex<'a> {
    map: HashMap<Digest, Vec<(&'a ChainId, usize)>>,
}

impl<'a> StoredHashIndex<'a> {
    pub(crate) fn new(snapshot: &'a NetworkSnapshot) -> Self {
        let mut map: HashMap<Digest, Vec<(&ChainId, usize)>> =
            HashMap::with_capacity(snapshot.block_count());
        for (id, chain) in &snapshot.chains {
            for (k, block) in chain.blocks.iter().enumerate() {
                map.entry(block.summary_hash).or_default().push((id, k));
            }
        }
        Self { map }
    }

    /// First block on `chain` carrying `hash`.
    pub(crate) fn get(&self, chain: &ChainId, hash: &Digest) -> Option<usize> {
        self.map
            .get(hash)?
            .iter()
            .find(|(c, _)| *c == chain)
            .map(|&(_, k)| k)
    }
}

/// Blocks that Kahn's algorithm cannot schedule: members of a cycle or
/// downstream of one.
fn cycle_members(snapshot: &NetworkSnapshot, index: &StoredHashIndex<'_>) -> Vec<(ChainId, u64)> {
    let mut offsets = HashMap::new();
    let mut nodes: Vec<(&ChainId, usize)> = Vec::with_capacity(snapshot.block_count());
    for (id, chain) in &snapshot.chains {
        offsets.insert(id, nodes.len());
        nodes.extend((0..chain.blocks.len()).map(|k| (id, k)));
    }
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut indegree = vec![0usize; nodes.len()];
    for (id, chain) in &snapshot.chains {
        let base = offsets[id];
        for (k, block) in chain.blocks.iter().enumerate() {
            let me = base + k;
            if k > 0 {
                succ[me - 1].push(me);
                indegree[me] += 1;
            }
            for r in &block.accepted {
                if let Some(h) = index.get(&r.from_chain, &r.from_block_hash) {
                    let src = offsets[&r.from_chain] + h;
                    succ[src].push(me);
                    indegree[me] += 1;
                }
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..nodes.len()).filter(|&n| indegree[n] == 0).collect();
    let mut done = vec![false; nodes.len()];
    while let Some(n) = queue.pop_front() {
        done[n] = true;
        for &m in &succ[n] {
            indegree[m] -= 1;
            if indegree[m] == 0 {
                queue.push_back(m);
            }
        }
    }
    nodes
        .iter()
        .zip(done)
        .filter(|(_, d)| !d)
        .map(|(&(id, k), _)| (id.clone(), k as u64))
        .collect()
}
