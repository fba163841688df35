//! Private hash chains and the association protocol.
//!
//! Every chain has a single owner that appends blocks to it. Chains interact
//! through associations: the sender shares the summary hash of its latest
//! block, and the receiver may package that hash into its next block. Only
//! the packaged (accepted) references carry ordering weight.

mod block;
mod digest;
mod verify;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use block::{canonical_encoding, hash_block, AssociationRef, Block};
pub use digest::{ChainId, Digest, DigestParseError, DIGEST_LEN};
pub use verify::{verify_chain, verify_snapshot, Violation, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("invalid chain id {0:?}: must be nonempty visible characters")]
    InvalidChainId(String),
    #[error("chain {0} already exists")]
    DuplicateChain(ChainId),
    #[error("duplicate association from {from_chain} ({from_block_hash})")]
    DuplicateAssociation {
        from_chain: ChainId,
        from_block_hash: Digest,
    },
    #[error("chain {0} cannot associate with itself")]
    SelfAssociation(ChainId),
    #[error("reference to {from_chain} ({from_block_hash}) does not resolve")]
    UnknownReference {
        from_chain: ChainId,
        from_block_hash: Digest,
    },
    #[error("unknown chain {0}")]
    UnknownChain(ChainId),
    #[error("chain {0} has no blocks")]
    EmptyChain(ChainId),
    #[error("chain {chain} has no block at height {height}")]
    UnknownBlock { chain: ChainId, height: u64 },
}

/// An association that has been sent but not yet packaged by the receiver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingAssociation {
    pub from_chain: ChainId,
    pub from_block_hash: Digest,
    pub to_chain: ChainId,
    pub sent_at: u64,
}

impl PendingAssociation {
    pub fn as_ref(&self) -> AssociationRef {
        AssociationRef::new(self.from_chain.clone(), self.from_block_hash)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub id: ChainId,
    pub blocks: Vec<Block>,
    /// Heights whose private payload has been discarded. Hashes stay.
    pub forgotten: BTreeSet<u64>,
}

impl Chain {
    pub fn new(id: ChainId) -> Self {
        Self {
            id,
            blocks: Vec::new(),
            forgotten: BTreeSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn latest(&self) -> Option<&Block> {
        self.blocks.last()
    }

    pub fn block(&self, height: u64) -> Option<&Block> {
        usize::try_from(height)
            .ok()
            .and_then(|h| self.blocks.get(h))
    }

    /// Appends a block on top of the current tip. References are only
    /// checked for duplicates and self-association here; resolving them
    /// against other chains is the snapshot's job.
    pub fn append(
        &mut self,
        payload_hash: Digest,
        accepted: Vec<AssociationRef>,
        local_timestamp: Option<u64>,
    ) -> Result<&Block, ChainError> {
        let prev_hash = self.latest().map_or(Digest::ZERO, |b| b.summary_hash);
        let block = Block::new(
            self.id.clone(),
            self.blocks.len() as u64,
            prev_hash,
            payload_hash,
            accepted,
            local_timestamp,
        )?;
        self.blocks.push(block);
        Ok(self.blocks.last().expect("just pushed"))
    }

    /// Marks the payload behind `height` as discarded. Idempotent.
    pub fn forget_payload(&mut self, height: u64) -> Result<(), ChainError> {
        if self.block(height).is_none() {
            return Err(ChainError::UnknownBlock {
                chain: self.id.clone(),
                height,
            });
        }
        self.forgotten.insert(height);
        Ok(())
    }

    /// Height of the block on this chain whose stored summary hash is `hash`.
    pub fn find(&self, hash: &Digest) -> Option<u64> {
        // References nearly always point at recent blocks.
        self.blocks
            .iter()
            .rev()
            .find(|b| &b.summary_hash == hash)
            .map(|b| b.height)
    }
}

/// All chains of a network at one instant plus in-flight associations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NetworkSnapshot {
    pub chains: BTreeMap<ChainId, Chain>,
    pub pending: Vec<PendingAssociation>,
}

impl NetworkSnapshot {
    pub fn new() -> Self {
        Self::default()
    }

    /// A snapshot holding one empty chain per id.
    pub fn with_chains<I>(ids: I) -> Result<Self, ChainError>
    where
        I: IntoIterator<Item = ChainId>,
    {
        let mut snapshot = Self::new();
        for id in ids {
            snapshot.add_chain(id)?;
        }
        Ok(snapshot)
    }

    pub fn add_chain(&mut self, id: ChainId) -> Result<&mut Chain, ChainError> {
        if self.chains.contains_key(&id) {
            return Err(ChainError::DuplicateChain(id));
        }
        Ok(self
            .chains
            .entry(id.clone())
            .or_insert_with(|| Chain::new(id)))
    }

    pub fn chain(&self, id: &ChainId) -> Result<&Chain, ChainError> {
        self.chains
            .get(id)
            .ok_or_else(|| ChainError::UnknownChain(id.clone()))
    }

    fn chain_mut(&mut self, id: &ChainId) -> Result<&mut Chain, ChainError> {
        self.chains
            .get_mut(id)
            .ok_or_else(|| ChainError::UnknownChain(id.clone()))
    }

    pub fn block_count(&self) -> usize {
        self.chains.values().map(Chain::len).sum()
    }

    /// The block an association reference points at, matched on the
    /// stored summary hash.
    pub fn resolve(&self, r: &AssociationRef) -> Option<&Block> {
        let chain = self.chains.get(&r.from_chain)?;
        chain.find(&r.from_block_hash).and_then(|h| chain.block(h))
    }

    /// Appends a block to `to`, packaging `accepted`. Every reference must
    /// resolve to an existing block, so a block can only point at blocks
    /// created before it.
    pub fn append_block(
        &mut self,
        to: &ChainId,
        payload_hash: Digest,
        accepted: Vec<AssociationRef>,
        local_timestamp: Option<u64>,
    ) -> Result<&Block, ChainError> {
        self.chain(to)?;
        if let Some(r) = accepted.iter().find(|r| self.resolve(r).is_none()) {
            // Self references are reported as such rather than as dangling.
            if &r.from_chain == to {
                return Err(ChainError::SelfAssociation(to.clone()));
            }
            return Err(ChainError::UnknownReference {
                from_chain: r.from_chain.clone(),
                from_block_hash: r.from_block_hash,
            });
        }
        self.chain_mut(to)?
            .append(payload_hash, accepted, local_timestamp)
    }

    /// `from` shares the summary hash of its latest block with `to`.
    pub fn send_association(
        &mut self,
        from: &ChainId,
        to: &ChainId,
        tick: u64,
    ) -> Result<PendingAssociation, ChainError> {
        if from == to {
            return Err(ChainError::SelfAssociation(from.clone()));
        }
        self.chain(to)?;
        let latest = self
            .chain(from)?
            .latest()
            .ok_or_else(|| ChainError::EmptyChain(from.clone()))?;
        let pending = PendingAssociation {
            from_chain: from.clone(),
            from_block_hash: latest.summary_hash,
            to_chain: to.clone(),
            sent_at: tick,
        };
        self.pending.push(pending.clone());
        Ok(pending)
    }

    /// Pending associations addressed to `to`, in arrival order.
    pub fn pending_for<'a>(
        &'a self,
        to: &'a ChainId,
    ) -> impl Iterator<Item = &'a PendingAssociation> + 'a {
        self.pending.iter().filter(move |p| &p.to_chain == to)
    }

    /// `to` creates its next block at `tick`, packaging every pending
    /// association addressed to it that was sent strictly before `tick`.
    /// Duplicate hashes collapse into one reference. Associations sent at
    /// `tick` or later stay pending.
    pub fn accept_pending(
        &mut self,
        to: &ChainId,
        payload_hash: Digest,
        tick: u64,
    ) -> Result<&Block, ChainError> {
        let refs: BTreeSet<AssociationRef> = self
            .pending
            .iter()
            .filter(|p| &p.to_chain == to && p.sent_at < tick)
            .map(PendingAssociation::as_ref)
            .collect();
        self.append_block(to, payload_hash, refs.into_iter().collect(), Some(tick))?;
        self.pending
            .retain(|p| !(&p.to_chain == to && p.sent_at < tick));
        Ok(self.chains[to].latest().expect("just appended"))
    }

    /// Discards every pending association addressed to `to`.
    pub fn drop_pending(&mut self, to: &ChainId) -> Result<usize, ChainError> {
        self.chain(to)?;
        let before = self.pending.len();
        self.pending.retain(|p| &p.to_chain != to);
        Ok(before - self.pending.len())
    }

    pub fn forget_payload(&mut self, chain: &ChainId, height: u64) -> Result<(), ChainError> {
        self.chain_mut(chain)?.forget_payload(height)
    }
}
