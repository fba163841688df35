//! Blocks and their canonical encoding.
//!
//! The summary hash of a block is SHA-256 over this byte layout:
//!
//! ```text
//! u32be len(chain) || chain utf-8
//! u64be height
//! prev_hash    (32 bytes)
//! payload_hash (32 bytes)
//! u32be count(accepted)
//! for each ref, sorted by (chain bytes, hash bytes):
//!     u32be len(from_chain) || from_chain utf-8 || from_block_hash (32 bytes)
//! ```
//!
//! `local_timestamp` is not part of the encoding.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use super::{ChainError, ChainId, Digest};

/// An accepted cross-chain reference: the summary hash of one block on
/// another chain, packaged into a block of the accepting chain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AssociationRef {
    pub from_chain: ChainId,
    pub from_block_hash: Digest,
}

impl AssociationRef {
    pub fn new(from_chain: ChainId, from_block_hash: Digest) -> Self {
        Self {
            from_chain,
            from_block_hash,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub chain: ChainId,
    pub height: u64,
    pub prev_hash: Digest,
    pub payload_hash: Digest,
    /// Sorted ascending, no duplicates, no references to `chain` itself.
    pub accepted: Vec<AssociationRef>,
    /// Untrusted decoration. Never hashed, never read by ordering.
    pub local_timestamp: Option<u64>,
    /// The hash this block claims for itself. Honest blocks have
    /// `summary_hash == recompute_summary()`.
    pub summary_hash: Digest,
}

impl Block {
    /// Builds a block and computes its summary hash. `accepted` is
    /// normalized into canonical order.
    pub fn new(
        chain: ChainId,
        height: u64,
        prev_hash: Digest,
        payload_hash: Digest,
        mut accepted: Vec<AssociationRef>,
        local_timestamp: Option<u64>,
    ) -> Result<Self, ChainError> {
        let summary_hash = hash_block(&chain, height, &prev_hash, &payload_hash, &accepted)?;
        accepted.sort();
        Ok(Self {
            chain,
            height,
            prev_hash,
            payload_hash,
            accepted,
            local_timestamp,
            summary_hash,
        })
    }

    /// Hash of the block's current field values, ignoring the stored
    /// `summary_hash`. Duplicate or self references are encoded as-is so
    /// that a tampered block still gets a (mismatching) digest.
    pub fn recompute_summary(&self) -> Digest {
        let mut refs: Vec<&AssociationRef> = self.accepted.iter().collect();
        refs.sort();
        digest_encoding(
            &self.chain,
            self.height,
            &self.prev_hash,
            &self.payload_hash,
            &refs,
        )
    }

    pub fn is_genesis(&self) -> bool {
        self.height == 0
    }
}

/// Summary hash of a block with the given fields.
pub fn hash_block(
    chain: &ChainId,
    height: u64,
    prev_hash: &Digest,
    payload_hash: &Digest,
    accepted: &[AssociationRef],
) -> Result<Digest, ChainError> {
    check_accepted(chain, accepted)?;
    let mut refs: Vec<&AssociationRef> = accepted.iter().collect();
    refs.sort();
    Ok(digest_encoding(
        chain,
        height,
        prev_hash,
        payload_hash,
        &refs,
    ))
}

/// Canonical byte encoding; see the module docs for the layout.
pub fn canonical_encoding(
    chain: &ChainId,
    height: u64,
    prev_hash: &Digest,
    payload_hash: &Digest,
    accepted: &[AssociationRef],
) -> Result<Vec<u8>, ChainError> {
    check_accepted(chain, accepted)?;
    let mut refs: Vec<&AssociationRef> = accepted.iter().collect();
    refs.sort();
    let mut out = Vec::new();
    write_encoding(&mut out, chain, height, prev_hash, payload_hash, &refs);
    Ok(out)
}

fn check_accepted(chain: &ChainId, accepted: &[AssociationRef]) -> Result<(), ChainError> {
    let mut seen = BTreeSet::new();
    for r in accepted {
        if &r.from_chain == chain {
            return Err(ChainError::SelfAssociation(chain.clone()));
        }
        if !seen.insert(r) {
            return Err(ChainError::DuplicateAssociation {
                from_chain: r.from_chain.clone(),
                from_block_hash: r.from_block_hash,
            });
        }
    }
    Ok(())
}

fn digest_encoding(
    chain: &ChainId,
    height: u64,
    prev_hash: &Digest,
    payload_hash: &Digest,
    sorted_refs: &[&AssociationRef],
) -> Digest {
    let mut hasher = HashSink(Sha256::new());
    write_encoding(
        &mut hasher,
        chain,
        height,
        prev_hash,
        payload_hash,
        sorted_refs,
    );
    Digest::from_bytes(hasher.0.finalize().into())
}

trait Sink {
    fn put(&mut self, bytes: &[u8]);
}

impl Sink for Vec<u8> {
    fn put(&mut self, bytes: &[u8]) {
        self.extend_from_slice(bytes);
    }
}

struct HashSink(Sha256);

impl Sink for HashSink {
    fn put(&mut self, bytes: &[u8]) {
        self.0.update(bytes);
    }
}

fn put_chain_id(out: &mut impl Sink, id: &ChainId) {
    let bytes = id.as_str().as_bytes();
    let len = u32::try_from(bytes.len()).expect("chain id longer than u32::MAX bytes");
    out.put(&len.to_be_bytes());
    out.put(bytes);
}

fn write_encoding(
    out: &mut impl Sink,
    chain: &ChainId,
    height: u64,
    prev_hash: &Digest,
    payload_hash: &Digest,
    sorted_refs: &[&AssociationRef],
) {
    put_chain_id(out, chain);
    out.put(&height.to_be_bytes());
    out.put(prev_hash.as_bytes());
    out.put(payload_hash.as_bytes());
    let count = u32::try_from(sorted_refs.len()).expect("more than u32::MAX references");
    out.put(&count.to_be_bytes());
    for r in sorted_refs {
        put_chain_id(out, &r.from_chain);
        out.put(r.from_block_hash.as_bytes());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> ChainId {
        ChainId::new(s).unwrap()
    }

    fn hex(s: &str) -> Digest {
        s.parse().unwrap()
    }

    // Golden values produced by an independent script (Python hashlib +
    // struct packing) implementing the byte layout above.
    const A0: &str = "8aa40940383f72a9faa304749b24215833b2f631f09ebd970bb062eebeb66fb4";
    const A1: &str = "e7a2a0dfb184d06f3f943d4b3670e5c00187871fd97e96fceddffedae836c975";
    const B0: &str = "6293b0f9be2e61eef0a3e2e73b4997ec8d8b265e0a737fc273bc27494a305492";
    const B1: &str = "4b90a944df533207e3f3244bbb77982d2784a894af4fd5c5c10efdc1e231bfa6";
    const C0: &str = "4f93471200ff88e925e515460847d33771ec03618e7c222b9537fc5b3a6b570f";

    #[test]
    fn genesis_golden() {
        let d = hash_block(&id("A"), 0, &Digest::ZERO, &Digest::of(b"p0"), &[]).unwrap();
        assert_eq!(d, hex(A0));
    }

    #[test]
    fn linked_and_referencing_golden() {
        let a1 = hash_block(&id("A"), 1, &hex(A0), &Digest::of(b"p1"), &[]).unwrap();
        assert_eq!(a1, hex(A1));
        let b0 = hash_block(&id("B"), 0, &Digest::ZERO, &Digest::of(b"q0"), &[]).unwrap();
        assert_eq!(b0, hex(B0));
        let refs = [AssociationRef::new(id("A"), a1)];
        let b1 = hash_block(&id("B"), 1, &b0, &Digest::of(b"q1"), &refs).unwrap();
        assert_eq!(b1, hex(B1));
    }

    #[test]
    fn ref_order_does_not_matter() {
        let refs = vec![
            AssociationRef::new(id("B"), hex(B0)),
            AssociationRef::new(id("A"), hex(A0)),
        ];
        let d = hash_block(&id("C"), 0, &Digest::ZERO, &Digest::of(b"r0"), &refs).unwrap();
        assert_eq!(d, hex(C0));
        let block = Block::new(id("C"), 0, Digest::ZERO, Digest::of(b"r0"), refs, None).unwrap();
        assert_eq!(block.accepted[0].from_chain, id("A"));
        assert_eq!(block.recompute_summary(), hex(C0));
    }

    #[test]
    fn encoding_layout() {
        let enc = canonical_encoding(&id("AB"), 258, &Digest::ZERO, &Digest::ZERO, &[]).unwrap();
        assert_eq!(enc.len(), 4 + 2 + 8 + 32 + 32 + 4);
        assert_eq!(&enc[..6], &[0, 0, 0, 2, b'A', b'B']);
        assert_eq!(&enc[6..14], &[0, 0, 0, 0, 0, 0, 1, 2]);
    }

    #[test]
    fn deterministic_and_sensitive() {
        let payload = Digest::of(b"p0");
        let a = hash_block(&id("A"), 0, &Digest::ZERO, &payload, &[]).unwrap();
        let b = hash_block(&id("A"), 0, &Digest::ZERO, &payload, &[]).unwrap();
        assert_eq!(a, b);
        let mut flipped = payload;
        flipped.as_bytes_mut()[7] ^= 0x01;
        let c = hash_block(&id("A"), 0, &Digest::ZERO, &flipped, &[]).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn timestamp_not_hashed() {
        let a = Block::new(id("A"), 0, Digest::ZERO, Digest::of(b"p0"), vec![], Some(5)).unwrap();
        let b = Block::new(id("A"), 0, Digest::ZERO, Digest::of(b"p0"), vec![], None).unwrap();
        assert_eq!(a.summary_hash, b.summary_hash);
    }

    #[test]
    fn rejects_duplicates_and_self() {
        let r = AssociationRef::new(id("A"), hex(A0));
        let err = hash_block(
            &id("B"),
            0,
            &Digest::ZERO,
            &Digest::ZERO,
            &[r.clone(), r.clone()],
        );
        assert!(matches!(err, Err(ChainError::DuplicateAssociation { .. })));
        let err = hash_block(&id("A"), 1, &hex(A0), &Digest::ZERO, &[r]);
        assert!(matches!(err, Err(ChainError::SelfAssociation(_))));
    }
}
