use crate::chain::{AssociationRef, NetworkSnapshot};

use super::{EventId, HappensBeforeDag, OrderError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// `a`, ..., `b`; each hop is a chain link or an accepted association.
    Path(Vec<EventId>),
    NotOrdered,
}

/// An explicit trace showing that `a` happened before `b`.
///
/// Walks forward from `a`, always stepping to the smallest successor that
/// still reaches `b`. Any pair that is not strictly ordered from `a` to `b`
/// yields [`Certificate::NotOrdered`].
pub fn order_certificate(
    dag: &HappensBeforeDag,
    a: &EventId,
    b: &EventId,
) -> Result<Certificate, OrderError> {
    let from = dag.index_of(a)?;
    let to = dag.index_of(b)?;
    if !dag.reaches(from, to) {
        return Ok(Certificate::NotOrdered);
    }
    let mut path = vec![a.clone()];
    let mut at = from;
    while at != to {
        at = dag
            .successors(at)
            .iter()
            .copied()
            .find(|&s| s == to || dag.reaches(s, to))
            .expect("a node that reaches the target has a successor that does too");
        path.push(dag.node(at).clone());
    }
    Ok(Certificate::Path(path))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("empty path")]
    Empty,
    #[error("event {0} is not in the snapshot")]
    UnknownEvent(EventId),
    #[error("hop {from} -> {to} is neither a chain link nor an accepted association")]
    BrokenHop { from: EventId, to: EventId },
}

/// Re-checks a certificate against the snapshot's hashes, independently of
/// any DAG: every hop must be `(X, k) -> (X, k + 1)` with a matching
/// prev_hash, or a block whose accepted list contains the recomputed
/// summary hash of the previous event's block.
pub fn check_certificate(
    snapshot: &NetworkSnapshot,
    path: &[EventId],
) -> Result<(), CertificateError> {
    let block = |e: &EventId| {
        snapshot
            .chains
            .get(&e.chain)
            .and_then(|c| c.block(e.height))
            .ok_or_else(|| CertificateError::UnknownEvent(e.clone()))
    };
    let first = path.first().ok_or(CertificateError::Empty)?;
    block(first)?;
    for hop in path.windows(2) {
        let (src, dst) = (block(&hop[0])?, block(&hop[1])?);
        let source_hash = src.recompute_summary();
        let linked = if hop[0].chain == hop[1].chain {
            dst.height == src.height + 1 && dst.prev_hash == source_hash
        } else {
            dst.accepted
                .contains(&AssociationRef::new(src.chain.clone(), source_hash))
        };
        if !linked {
            return Err(CertificateError::BrokenHop {
                from: hop[0].clone(),
                to: hop[1].clone(),
            });
        }
    }
    Ok(())
}
