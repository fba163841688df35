use std::collections::{BTreeSet, HashSet};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::chain::{
    verify_snapshot, AssociationRef, Block, Chain, ChainId, Digest, NetworkSnapshot,
    PendingAssociation,
};
use crate::sim::{SimConfig, SimTrace};

use super::{LoadError, FORMAT_VERSION};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotDoc {
    format_version: u32,
    chains: Vec<ChainDoc>,
    pending: Vec<PendingAssociation>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainDoc {
    id: ChainId,
    blocks: Vec<BlockDoc>,
    #[serde(default)]
    forgotten: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockDoc {
    height: u64,
    prev_hash: Digest,
    payload_hash: Digest,
    accepted: Vec<AssociationRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    local_timestamp: Option<u64>,
    /// Optional on input; recomputed from the other fields when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    summary_hash: Option<Digest>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceDoc {
    format_version: u32,
    events: SimTrace,
}

fn to_pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory documents serialize");
    out.push(b'\n');
    out
}

/// Canonical JSON for a snapshot. Equal snapshots give equal bytes.
pub fn save_snapshot(snapshot: &NetworkSnapshot) -> Vec<u8> {
    let doc = SnapshotDoc {
        format_version: FORMAT_VERSION,
        chains: snapshot
            .chains
            .values()
            .map(|chain| ChainDoc {
                id: chain.id.clone(),
                blocks: chain
                    .blocks
                    .iter()
                    .map(|b| BlockDoc {
                        height: b.height,
                        prev_hash: b.prev_hash,
                        payload_hash: b.payload_hash,
                        accepted: b.accepted.clone(),
                        local_timestamp: b.local_timestamp,
                        summary_hash: Some(b.summary_hash),
                    })
                    .collect(),
                forgotten: chain.forgotten.iter().copied().collect(),
            })
            .collect(),
        pending: snapshot.pending.clone(),
    };
    to_pretty(&doc)
}

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Run `verify_snapshot` after parsing.
    pub verify: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { verify: true }
    }
}

/// Parses and (by default) verifies a snapshot document.
pub fn load_snapshot(bytes: &[u8], options: LoadOptions) -> Result<NetworkSnapshot, LoadError> {
    let doc: SnapshotDoc = parse(bytes)?;
    check_version(doc.format_version)?;
    let mut snapshot = NetworkSnapshot::new();
    let mut seen = HashSet::new();
    for (ci, chain_doc) in doc.chains.into_iter().enumerate() {
        if !seen.insert(chain_doc.id.clone()) {
            return Err(LoadError::Parse {
                path: format!("chains[{ci}].id"),
                line: 0,
                column: 0,
                message: format!("duplicate chain id {}", chain_doc.id),
            });
        }
        let mut chain = Chain::new(chain_doc.id.clone());
        for block_doc in chain_doc.blocks {
            let mut block = Block {
                chain: chain_doc.id.clone(),
                height: block_doc.height,
                prev_hash: block_doc.prev_hash,
                payload_hash: block_doc.payload_hash,
                accepted: block_doc.accepted,
                local_timestamp: block_doc.local_timestamp,
                summary_hash: Digest::ZERO,
            };
            block.summary_hash = block_doc
                .summary_hash
                .unwrap_or_else(|| block.recompute_summary());
            chain.blocks.push(block);
        }
        chain.forgotten = chain_doc.forgotten.into_iter().collect::<BTreeSet<_>>();
        snapshot.chains.insert(chain.id.clone(), chain);
    }
    snapshot.pending = doc.pending;
    if options.verify {
        let violations = verify_snapshot(&snapshot);
        if !violations.is_empty() {
            return Err(LoadError::InvalidSnapshot(violations));
        }
    }
    Ok(snapshot)
}

pub fn save_trace(trace: &SimTrace) -> Vec<u8> {
    to_pretty(&TraceDoc {
        format_version: FORMAT_VERSION,
        events: trace.clone(),
    })
}

pub fn load_trace(bytes: &[u8]) -> Result<SimTrace, LoadError> {
    let doc: TraceDoc = parse(bytes)?;
    check_version(doc.format_version)?;
    Ok(doc.events)
}

pub fn save_config(config: &SimConfig) -> Vec<u8> {
    to_pretty(config)
}

/// Parses a simulation config. Semantic checks happen in `SimConfig::validate`.
pub fn load_config(bytes: &[u8]) -> Result<SimConfig, LoadError> {
    parse(bytes)
}

fn check_version(found: u32) -> Result<(), LoadError> {
    if found == FORMAT_VERSION {
        Ok(())
    } else {
        Err(LoadError::UnsupportedVersion(found))
    }
}

fn parse<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, LoadError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        LoadError::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    Ok(value)
}
