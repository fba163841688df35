//! Deterministic discrete-event simulation of a network of private chains.
//!
//! Time advances in integer ticks. Within a tick chains act in id order,
//! and an association sent at tick `t` can only be packaged at a tick
//! after `t`. Two regimes are supported: a fixed periodic schedule and
//! autonomous chains that act at random with per-chain probabilities.

mod config;
mod rng;
mod run;
pub mod scenarios;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainError, ChainId};
use crate::order::EventId;

pub use config::{Autonomous, FixedRule, PartnerChoice, PolicyKind, ScheduleEntry, SimConfig};
pub use rng::SimRng;
pub use run::{replay, run, run_with_progress, sim_payload};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid trace at event {index}: {reason}")]
    InvalidTrace { index: usize, reason: String },
    #[error(transparent)]
    Chain(#[from] ChainError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimEvent {
    /// An empty chain joins the network.
    ChainOpened { tick: u64, chain: ChainId },
    BlockCreated {
        tick: u64,
        chain: ChainId,
        height: u64,
    },
    AssociationSent {
        tick: u64,
        from: ChainId,
        to: ChainId,
    },
    /// Emitted just before the `BlockCreated` of the accepting block, once
    /// per distinct reference it packages.
    AssociationAccepted {
        tick: u64,
        to: ChainId,
        from: ChainId,
        from_height: u64,
    },
    AssociationDropped {
        tick: u64,
        to: ChainId,
        from: ChainId,
    },
}

impl SimEvent {
    pub fn tick(&self) -> u64 {
        match self {
            SimEvent::ChainOpened { tick, .. }
            | SimEvent::BlockCreated { tick, .. }
            | SimEvent::AssociationSent { tick, .. }
            | SimEvent::AssociationAccepted { tick, .. }
            | SimEvent::AssociationDropped { tick, .. } => *tick,
        }
    }
}

/// Audit log of a run, in execution order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimTrace(pub Vec<SimEvent>);

impl SimTrace {
    pub fn events(&self) -> &[SimEvent] {
        &self.0
    }

    /// The order in which blocks were really created.
    pub fn ground_truth_order(&self) -> Vec<EventId> {
        ground_truth_order(self)
    }
}

/// Block creations in trace order.
pub fn ground_truth_order(trace: &SimTrace) -> Vec<EventId> {
    trace
        .0
        .iter()
        .filter_map(|e| match e {
            SimEvent::BlockCreated { chain, height, .. } => {
                Some(EventId::new(chain.clone(), *height))
            }
            _ => None,
        })
        .collect()
}
