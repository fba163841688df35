//! The time order that emerges from accepted associations.
//!
//! Nothing here runs while blocks are created. Ordering is derived after
//! the fact from a snapshot: block creations become events, chain links and
//! accepted references become happens-before edges, and everything else
//! (comparability, admissible total orders, granularity) is read off that
//! graph.

mod certificate;
mod dag;
mod extensions;
mod metrics;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainId, Violation};

pub use certificate::{check_certificate, order_certificate, Certificate, CertificateError};
pub use dag::{build_dag, build_dag_unchecked, Edge, EdgeKind, HappensBeforeDag};
pub use extensions::{
    canonical_order, count_linear_extensions, count_linear_extensions_bounded,
    has_unique_extension, linear_extensions, linear_extensions_with, Enumeration, LinearExtension,
    DEFAULT_COUNT_BOUND, MAX_COUNT_BOUND,
};
pub use metrics::{
    comparability_ratio, granularity, mainstream_score, ChainGranularity, GranularityReport,
    HeightWindow,
};

/// The creation of block `height` on `chain`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventId {
    pub chain: ChainId,
    pub height: u64,
}

impl EventId {
    pub fn new(chain: ChainId, height: u64) -> Self {
        Self { chain, height }
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chain, self.height)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("expected chain:height, got {0:?}")]
pub struct EventIdParseError(pub String);

impl FromStr for EventId {
    type Err = EventIdParseError;

    /// Parses `chain:height`. The height is taken after the last colon, so
    /// chain ids may themselves contain colons.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || EventIdParseError(s.to_owned());
        let (chain, height) = s.rsplit_once(':').ok_or_else(err)?;
        let chain = ChainId::new(chain).map_err(|_| err())?;
        let height = height.parse().map_err(|_| err())?;
        Ok(Self { chain, height })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderRelation {
    Before,
    After,
    Concurrent,
    Equal,
}

impl OrderRelation {
    pub fn inverse(self) -> Self {
        match self {
            OrderRelation::Before => OrderRelation::After,
            OrderRelation::After => OrderRelation::Before,
            other => other,
        }
    }
}

impl fmt::Display for OrderRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderRelation::Before => "before",
            OrderRelation::After => "after",
            OrderRelation::Concurrent => "concurrent",
            OrderRelation::Equal => "equal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrderError {
    #[error("snapshot failed verification ({} violations)", .0.len())]
    InvalidSnapshot(Vec<Violation>),
    #[error("reference cycle among {} events", .0.len())]
    CyclicReferences(Vec<EventId>),
    #[error("block {at} references a block on {from_chain} that does not exist")]
    DanglingReference { at: EventId, from_chain: ChainId },
    #[error("unknown event {0}")]
    UnknownEvent(EventId),
    #[error("{nodes} events exceed the exact-counting bound of {bound}")]
    TooLarge { nodes: usize, bound: usize },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
}

/// Relation between `a` and `b` in `dag`.
pub fn precedes(
    dag: &HappensBeforeDag,
    a: &EventId,
    b: &EventId,
) -> Result<OrderRelation, OrderError> {
    dag.precedes(a, b)
}
