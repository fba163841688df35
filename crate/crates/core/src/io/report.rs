//! JSON report documents written by the CLI.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::Serialize;

use crate::chain::{ChainId, Violation};
use crate::order::{EventId, GranularityReport, LinearExtension};

use super::FORMAT_VERSION;

/// An exact rational with a decimal convenience value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalDoc {
    pub numerator: u64,
    pub denominator: u64,
    pub decimal: f64,
}

impl From<Ratio<u64>> for RationalDoc {
    fn from(r: Ratio<u64>) -> Self {
        Self {
            numerator: *r.numer(),
            denominator: *r.denom(),
            decimal: *r.numer() as f64 / *r.denom() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainGranularityDoc {
    pub chain: ChainId,
    pub block_count: u64,
    pub mean_interval: Option<RationalDoc>,
    pub max_interval: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GranularityDoc {
    pub comparability_ratio: RationalDoc,
    pub per_chain: Vec<ChainGranularityDoc>,
}

impl From<&GranularityReport> for GranularityDoc {
    fn from(report: &GranularityReport) -> Self {
        Self {
            comparability_ratio: report.comparability_ratio.into(),
            per_chain: report
                .per_chain
                .iter()
                .map(|(chain, g)| ChainGranularityDoc {
                    chain: chain.clone(),
                    block_count: g.block_count,
                    mean_interval: g.mean_interval.map(Into::into),
                    max_interval: g.max_interval,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreDoc {
    pub chain: ChainId,
    pub score: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub format_version: u32,
    pub kind: &'static str,
    pub events: usize,
    pub granularity: GranularityDoc,
    pub mainstream: Vec<ScoreDoc>,
    /// Decimal string; `None` when the network is too large to count.
    pub linear_extension_count: Option<String>,
}

impl MetricsReport {
    pub fn new(
        events: usize,
        granularity: &GranularityReport,
        mainstream: &BTreeMap<ChainId, u64>,
        linear_extension_count: Option<String>,
    ) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "metrics",
            events,
            granularity: granularity.into(),
            mainstream: mainstream
                .iter()
                .map(|(chain, &score)| ScoreDoc {
                    chain: chain.clone(),
                    score,
                })
                .collect(),
            linear_extension_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OrderBody {
    Canonical {
        extension: LinearExtension,
    },
    Enumerate {
        limit: usize,
        complete: bool,
        /// Extensions seen; `limit + 1` when enumeration overflowed.
        found: usize,
        extensions: Vec<LinearExtension>,
    },
    Count {
        count: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub format_version: u32,
    pub kind: &'static str,
    #[serde(flatten)]
    pub body: OrderBody,
}

impl OrderReport {
    pub fn new(body: OrderBody) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "order",
            body,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationDoc {
    pub chain: ChainId,
    pub height: Option<u64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub format_version: u32,
    pub kind: &'static str,
    pub ok: bool,
    pub violations: Vec<ViolationDoc>,
}

impl VerifyReport {
    pub fn new(violations: &[Violation]) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "verify",
            ok: violations.is_empty(),
            violations: violations
                .iter()
                .map(|v| ViolationDoc {
                    chain: v.chain.clone(),
                    height: v.height,
                    message: v.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub format_version: u32,
    pub kind: &'static str,
    pub from: EventId,
    pub to: EventId,
    pub relation: String,
    /// Present only when `from` happened before `to`.
    pub path: Option<Vec<EventId>>,
}

impl CertificateReport {
    pub fn new(from: EventId, to: EventId, relation: String, path: Option<Vec<EventId>>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: "certificate",
            from,
            to,
            relation,
            path,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("reports serialize");
    out.push('\n');
    out
}
