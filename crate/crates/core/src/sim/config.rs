use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::chain::ChainId;

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    FixedRule,
    Autonomous,
}

/// One action of a periodic schedule. An action with phase `p` fires on
/// every tick `t` with `t % period == p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ScheduleEntry {
    /// `chain` creates a block, packaging its eligible pending associations.
    Create { phase: u64, chain: ChainId },
    /// `from` sends its latest block hash to `to`. Skipped while `from`
    /// has no blocks.
    Send {
        phase: u64,
        from: ChainId,
        to: ChainId,
    },
    /// `chain` declines everything pending for it.
    Drop { phase: u64, chain: ChainId },
}

impl ScheduleEntry {
    pub fn phase(&self) -> u64 {
        match self {
            ScheduleEntry::Create { phase, .. }
            | ScheduleEntry::Send { phase, .. }
            | ScheduleEntry::Drop { phase, .. } => *phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedRule {
    pub period: u64,
    pub schedule: Vec<ScheduleEntry>,
}

impl FixedRule {
    /// Each chain in turn creates a block and, one tick later, sends it to
    /// the next chain in the ring. Creations are two ticks apart, which is
    /// the shortest spacing that lets every block see its predecessor.
    pub fn ring(order: &[ChainId]) -> Self {
        let n = order.len() as u64;
        let mut schedule = Vec::new();
        for (i, chain) in order.iter().enumerate() {
            let i = i as u64;
            schedule.push(ScheduleEntry::Create {
                phase: 2 * i,
                chain: chain.clone(),
            });
            if n > 1 {
                let next = order[((i + 1) % n) as usize].clone();
                schedule.push(ScheduleEntry::Send {
                    phase: 2 * i + 1,
                    from: chain.clone(),
                    to: next,
                });
            }
        }
        Self {
            period: 2 * n.max(1),
            schedule,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartnerChoice {
    #[default]
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autonomous {
    /// Per-tick probability that a chain creates a block (and then sends
    /// its new hash to a partner).
    pub block_prob: BTreeMap<ChainId, f64>,
    #[serde(default)]
    pub partner: PartnerChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub chains: Vec<ChainId>,
    pub ticks: u64,
    pub seed: u64,
    pub policy: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_rule: Option<FixedRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub autonomous: Option<Autonomous>,
}

impl SimConfig {
    pub fn fixed_rule(chains: Vec<ChainId>, ticks: u64, rule: FixedRule) -> Self {
        Self {
            chains,
            ticks,
            seed: 0,
            policy: PolicyKind::FixedRule,
            fixed_rule: Some(rule),
            autonomous: None,
        }
    }

    /// Autonomous policy with the same block probability on every chain.
    pub fn autonomous(chains: Vec<ChainId>, ticks: u64, seed: u64, block_prob: f64) -> Self {
        let block_prob = chains.iter().map(|c| (c.clone(), block_prob)).collect();
        Self {
            chains,
            ticks,
            seed,
            policy: PolicyKind::Autonomous,
            fixed_rule: None,
            autonomous: Some(Autonomous {
                block_prob,
                partner: PartnerChoice::UniformRandom,
            }),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.ticks == 0 {
            return bad("ticks must be at least 1".into());
        }
        let known: BTreeSet<&ChainId> = self.chains.iter().collect();
        if known.len() != self.chains.len() {
            return bad("chain ids must be unique".into());
        }
        let unknown = |c: &ChainId| !known.contains(c);
        match (self.policy, &self.fixed_rule, &self.autonomous) {
            (PolicyKind::FixedRule, Some(rule), None) => {
                if rule.period == 0 {
                    return bad("fixed_rule.period must be at least 1".into());
                }
                for entry in &rule.schedule {
                    if entry.phase() >= rule.period {
                        return bad(format!(
                            "phase {} is outside period {}",
                            entry.phase(),
                            rule.period
                        ));
                    }
                    match entry {
                        ScheduleEntry::Create { chain, .. } | ScheduleEntry::Drop { chain, .. }
                            if unknown(chain) =>
                        {
                            return bad(format!("schedule names unknown chain {chain}"));
                        }
                        ScheduleEntry::Send { from, to, .. } => {
                            if unknown(from) || unknown(to) {
                                return bad(format!(
                                    "schedule send {from} -> {to} names an unknown chain"
                                ));
                            }
                            if from == to {
                                return bad(format!(
                                    "schedule send {from} -> {to} is a self-association"
                                ));
                            }
                        }
                        _ => {}
                    }
                }
            }
            (PolicyKind::Autonomous, None, Some(auto)) => {
                for (chain, p) in &auto.block_prob {
                    if unknown(chain) {
                        return bad(format!("block_prob names unknown chain {chain}"));
                    }
                    if !(0.0..=1.0).contains(p) {
                        return bad(format!("block_prob for {chain} is {p}, outside [0, 1]"));
                    }
                }
                if let Some(missing) = self
                    .chains
                    .iter()
                    .find(|c| !auto.block_prob.contains_key(c))
                {
                    return bad(format!("block_prob has no entry for {missing}"));
                }
            }
            (policy, _, _) => {
                return bad(format!(
                    "policy {policy:?} needs exactly its own section (fixed_rule or autonomous)"
                ));
            }
        }
        Ok(())
    }
}
