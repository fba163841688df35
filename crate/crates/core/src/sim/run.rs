use std::collections::{BTreeMap, BTreeSet};

use crate::chain::{AssociationRef, ChainId, Digest, NetworkSnapshot};

use super::{PolicyKind, ScheduleEntry, SimConfig, SimError, SimEvent, SimRng, SimTrace};

/// Payload hash of a simulated block. Derived from the creation event so a
/// trace alone is enough to rebuild the snapshot.
pub fn sim_payload(chain: &ChainId, height: u64, tick: u64) -> Digest {
    Digest::of(format!("sim-payload:{chain}:{height}:{tick}").as_bytes())
}

struct Sim {
    snapshot: NetworkSnapshot,
    trace: Vec<SimEvent>,
}

impl Sim {
    fn create(&mut self, chain: &ChainId, tick: u64) -> Result<(), SimError> {
        let height = self.snapshot.chain(chain)?.len() as u64;
        let accepted = self
            .snapshot
            .accept_pending(chain, sim_payload(chain, height, tick), tick)?
            .accepted
            .clone();
        for r in &accepted {
            let from_height = self
                .snapshot
                .resolve(r)
                .expect("accepted references resolve")
                .height;
            self.trace.push(SimEvent::AssociationAccepted {
                tick,
                to: chain.clone(),
                from: r.from_chain.clone(),
                from_height,
            });
        }
        self.trace.push(SimEvent::BlockCreated {
            tick,
            chain: chain.clone(),
            height,
        });
        Ok(())
    }

    fn send(&mut self, from: &ChainId, to: &ChainId, tick: u64) -> Result<(), SimError> {
        self.snapshot.send_association(from, to, tick)?;
        self.trace.push(SimEvent::AssociationSent {
            tick,
            from: from.clone(),
            to: to.clone(),
        });
        Ok(())
    }

    fn drop_all(&mut self, chain: &ChainId, tick: u64) -> Result<(), SimError> {
        let senders: Vec<ChainId> = self
            .snapshot
            .pending_for(chain)
            .map(|p| p.from_chain.clone())
            .collect();
        self.snapshot.drop_pending(chain)?;
        self.trace.extend(
            senders
                .into_iter()
                .map(|from| SimEvent::AssociationDropped {
                    tick,
                    to: chain.clone(),
                    from,
                }),
        );
        Ok(())
    }
}

/// Runs a simulation. Same config, same snapshot and trace.
pub fn run(config: &SimConfig) -> Result<(NetworkSnapshot, SimTrace), SimError> {
    run_with_progress(config, |_| {})
}

/// Like [`run`], calling `progress` after every completed tick.
pub fn run_with_progress<F>(
    config: &SimConfig,
    mut progress: F,
) -> Result<(NetworkSnapshot, SimTrace), SimError>
where
    F: FnMut(u64),
{
    config.validate()?;
    let chains: Vec<ChainId> = config
        .chains
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut sim = Sim {
        snapshot: NetworkSnapshot::with_chains(chains.iter().cloned())?,
        trace: chains
            .iter()
            .map(|c| SimEvent::ChainOpened {
                tick: 0,
                chain: c.clone(),
            })
            .collect(),
    };
    let mut rng = SimRng::new(config.seed);

    for tick in 0..config.ticks {
        match config.policy {
            PolicyKind::FixedRule => {
                let rule = config.fixed_rule.as_ref().expect("validated");
                let phase = tick % rule.period;
                let mut sends = Vec::new();
                let mut drops = BTreeSet::new();
                let mut creates = BTreeSet::new();
                for entry in rule.schedule.iter().filter(|e| e.phase() == phase) {
                    match entry {
                        ScheduleEntry::Send { from, to, .. } => sends.push((from, to)),
                        ScheduleEntry::Drop { chain, .. } => {
                            drops.insert(chain);
                        }
                        ScheduleEntry::Create { chain, .. } => {
                            creates.insert(chain);
                        }
                    }
                }
                sends.sort();
                for (from, to) in sends {
                    if !sim.snapshot.chain(from)?.is_empty() {
                        sim.send(from, to, tick)?;
                    }
                }
                for chain in drops {
                    sim.drop_all(chain, tick)?;
                }
                for chain in creates {
                    sim.create(chain, tick)?;
                }
            }
            PolicyKind::Autonomous => {
                let auto = config.autonomous.as_ref().expect("validated");
                for chain in &chains {
                    // One draw per chain per tick, always, so the stream
                    // does not depend on the probabilities.
                    let u = rng.next_unit();
                    if u >= auto.block_prob[chain] {
                        continue;
                    }
                    sim.create(chain, tick)?;
                    let others: Vec<&ChainId> = chains.iter().filter(|c| *c != chain).collect();
                    if !others.is_empty() {
                        let partner = others[rng.below(others.len() as u64) as usize];
                        sim.send(chain, partner, tick)?;
                    }
                }
            }
        }
        progress(tick);
    }
    Ok((sim.snapshot, SimTrace(sim.trace)))
}

/// Rebuilds a snapshot from a trace, checking that the trace is
/// internally consistent along the way.
pub fn replay(trace: &SimTrace) -> Result<NetworkSnapshot, SimError> {
    let mut snapshot = NetworkSnapshot::new();
    // Accepted references announced for the next block of each chain.
    let mut staged: BTreeMap<ChainId, BTreeSet<AssociationRef>> = BTreeMap::new();
    let mut last_tick = 0u64;

    for (index, event) in trace.0.iter().enumerate() {
        let invalid = |reason: String| SimError::InvalidTrace { index, reason };
        let tick = event.tick();
        if tick < last_tick {
            return Err(invalid(format!("tick {tick} after tick {last_tick}")));
        }
        last_tick = tick;
        match event {
            SimEvent::ChainOpened { chain, .. } => {
                snapshot
                    .add_chain(chain.clone())
                    .map_err(|e| invalid(e.to_string()))?;
            }
            SimEvent::AssociationSent { from, to, .. } => {
                snapshot
                    .send_association(from, to, tick)
                    .map_err(|e| invalid(e.to_string()))?;
            }
            SimEvent::AssociationAccepted {
                to,
                from,
                from_height,
                ..
            } => {
                let hash = snapshot
                    .chains
                    .get(from)
                    .and_then(|c| c.block(*from_height))
                    .map(|b| b.summary_hash)
                    .ok_or_else(|| invalid(format!("{from}:{from_height} does not exist")))?;
                let sent_earlier = snapshot.pending.iter().any(|p| {
                    &p.to_chain == to
                        && &p.from_chain == from
                        && p.from_block_hash == hash
                        && p.sent_at < tick
                });
                if !sent_earlier {
                    return Err(invalid(format!(
                        "{to} accepts {from}:{from_height} without an earlier matching send"
                    )));
                }
                staged
                    .entry(to.clone())
                    .or_default()
                    .insert(AssociationRef::new(from.clone(), hash));
            }
            SimEvent::AssociationDropped { to, from, .. } => {
                let pos = snapshot
                    .pending
                    .iter()
                    .position(|p| &p.to_chain == to && &p.from_chain == from)
                    .ok_or_else(|| invalid(format!("nothing pending from {from} to {to}")))?;
                snapshot.pending.remove(pos);
            }
            SimEvent::BlockCreated { chain, height, .. } => {
                let expected = snapshot
                    .chain(chain)
                    .map_err(|e| invalid(e.to_string()))?
                    .len() as u64;
                if *height != expected {
                    return Err(invalid(format!(
                        "{chain} creates height {height}, expected {expected}"
                    )));
                }
                let block = snapshot
                    .accept_pending(chain, sim_payload(chain, *height, tick), tick)
                    .map_err(|e| invalid(e.to_string()))?;
                let announced = staged.remove(chain).unwrap_or_default();
                let packaged: BTreeSet<AssociationRef> = block.accepted.iter().cloned().collect();
                if announced != packaged {
                    return Err(invalid(format!(
                        "{chain}:{height} packaged {} references but the trace announced {}",
                        packaged.len(),
                        announced.len()
                    )));
                }
            }
        }
    }
    if let Some(chain) = staged.keys().next() {
        return Err(SimError::InvalidTrace {
            index: trace.0.len(),
            reason: format!("{chain} accepted associations but never created a block"),
        });
    }
    Ok(snapshot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::verify_snapshot;
    use crate::sim::{ground_truth_order, FixedRule};

    fn ids(names: &[&str]) -> Vec<ChainId> {
        names.iter().map(|n| ChainId::new(*n).unwrap()).collect()
    }

    #[test]
    fn zero_probability_creates_nothing() {
        let cfg = SimConfig::autonomous(ids(&["A", "B", "C"]), 50, 3, 0.0);
        let (snapshot, trace) = run(&cfg).unwrap();
        assert_eq!(snapshot.chains.len(), 3);
        assert_eq!(snapshot.block_count(), 0);
        assert!(ground_truth_order(&trace).is_empty());
        assert_eq!(replay(&trace).unwrap(), snapshot);
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = SimConfig::autonomous(ids(&["A", "B", "C", "D"]), 60, 11, 0.4);
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
        let other = SimConfig {
            seed: 12,
            ..cfg.clone()
        };
        assert_ne!(run(&cfg).unwrap().1, run(&other).unwrap().1);
    }

    #[test]
    fn replay_round_trip() {
        for seed in 0..10 {
            let cfg = SimConfig::autonomous(ids(&["A", "B", "C"]), 40, seed, 0.5);
            let (snapshot, trace) = run(&cfg).unwrap();
            assert!(verify_snapshot(&snapshot).is_empty());
            assert_eq!(replay(&trace).unwrap(), snapshot);
        }
    }

    #[test]
    fn every_acceptance_follows_an_earlier_send() {
        let cfg = SimConfig::autonomous(ids(&["A", "B", "C", "D", "E"]), 80, 5, 0.7);
        let (snapshot, trace) = run(&cfg).unwrap();
        for chain in snapshot.chains.values() {
            for block in &chain.blocks {
                for r in &block.accepted {
                    let source = snapshot.resolve(r).unwrap();
                    assert!(source.local_timestamp.unwrap() < block.local_timestamp.unwrap());
                }
            }
        }
        let ticks: Vec<u64> = trace.events().iter().map(SimEvent::tick).collect();
        assert!(ticks.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn fixed_ring_creates_every_other_tick() {
        let order = ids(&["C", "A", "B"]);
        let cfg = SimConfig::fixed_rule(order.clone(), 12, FixedRule::ring(&order));
        let (snapshot, trace) = run(&cfg).unwrap();
        let truth: Vec<String> = ground_truth_order(&trace)
            .iter()
            .map(|e| e.to_string())
            .collect();
        assert_eq!(truth, ["C:0", "A:0", "B:0", "C:1", "A:1", "B:1"]);
        assert_eq!(replay(&trace).unwrap(), snapshot);
    }

    #[test]
    fn scheduled_drops_are_traced_and_replayed() {
        let [a, b] = [ids(&["A"])[0].clone(), ids(&["B"])[0].clone()];
        let rule = FixedRule {
            period: 4,
            schedule: vec![
                ScheduleEntry::Create {
                    phase: 0,
                    chain: a.clone(),
                },
                ScheduleEntry::Send {
                    phase: 1,
                    from: a.clone(),
                    to: b.clone(),
                },
                ScheduleEntry::Drop {
                    phase: 2,
                    chain: b.clone(),
                },
                ScheduleEntry::Create {
                    phase: 3,
                    chain: b.clone(),
                },
            ],
        };
        let cfg = SimConfig::fixed_rule(vec![a, b.clone()], 8, rule);
        let (snapshot, trace) = run(&cfg).unwrap();
        let drops = trace
            .events()
            .iter()
            .filter(|e| matches!(e, SimEvent::AssociationDropped { .. }))
            .count();
        assert_eq!(drops, 2);
        assert!(snapshot.chains[&b]
            .blocks
            .iter()
            .all(|blk| blk.accepted.is_empty()));
        assert_eq!(replay(&trace).unwrap(), snapshot);
    }

    #[test]
    fn replay_rejects_inconsistent_traces() {
        assert_eq!(
            replay(&SimTrace::default()).unwrap(),
            NetworkSnapshot::new()
        );

        let [a, b] = [ids(&["A"])[0].clone(), ids(&["B"])[0].clone()];
        let open = |c: &ChainId| SimEvent::ChainOpened {
            tick: 0,
            chain: c.clone(),
        };
        let created = |c: &ChainId, tick, height| SimEvent::BlockCreated {
            tick,
            chain: c.clone(),
            height,
        };

        let accepted_first = SimTrace(vec![
            open(&a),
            open(&b),
            created(&a, 0, 0),
            SimEvent::AssociationAccepted {
                tick: 1,
                to: b.clone(),
                from: a.clone(),
                from_height: 0,
            },
            created(&b, 1, 0),
        ]);
        assert!(matches!(
            replay(&accepted_first),
            Err(SimError::InvalidTrace { index: 3, .. })
        ));

        let same_tick = SimTrace(vec![
            open(&a),
            open(&b),
            created(&a, 0, 0),
            SimEvent::AssociationSent {
                tick: 1,
                from: a.clone(),
                to: b.clone(),
            },
            SimEvent::AssociationAccepted {
                tick: 1,
                to: b.clone(),
                from: a.clone(),
                from_height: 0,
            },
        ]);
        assert!(matches!(
            replay(&same_tick),
            Err(SimError::InvalidTrace { index: 4, .. })
        ));

        let backwards = SimTrace(vec![open(&a), created(&a, 5, 0), created(&a, 4, 1)]);
        assert!(replay(&backwards).is_err());

        let skipped_height = SimTrace(vec![open(&a), created(&a, 0, 1)]);
        assert!(replay(&skipped_height).is_err());

        // A send that is packaged without being announced.
        let unannounced = SimTrace(vec![
            open(&a),
            open(&b),
            created(&a, 0, 0),
            SimEvent::AssociationSent {
                tick: 1,
                from: a.clone(),
                to: b.clone(),
            },
            created(&b, 2, 0),
        ]);
        assert!(replay(&unannounced).is_err());
    }

    #[test]
    fn invalid_config_is_refused() {
        let cfg = SimConfig::autonomous(ids(&["A"]), 0, 0, 0.5);
        assert!(matches!(run(&cfg), Err(SimError::InvalidConfig(_))));
    }

    #[test]
    fn progress_sees_every_tick() {
        let cfg = SimConfig::autonomous(ids(&["A", "B"]), 7, 0, 0.5);
        let mut seen = Vec::new();
        run_with_progress(&cfg, |t| seen.push(t)).unwrap();
        assert_eq!(seen, (0..7).collect::<Vec<_>>());
    }
}
