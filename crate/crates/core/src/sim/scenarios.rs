//! Small hand-made networks used by the tests, the README and the
//! fixture files.

use crate::chain::{ChainError, ChainId, NetworkSnapshot};

use super::{sim_payload, FixedRule, SimConfig};

fn id(s: &str) -> ChainId {
    ChainId::new(s).expect("static id")
}

/// Three chains taking turns in the ring C -> A -> B -> C, one block every
/// other tick, for 27 ticks: 14 blocks whose order is fully determined.
pub fn fixed_ring() -> SimConfig {
    let ring = [id("C"), id("A"), id("B")];
    SimConfig::fixed_rule(vec![id("A"), id("B"), id("C")], 27, FixedRule::ring(&ring))
}

/// Three chains interacting at will, 11 blocks. Every pair of blocks is
/// ordered except A:3 and C:2, so exactly two total orders are admissible.
pub fn loose_three_chain() -> Result<NetworkSnapshot, ChainError> {
    let (a, b, c) = (id("A"), id("B"), id("C"));
    let mut s = NetworkSnapshot::with_chains([a.clone(), b.clone(), c.clone()])?;
    let create = |s: &mut NetworkSnapshot, chain: &ChainId, tick: u64| -> Result<(), ChainError> {
        let height = s.chain(chain)?.len() as u64;
        s.accept_pending(chain, sim_payload(chain, height, tick), tick)?;
        Ok(())
    };
    create(&mut s, &a, 0)?; // A:0
    s.send_association(&a, &c, 1)?;
    create(&mut s, &c, 2)?; // C:0 <- A:0
    s.send_association(&c, &b, 3)?;
    create(&mut s, &b, 4)?; // B:0 <- C:0
    s.send_association(&b, &a, 5)?;
    create(&mut s, &a, 6)?; // A:1 <- B:0
    s.send_association(&a, &b, 7)?;
    create(&mut s, &b, 8)?; // B:1 <- A:1
    s.send_association(&b, &c, 9)?;
    create(&mut s, &c, 10)?; // C:1 <- B:1
    s.send_association(&c, &a, 11)?;
    create(&mut s, &a, 12)?; // A:2 <- C:1
    s.send_association(&a, &c, 13)?;
    create(&mut s, &a, 14)?; // A:3, no association
    create(&mut s, &c, 14)?; // C:2 <- A:2
    s.send_association(&a, &b, 15)?;
    s.send_association(&c, &b, 15)?;
    create(&mut s, &b, 16)?; // B:2 <- A:3, C:2
    s.send_association(&b, &a, 17)?;
    create(&mut s, &a, 18)?; // A:4 <- B:2
    Ok(s)
}
