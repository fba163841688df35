//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::*;
use hashorder::chain::{verify_snapshot, Digest, NetworkSnapshot};
use hashorder::io;
use hashorder::order::{
    build_dag, comparability_ratio, count_linear_extensions, linear_extensions, LinearExtension,
    OrderRelation,
};
use hashorder::sim::{run, scenarios, SimConfig, SimRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn line(ext: &LinearExtension) -> String {
    ext.to_string()
}

/// Three chains in a ring; the DAG must admit exactly one order.
fn unique_ring_order() -> Outcome {
    let (snapshot, _) = run(&scenarios::fixed_ring()).map_err(|e| e.to_string())?;
    let dag = build_dag(&snapshot).map_err(|e| e.to_string())?;
    let all = linear_extensions(&dag, 10);
    ensure!(all.is_complete(), "enumeration overflowed");
    ensure!(
        all.extensions().len() == 1,
        "{} orders",
        all.extensions().len()
    );
    let expected = "C:0 A:0 B:0 C:1 A:1 B:1 C:2 A:2 B:2 C:3 A:3 B:3 C:4 A:4";
    ensure!(
        line(&all.extensions()[0]) == expected,
        "got {}",
        all.extensions()[0]
    );
    Ok(format!("1 order of {} events", dag.len()))
}

/// Eleven events, one concurrent pair, exactly two orders.
fn two_order_network() -> Outcome {
    let snapshot = scenarios::loose_three_chain().map_err(|e| e.to_string())?;
    let dag = build_dag(&snapshot).map_err(|e| e.to_string())?;
    ensure!(dag.len() == 11, "{} events", dag.len());
    let all = linear_extensions(&dag, 10);
    let mut got: Vec<String> = all.extensions().iter().map(line).collect();
    got.sort();
    let mut expected = vec![
        "A:0 C:0 B:0 A:1 B:1 C:1 A:2 C:2 A:3 B:2 A:4".to_owned(),
        "A:0 C:0 B:0 A:1 B:1 C:1 A:2 A:3 C:2 B:2 A:4".to_owned(),
    ];
    expected.sort();
    ensure!(all.is_complete() && got == expected, "got {got:?}");
    let r1 = dag
        .precedes(&ev("A", 3), &ev("C", 2))
        .map_err(|e| e.to_string())?;
    ensure!(r1 == OrderRelation::Concurrent, "A:3 vs C:2 is {r1}");
    let r2 = dag
        .precedes(&ev("C", 2), &ev("B", 2))
        .map_err(|e| e.to_string())?;
    ensure!(r2 == OrderRelation::Before, "C:2 vs B:2 is {r2}");
    Ok("2 orders, A:3 || C:2, C:2 < B:2".into())
}

/// The simulator's creation order respects every derived edge.
fn ground_truth_soundness() -> Outcome {
    let mut rng = SimRng::new(2024);
    let probs = [0.1, 0.3, 0.7];
    let runs = 120;
    for i in 0..runs {
        let chains = 3 + rng.below(8) as usize;
        let ticks = 10 + rng.below(191);
        let p = probs[i % probs.len()];
        let seed = rng.next_u64();
        let config = SimConfig::autonomous(chain_names(chains), ticks, seed, p);
        let (snapshot, trace) = run(&config).map_err(|e| e.to_string())?;
        let dag = build_dag(&snapshot).map_err(|e| e.to_string())?;
        let truth = LinearExtension(trace.ground_truth_order());
        ensure!(
            truth.len() == dag.len() && truth.respects(&dag),
            "run {i} (chains {chains}, ticks {ticks}, p {p}, seed {seed}) violated"
        );
    }
    Ok(format!("{runs}/{runs} runs sound"))
}

/// Enumeration and counting agree with brute force on small DAGs.
fn enumeration_oracle() -> Outcome {
    let mut rng = SimRng::new(8);
    let cases = 600;
    for i in 0..cases {
        let n = rng.below(9) as usize;
        let k = 1 + rng.below(4) as usize;
        let q = rng.next_unit() * 0.6;
        let g = random_dag(&mut rng, n, k, q);
        let dag = g.build();
        let expected = brute_force_extensions(&g);
        let all = linear_extensions(&dag, usize::MAX);
        ensure!(all.is_complete(), "case {i} did not complete");
        ensure!(
            as_vecs(all.extensions()) == expected,
            "case {i}: extensions differ"
        );
        let count = count_linear_extensions(&dag).map_err(|e| e.to_string())?;
        ensure!(
            count == expected.len().into(),
            "case {i}: count {count} vs {}",
            expected.len()
        );
    }
    Ok(format!("{cases} random DAGs match"))
}

fn digest_slots(s: &mut NetworkSnapshot) -> Vec<&mut Digest> {
    let mut out: Vec<&mut Digest> = Vec::new();
    for chain in s.chains.values_mut() {
        for b in &mut chain.blocks {
            out.push(&mut b.prev_hash);
            out.push(&mut b.payload_hash);
            out.push(&mut b.summary_hash);
            out.extend(b.accepted.iter_mut().map(|r| &mut r.from_block_hash));
        }
    }
    out.extend(s.pending.iter_mut().map(|p| &mut p.from_block_hash));
    out
}

/// Any single-byte change in any digest field is reported.
fn tamper_evidence() -> Outcome {
    let config = SimConfig::autonomous(chain_names(4), 25, 11, 0.6);
    let (snapshot, _) = run(&config).map_err(|e| e.to_string())?;
    ensure!(
        verify_snapshot(&snapshot).is_empty(),
        "honest snapshot rejected"
    );
    let mut rng = SimRng::new(5);
    let flips = 1200;
    let mut copy = snapshot.clone();
    let slots = digest_slots(&mut copy).len();
    for i in 0..flips {
        let mut tampered = snapshot.clone();
        let slot = rng.below(slots as u64) as usize;
        let byte = rng.below(32) as usize;
        let mask = 1 + rng.below(255) as u8;
        digest_slots(&mut tampered)[slot].as_bytes_mut()[byte] ^= mask;
        ensure!(
            !verify_snapshot(&tampered).is_empty(),
            "flip {i} (slot {slot}, byte {byte}) undetected"
        );
    }
    Ok(format!(
        "{flips}/{flips} flips detected over {slots} digests"
    ))
}

/// Forgetting every payload changes neither verification nor the DAG.
fn forgettability() -> Outcome {
    let config = SimConfig::autonomous(chain_names(6), 50, 3, 0.5);
    let (mut snapshot, _) = run(&config).map_err(|e| e.to_string())?;
    let before = build_dag(&snapshot).map_err(|e| e.to_string())?;
    for e in before.nodes() {
        snapshot
            .forget_payload(&e.chain, e.height)
            .map_err(|e| e.to_string())?;
    }
    ensure!(
        verify_snapshot(&snapshot).is_empty(),
        "verification failed after forgetting"
    );
    let after = build_dag(&snapshot).map_err(|e| e.to_string())?;
    ensure!(
        after.nodes() == before.nodes() && after.edges() == before.edges(),
        "DAG changed"
    );
    Ok(format!("{} payloads forgotten", before.len()))
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut r = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// More interaction gives a more comparable (finer-grained) order.
fn granularity_trend() -> Outcome {
    let ps = [0.05, 0.2, 0.5, 0.9];
    let seeds = 20u64;
    let mut means = Vec::new();
    for &p in &ps {
        let mut total = 0.0;
        for seed in 0..seeds {
            let config = SimConfig::autonomous(chain_names(5), 60, seed, p);
            let (snapshot, _) = run(&config).map_err(|e| e.to_string())?;
            let r = comparability_ratio(&build_dag(&snapshot).map_err(|e| e.to_string())?);
            total += *r.numer() as f64 / *r.denom() as f64;
        }
        means.push(total / seeds as f64);
    }
    let rho = spearman(&ps, &means);
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.4}")).collect();
    ensure!(
        means.windows(2).all(|w| w[0] <= w[1]),
        "means not monotone: {shown:?}"
    );
    ensure!(rho > 0.0, "spearman {rho}");
    Ok(format!("means {} rho {rho:.2}", shown.join(" ")))
}

/// Same config, same bytes; same snapshot, same CLI output.
fn determinism() -> Outcome {
    let config = SimConfig::autonomous(chain_names(6), 80, 99, 0.4);
    let (s1, t1) = run(&config).map_err(|e| e.to_string())?;
    let (s2, t2) = run(&config).map_err(|e| e.to_string())?;
    ensure!(
        io::save_snapshot(&s1) == io::save_snapshot(&s2),
        "snapshot bytes differ"
    );
    ensure!(
        io::save_trace(&t1) == io::save_trace(&t2),
        "trace bytes differ"
    );

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("s.json");
    std::fs::write(&path, io::save_snapshot(&s1)).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for format in ["text", "json"] {
        for _ in 0..2 {
            let o = Command::new(env!("CARGO_BIN_EXE_hashorder"))
                .args(["--format", format, "order", "--canonical"])
                .arg(&path)
                .output()
                .map_err(|e| e.to_string())?;
            ensure!(
                o.status.success(),
                "order exited with {:?}",
                o.status.code()
            );
            outputs.push(o.stdout);
        }
    }
    ensure!(
        outputs[0] == outputs[1] && outputs[2] == outputs[3],
        "CLI output differs"
    );
    Ok(format!(
        "{} blocks, {} trace events",
        s1.block_count(),
        t1.0.len()
    ))
}

/// 100 chains x 100 blocks: build the DAG and answer 10,000 queries.
fn desk_scale() -> Outcome {
    let config = SimConfig::autonomous(chain_names(100), 100, 1, 1.0);
    let (snapshot, _) = run(&config).map_err(|e| e.to_string())?;
    ensure!(
        snapshot.block_count() == 10_000,
        "{} blocks",
        snapshot.block_count()
    );
    let start = Instant::now();
    let dag = build_dag(&snapshot).map_err(|e| e.to_string())?;
    let mut rng = SimRng::new(3);
    let mut before = 0;
    for _ in 0..10_000 {
        let a = &dag.nodes()[rng.below(dag.len() as u64) as usize];
        let b = &dag.nodes()[rng.below(dag.len() as u64) as usize];
        if dag.precedes(a, b).map_err(|e| e.to_string())? == OrderRelation::Before {
            before += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:.2?}");
    Ok(format!(
        "{} edges, {before} ordered pairs, dag+queries {elapsed:.2?}",
        dag.edges().len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "1 unique order of the three-chain ring",
            unique_ring_order,
            1,
        ),
        (
            "2 two admissible orders with one concurrent pair",
            two_order_network,
            1,
        ),
        (
            "3 ground-truth soundness over 120 runs",
            ground_truth_soundness,
            30,
        ),
        ("4 enumeration matches brute force", enumeration_oracle, 60),
        ("5 digest tampering always detected", tamper_evidence, 10),
        (
            "6 forgetting payloads preserves verification and DAG",
            forgettability,
            1,
        ),
        (
            "7 comparability rises with interaction probability",
            granularity_trend,
            60,
        ),
        ("8 byte-identical outputs", determinism, 5),
        ("9 100x100 network within budget", desk_scale, 10),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()))
            .and_then(|detail| {
                let t = start.elapsed();
                if t > Duration::from_secs(budget) {
                    Err(format!("{detail}; {t:.2?} exceeds {budget}s"))
                } else {
                    Ok(detail)
                }
            });
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} [{t:.2?} / {budget}s]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} [{t:.2?} / {budget}s]: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
