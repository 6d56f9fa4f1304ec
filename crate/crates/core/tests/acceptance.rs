//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oramlab::adversary::{
    alice_encode, bob_decode, dense_partition_frequency_observed, estimate_advantage_observed,
    random_payload, simulate_trace, statistical_distance_empirical, statistical_distance_exact,
    CodecContext, FrequencyWorkload,
};
use oramlab::engine::{DummyLengthEncoder, DummyLengthLeaker};
use oramlab::partition::{brute_force_dense_partition, theorem_k_max};
use oramlab::report::analyze_trace;
use oramlab::workload::{gen_alternating_sequence, gen_write_read_blocks};
use oramlab::{
    build_access_graph, greedy_dense_partition, AccessGraph, AccessSequence, EngineKind, InputOp,
    InputSequence, OpKind, OramConfig, Rational, ServerState, TraceFile, WorkloadSpec,
};

static TRACES: AtomicUsize = AtomicUsize::new(0);
static VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

/// Degree bounds and `|E| = N - distinct` on one trace.
fn check_graph(trace: &AccessSequence, g: &AccessGraph) {
    TRACES.fetch_add(1, Ordering::Relaxed);
    let addrs = trace.addrs();
    let n = addrs.len();
    let mut ok = g.len() == n;
    let mut out_edges = 0;
    let mut in_edges = 0;
    for v in 0..n {
        if let Some(s) = g.succ(v) {
            out_edges += 1;
            ok &= s > v && g.pred(s) == Some(v) && addrs[s] == addrs[v];
        }
        if let Some(p) = g.pred(v) {
            in_edges += 1;
            ok &= p < v && g.succ(p) == Some(v);
        }
    }
    let max = addrs.iter().copied().max().unwrap_or(0);
    let distinct = if max < 1 << 26 {
        let mut seen = vec![false; max as usize + 1];
        addrs
            .iter()
            .filter(|&&a| !std::mem::replace(&mut seen[a as usize], true))
            .count()
    } else {
        trace.distinct_addresses()
    };
    ok &= out_edges == in_edges && out_edges == g.edge_count() && g.edge_count() == n - distinct;
    if !ok {
        VIOLATIONS.fetch_add(1, Ordering::Relaxed);
    }
}

fn observed(trace: AccessSequence) -> AccessSequence {
    let g = build_access_graph(&trace).expect("graph");
    check_graph(&trace, &g);
    trace
}

type Outcome = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn int(x: i64) -> Rational {
    Rational::from_integer(x)
}

fn verdicts_agree(g: &AccessGraph) -> Result<usize, String> {
    let mut queries = 0;
    for k in 1..=3 {
        for ell in 1..=4 {
            let greedy = greedy_dense_partition(g, k, &int(ell)).is_some();
            let brute = brute_force_dense_partition(g, k, &int(ell))
                .map_err(|e| e.to_string())?
                .is_some();
            if greedy != brute {
                return Err(format!(
                    "mismatch on {:?}, k = {k}, ell = {ell}: greedy {greedy}, brute force {brute}",
                    g.edges().collect::<Vec<_>>()
                ));
            }
            queries += 1;
        }
    }
    Ok(queries)
}

fn criterion_1() -> Outcome {
    let mut graphs = 0;
    let mut queries = 0;
    for n in 0..=7usize {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        let mut chosen = Vec::new();
        fn walk(
            pairs: &[(usize, usize)],
            from: usize,
            chosen: &mut Vec<(usize, usize)>,
            n: usize,
            graphs: &mut usize,
            queries: &mut usize,
        ) -> Result<(), String> {
            let g = AccessGraph::from_edges(n, chosen).map_err(|e| e.to_string())?;
            *queries += verdicts_agree(&g)?;
            *graphs += 1;
            if chosen.len() == 4 {
                return Ok(());
            }
            for i in from..pairs.len() {
                let (u, v) = pairs[i];
                if chosen.iter().any(|&(a, b)| a == u || b == v) {
                    continue;
                }
                chosen.push((u, v));
                walk(pairs, i + 1, chosen, n, graphs, queries)?;
                chosen.pop();
            }
            Ok(())
        }
        walk(&pairs, 0, &mut chosen, n, &mut graphs, &mut queries)?;
    }
    let exhaustive = graphs;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let n = rng.gen_range(0..=10usize);
        let mut has_pred = vec![false; n];
        let mut edges = Vec::new();
        let density = rng.gen_range(0.0..1.0);
        for u in 0..n {
            if rng.gen_bool(density) {
                let free: Vec<usize> = (u + 1..n).filter(|&v| !has_pred[v]).collect();
                if !free.is_empty() {
                    let v = free[rng.gen_range(0..free.len())];
                    has_pred[v] = true;
                    edges.push((u, v));
                }
            }
        }
        let g = AccessGraph::from_edges(n, &edges).map_err(|e| e.to_string())?;
        queries += verdicts_agree(&g)?;
        graphs += 1;
    }
    Ok(format!(
        "{exhaustive} exhaustive + {} random graphs, {queries} queries, 0 mismatches",
        graphs - exhaustive
    ))
}

fn criterion_3() -> Outcome {
    let m_range = 4u64;
    let cfg = OramConfig::new(1, m_range, 8).map_err(|e| e.to_string())?;
    for n in 2..=4usize {
        let y: InputSequence = [
            InputOp::write(3, 7),
            InputOp::read(1),
            InputOp::write(4, 1),
            InputOp::read(2),
        ][..n]
            .to_vec()
            .into();
        let mut counts = vec![0u64; 3 * n + 1];
        for pivot in 1..=n {
            for threshold in 1..=m_range {
                let mut e = DummyLengthLeaker::with_choice(cfg, n, pivot, threshold);
                let mut s = ServerState::new(cfg.w);
                for op in y.iter() {
                    e.step(&mut s, op).map_err(|e| e.to_string())?;
                }
                let out = observed(s.adversary_view());
                counts[out.len()] += 1;
            }
        }
        let total = n as u64 * m_range;
        for i in 1..=n {
            let a = y.ops()[i - 1].addr;
            let even = Rational::new(counts[n + 2 * i] as i64, total as i64);
            let odd = Rational::new(counts[n + 2 * i - 1] as i64, total as i64);
            ensure(even == Rational::new(a as i64, total as i64), || {
                format!("n = {n}, i = {i}: Pr[n+2i] = {even}, want {a}/{total}")
            })?;
            ensure(
                odd == Rational::new((m_range - a) as i64, total as i64),
                || format!("n = {n}, i = {i}: Pr[n+2i-1] = {odd}"),
            )?;
        }
    }
    Ok("exact length law for n in {2, 3, 4}, M = 4".into())
}

fn criterion_4() -> Outcome {
    // every run has length 2n or 2n + 1
    let cfg = OramConfig::new(1, 64, 16).map_err(|e| e.to_string())?;
    let mut runs = 0;
    for n in [2usize, 8, 16, 64] {
        for seed in 0..100 {
            let y = gen_write_read_blocks(n, 1, 16, &mut ChaCha8Rng::seed_from_u64(seed))
                .map_err(|e| e.to_string())?
                .0;
            let t = observed(
                simulate_trace(EngineKind::DummyLengthEncoder, &cfg, &y, seed)
                    .map_err(|e| e.to_string())?,
            );
            ensure(t.len() == 2 * n || t.len() == 2 * n + 1, || {
                format!("n = {n}, seed = {seed}: length {}", t.len())
            })?;
            runs += 1;
        }
    }
    // n = 1, M = 2, w = 1: the 8 possible draws, exhaustively
    let tiny = OramConfig::new(1, 2, 1).map_err(|e| e.to_string())?;
    let space: Vec<InputOp> = [OpKind::Write, OpKind::Read]
        .into_iter()
        .flat_map(|kind| {
            (1..=2u64)
                .flat_map(move |addr| (0..=1u64).map(move |data| InputOp { kind, addr, data }))
        })
        .collect();
    for y in &space {
        let rank = space.iter().filter(|r| *r < y).count() as i64;
        let mut long = 0;
        for r in &space {
            let mut e = DummyLengthEncoder::new(tiny, 0);
            let mut s = ServerState::new(tiny.w);
            e.step_with_draw(&mut s, y, r).map_err(|e| e.to_string())?;
            e.finish(&mut s).map_err(|e| e.to_string())?;
            let t = observed(s.adversary_view());
            ensure(t.len() == 2 || t.len() == 3, || {
                format!("length {}", t.len())
            })?;
            long += (t.len() == 3) as i64;
        }
        ensure(Rational::new(long, 8) == Rational::new(rank, 8), || {
            format!("y = {y}: Pr[3] = {long}/8, rank {rank}")
        })?;
    }
    Ok(format!(
        "{runs} runs in {{2n, 2n+1}}; Pr[2n+1] = rank(y)/8 for all 8 inputs"
    ))
}

fn criterion_5() -> Outcome {
    let (n, k, w) = (1024usize, 2usize, 32u32);
    let cfg = OramConfig::new(4, n as u64, w).map_err(|e| e.to_string())?;
    let mut round_trips = 0;
    for engine in [
        EngineKind::Passthrough,
        EngineKind::LinearScan,
        EngineKind::TreeOram,
    ] {
        for inst in 0..100u64 {
            let ctx = CodecContext::random(engine, cfg, n, k, inst).map_err(|e| e.to_string())?;
            for i in 1..=k {
                let b = random_payload(&ctx, inst * 1000 + i as u64);
                let msg = alice_encode(&ctx, i, &b).map_err(|e| e.to_string())?;
                let cells = msg.client_mem_snapshot.len() as u64;
                let t = msg.matched_probes.len() as u64;
                ensure(
                    msg.bit_length() == cells * w as u64 + 2 * w as u64 * t,
                    || "bit length".into(),
                )?;
                if engine != EngineKind::TreeOram {
                    ensure(cells == cfg.m as u64, || format!("{engine}: {cells} cells"))?;
                }
                let got = bob_decode(&ctx, i, &msg)
                    .map_err(|e| format!("{engine} #{inst} i={i}: {e}"))?;
                ensure(got == b, || {
                    format!("{engine} #{inst} i={i}: payload differs")
                })?;
                round_trips += 1;
            }
        }
    }
    Ok(format!("{round_trips} round trips, bit lengths exact"))
}

fn advantage(
    engine: EngineKind,
    y: &InputSequence,
    yp: &InputSequence,
    cfg: &OramConfig,
) -> Result<oramlab::adversary::AdvantageEstimate, String> {
    estimate_advantage_observed(engine, cfg, y, yp, 1000, 42, &check_graph)
        .map_err(|e| e.to_string())
}

fn criterion_6() -> Outcome {
    let cfg = OramConfig::new(1, 200, 32).map_err(|e| e.to_string())?;
    let y = gen_alternating_sequence(200).map_err(|e| e.to_string())?;
    let yp = gen_write_read_blocks(200, 4, 32, &mut ChaCha8Rng::seed_from_u64(9))
        .map_err(|e| e.to_string())?
        .0;
    let mut parts = Vec::new();
    for engine in [EngineKind::Passthrough, EngineKind::DummyLengthEncoder] {
        let est = advantage(engine, &y, &yp, &cfg)?;
        ensure(est.advantage >= 0.10, || {
            format!("{engine}: advantage {:.4}", est.advantage)
        })?;
        parts.push(format!(
            "{engine} {:.3} +- {:.3}",
            est.advantage, est.half_width
        ));
    }
    Ok(parts.join(", "))
}

fn criterion_7() -> Outcome {
    let cfg = OramConfig::new(1, 200, 32).map_err(|e| e.to_string())?;
    let y = gen_alternating_sequence(200).map_err(|e| e.to_string())?;
    let yp = gen_write_read_blocks(200, 4, 32, &mut ChaCha8Rng::seed_from_u64(9))
        .map_err(|e| e.to_string())?
        .0;
    let est = advantage(EngineKind::LinearScan, &y, &yp, &cfg)?;
    ensure(est.advantage <= 0.05, || {
        format!("advantage {:.4}", est.advantage)
    })?;
    let sample = |input: &InputSequence| -> Result<Vec<AccessSequence>, String> {
        (0..100)
            .map(|s| {
                simulate_trace(EngineKind::LinearScan, &cfg, input, s)
                    .map(observed)
                    .map_err(|e| e.to_string())
            })
            .collect()
    };
    let sd =
        statistical_distance_empirical(&sample(&y)?, &sample(&yp)?).map_err(|e| e.to_string())?;
    ensure(sd.estimate == 0.0, || {
        format!("empirical distance {}", sd.estimate)
    })?;
    Ok(format!(
        "advantage {:.3}, empirical distance 0 over 100 + 100 traces",
        est.advantage
    ))
}

fn criterion_8() -> Outcome {
    let (n, m, w) = (4096usize, 4usize, 32u32);
    let cfg = OramConfig::new(m, 4096, w).map_err(|e| e.to_string())?;
    let k_max = theorem_k_max(n, m);
    ensure(k_max == 10, || format!("k_max = {k_max}"))?;
    let mut parts = Vec::new();
    for k in [1usize, 4] {
        let f = dense_partition_frequency_observed(
            EngineKind::LinearScan,
            &cfg,
            FrequencyWorkload::Blocks,
            n,
            k,
            100,
            k as u64,
            &check_graph,
        )
        .map_err(|e| e.to_string())?;
        ensure(f.frequency == 1.0, || {
            format!("k = {k}: frequency {}", f.frequency)
        })?;
        parts.push(format!("k = {k}: {}/{}", f.hits, f.trials));
    }
    Ok(parts.join(", "))
}

fn criterion_9() -> Outcome {
    let mut ratios = Vec::new();
    for exp in [10u32, 12, 14] {
        let n = 1usize << exp;
        let cfg = OramConfig::new(1, n as u64, 32).map_err(|e| e.to_string())?;
        let k = theorem_k_max(n, 1).max(1);
        let spec = WorkloadSpec::Blocks {
            n,
            k,
            seed: exp as u64,
        };
        let file = TraceFile::simulate(EngineKind::TreeOram, &cfg, &spec, exp as u64, false)
            .map_err(|e| e.to_string())?;
        observed(file.trace.clone());
        let r = analyze_trace(&file, None, None).map_err(|e| e.to_string())?;
        ensure(
            r.certified_probe_bound as usize <= r.measured_probes,
            || {
                format!(
                    "n = {n}: bound {} > N = {}",
                    r.certified_probe_bound, r.measured_probes
                )
            },
        )?;
        ratios.push((
            n,
            r.certified_probe_bound,
            r.certified_probe_bound as f64 / n as f64,
        ));
    }
    ensure(ratios.windows(2).all(|p| p[1].2 > p[0].2), || {
        format!("ratios {ratios:?}")
    })?;
    Ok(ratios
        .iter()
        .map(|(n, b, q)| format!("n = {n}: bound {b} ({q:.3} n)"))
        .collect::<Vec<_>>()
        .join(", "))
}

fn criterion_10() -> Outcome {
    let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
    let sd = |x: &[(u32, BigRational)], y: &[(u32, BigRational)]| {
        statistical_distance_exact(x, y).map_err(|e| e.to_string())
    };
    let uniform = [(0u32, q(1, 2)), (1, q(1, 2))];
    ensure(sd(&uniform, &uniform)?.half_l1.is_zero(), || {
        "identical".into()
    })?;
    ensure(sd(&uniform, &[(2, q(1, 1))])?.half_l1.is_one(), || {
        "disjoint".into()
    })?;
    ensure(sd(&uniform, &[(0, q(1, 1))])?.half_l1 == q(1, 2), || {
        "point mass".into()
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let table = |rng: &mut ChaCha8Rng, size: usize, denom: i64| -> Vec<(u32, BigRational)> {
        // random composition of denom into `size` parts
        let mut cuts: Vec<i64> = (0..size - 1).map(|_| rng.gen_range(0..=denom)).collect();
        cuts.push(0);
        cuts.push(denom);
        cuts.sort_unstable();
        cuts.windows(2)
            .enumerate()
            .map(|(s, c)| (s as u32, q(c[1] - c[0], denom)))
            .collect()
    };
    for _ in 0..1000 {
        let size = rng.gen_range(1..=5);
        let denom = rng.gen_range(1..=12);
        let x = table(&mut rng, size, denom);
        let y = table(&mut rng, size, denom);
        let d = sd(&x, &y)?;
        ensure(d.half_l1 == d.one_sided, || format!("{x:?} vs {y:?}"))?;
    }
    Ok("unit identities hold; one-sided = half-L1 on 1000 random tables".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "greedy matches brute force", criterion_1),
        (3, "length-leaking engine law", criterion_3),
        (4, "length-encoding engine law", criterion_4),
        (5, "transfer codec round trip", criterion_5),
        (6, "advantage on leaky engines", criterion_6),
        (7, "advantage on linear scan", criterion_7),
        (8, "dense partition frequency", criterion_8),
        (9, "certificate soundness and growth", criterion_9),
        (10, "statistical distance identities", criterion_10),
    ];
    let mut failed = 0;
    let report = |id: usize, name: &str, outcome: &Outcome, secs: f64| match outcome {
        Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} [{secs:.1}s]"),
        Err(detail) => println!("criterion {id:>2} FAIL  {name}: {detail} [{secs:.1}s]"),
    };
    for (id, name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        failed += outcome.is_err() as usize;
        report(id, name, &outcome, start.elapsed().as_secs_f64());
    }
    let traces = TRACES.load(Ordering::Relaxed);
    let violations = VIOLATIONS.load(Ordering::Relaxed);
    let outcome = if violations == 0 && traces > 0 {
        Ok(format!("{traces} traces checked, 0 violations"))
    } else {
        Err(format!("{violations} violations over {traces} traces"))
    };
    failed += outcome.is_err() as usize;
    report(2, "access graph invariants", &outcome, 0.0);
    if failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
