use std::time::Instant;

use lowprec_core::netbench::{
    allreduce, channel_world, collective_bench, gatherv, pingpong, reduce, ChannelTransport,
    FakeClock, MonotonicClock, NetBenchConfig, NetError, NetOp, ReduceOp, Repetitions, TickOnRecv,
    Transport,
};
use lowprec_oracle::collectives as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixed(sizes: Vec<usize>, reps: usize) -> NetBenchConfig {
    NetBenchConfig {
        msg_sizes: sizes,
        warmup_iters: 2,
        repetitions: Repetitions::Fixed(reps),
        cache_avoidance: false,
        seed: 42,
    }
}

fn two_ranks() -> (TickOnRecv<ChannelTransport>, ChannelTransport, FakeClock) {
    let mut w = channel_world(2);
    let t1 = w.pop().unwrap();
    let t0 = w.pop().unwrap();
    let clock = FakeClock::new();
    let t0 = TickOnRecv {
        inner: t0,
        clock: clock.clone(),
        step_ns: 1000,
    };
    (t0, t1, clock)
}

#[test]
fn pingpong_on_fake_clock_is_exact() {
    let (t0, t1, clock) = two_ranks();
    let rows = pingpong(t0, t1, &fixed(vec![0, 1024], 10), &clock).unwrap();
    // 1000 ns per round trip is 500 ns one way
    assert_eq!(rows[1].size_bytes, 1024);
    assert_eq!(rows[1].t_avg_us, 0.5);
    assert_eq!(rows[1].throughput_mbps, Some(2048.0));
    assert_eq!(rows[0].t_avg_us, 0.5);
    assert_eq!(rows[0].throughput_mbps, None);
}

#[test]
fn pingpong_cache_avoidance_keeps_payloads() {
    for cache_avoidance in [false, true] {
        let (t0, t1, clock) = two_ranks();
        let cfg = NetBenchConfig {
            cache_avoidance,
            ..fixed(vec![1, 64, 4096, 65536], 40)
        };
        // payload verification happens inside; any corruption is an error
        let rows = pingpong(t0, t1, &cfg, &clock).unwrap();
        assert!(rows.iter().all(|r| r.t_avg_us == 0.5));
    }
}

#[test]
fn pingpong_real_clock_runs() {
    let mut w = channel_world(2);
    let t1 = w.pop().unwrap();
    let t0 = w.pop().unwrap();
    let rows = pingpong(
        t0,
        t1,
        &fixed(vec![0, 8, 1 << 16], 5),
        &MonotonicClock::new(),
    )
    .unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.t_min_us >= 0.0));
}

fn run_on_world<R: Send>(n: usize, f: impl Fn(&dyn Transport) -> R + Sync) -> Vec<R> {
    std::thread::scope(|s| {
        let hs: Vec<_> = channel_world(n)
            .into_iter()
            .map(|t| {
                let f = &f;
                s.spawn(move || f(&t))
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn random_inputs(n: usize, len: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..len).map(|_| rng.random_range(-100.0..100.0)).collect())
        .collect()
}

#[test]
fn reductions_match_serial_oracle() {
    let plus_one = |a: f64, b: f64| a + b + 1.0;
    type Reference = Box<dyn Fn(f64, f64) -> f64>;
    let ops: Vec<(ReduceOp, Reference)> = vec![
        (ReduceOp::Sum, Box::new(|a, b| a + b)),
        (ReduceOp::Max, Box::new(f64::max)),
        (ReduceOp::custom("plus_one", plus_one), Box::new(plus_one)),
    ];
    for n in [2, 3, 4, 8] {
        for (seed, (op, reference)) in ops.iter().enumerate() {
            let inputs = random_inputs(n, 33, seed as u64 + 10 * n as u64);
            let expect = oracle::binomial_reduce(&inputs, reference);
            let reduced = run_on_world(n, |t| reduce(t, &inputs[t.rank()], op).unwrap());
            assert_eq!(reduced[0].as_ref(), Some(&expect), "reduce n={n} {op:?}");
            assert!(reduced[1..].iter().all(Option::is_none));
            let all = run_on_world(n, |t| allreduce(t, &inputs[t.rank()], op).unwrap());
            for r in &all {
                let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(r), bits(&expect), "allreduce n={n} {op:?}");
            }
        }
    }
}

#[test]
fn custom_operator_bracketing_is_the_tree() {
    // a + b + 1 adds one per combine whatever the bracketing; a - b does not
    let inputs: Vec<Vec<f64>> = (0..8).map(|r| vec![r as f64]).collect();
    let sub = ReduceOp::custom("sub", |a, b| a - b);
    let got = run_on_world(8, |t| allreduce(t, &inputs[t.rank()], &sub).unwrap());
    let tree = oracle::binomial_reduce(&inputs, |a, b| a - b);
    assert_eq!(got[3], tree);
    assert_ne!(tree, oracle::fold_left(&inputs, |a, b| a - b));
}

#[test]
fn gatherv_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [2, 3, 4, 8] {
        let chunks: Vec<Vec<u8>> = (0..n)
            .map(|_| {
                let len = rng.random_range(0..50);
                (0..len).map(|_| rng.random()).collect()
            })
            .collect();
        let counts: Vec<usize> = chunks.iter().map(Vec::len).collect();
        let got = run_on_world(n, |t| gatherv(t, &chunks[t.rank()], &counts).unwrap());
        assert_eq!(got[0].as_ref(), Some(&oracle::gatherv(&chunks)));
    }
}

#[test]
fn collective_bench_checks_every_repetition() {
    let cfg = fixed(vec![0, 8, 1024, 8192], 4);
    for op in [NetOp::Reduce, NetOp::Allreduce, NetOp::Gatherv] {
        for n in [2, 3, 4, 8] {
            for cache_avoidance in [false, true] {
                let cfg = NetBenchConfig {
                    cache_avoidance,
                    ..cfg.clone()
                };
                let red = ReduceOp::custom("plus_one", |a, b| a + b + 1.0);
                let rows = collective_bench(op, channel_world(n), &red, &cfg, |_| FakeClock::new())
                    .unwrap();
                assert_eq!(rows.len(), 4);
                for r in &rows {
                    assert_eq!((r.op, r.ranks), (op, n));
                    // a clock nobody advances measures nothing
                    assert_eq!((r.t_min_us, r.t_avg_us, r.t_max_us), (0.0, 0.0, 0.0));
                }
            }
        }
    }
}

#[test]
fn collective_bench_rejects_bad_worlds() {
    let cfg = fixed(vec![8], 1);
    let err = collective_bench(
        NetOp::Reduce,
        channel_world(1),
        &ReduceOp::Sum,
        &cfg,
        |_| FakeClock::new(),
    );
    assert!(matches!(err, Err(NetError::Config(_))));
    let err = collective_bench(
        NetOp::PingPong,
        channel_world(2),
        &ReduceOp::Sum,
        &cfg,
        |_| FakeClock::new(),
    );
    assert!(matches!(err, Err(NetError::Config(_))));
}

#[test]
fn collective_bench_reports_nondeterministic_operator() {
    use std::sync::atomic::{AtomicU64, Ordering};
    // changes its answer after the reference has been computed
    let calls = std::sync::Arc::new(AtomicU64::new(0));
    let red = ReduceOp::custom("drifting", move |a, b| {
        a + b + calls.fetch_add(1, Ordering::SeqCst) as f64
    });
    let err = collective_bench(
        NetOp::Reduce,
        channel_world(2),
        &red,
        &fixed(vec![8], 1),
        |_| FakeClock::new(),
    );
    assert!(
        matches!(err, Err(NetError::Correctness { rank: 0, .. })),
        "{err:?}"
    );
}

#[test]
fn per_pair_order_survives_interleaving() {
    // per sender, a multiple of the three peers
    const MSGS: u32 = 10_002;
    let n = 4;
    let start = Instant::now();
    run_on_world(n, |t| {
        let me = t.rank();
        // every rank sends to every other rank, interleaved by destination
        for i in 0..MSGS {
            let dest = (me + 1 + (i as usize % (n - 1))) % n;
            let seq = i / (n as u32 - 1);
            t.send(
                dest,
                &[&(me as u32).to_le_bytes()[..], &seq.to_le_bytes()[..]].concat(),
            )
            .unwrap();
        }
        let per_src = MSGS / (n as u32 - 1);
        for src in (0..n).filter(|&s| s != me) {
            for expect in 0..per_src {
                let m = t.recv(src).unwrap();
                let from = u32::from_le_bytes(m[..4].try_into().unwrap());
                let seq = u32::from_le_bytes(m[4..].try_into().unwrap());
                assert_eq!((from as usize, seq), (src, expect));
            }
        }
    });
    assert!(start.elapsed().as_secs_f64() < 10.0);
}
