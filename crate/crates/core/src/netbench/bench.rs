use rand::Rng;

use super::clock::Clock;
use super::collectives::{allreduce, barrier, encode, gatherv, reduce, serial_reduce};
use super::transport::Transport;
use super::{payload, BufferPool, NetBenchConfig, NetError, NetOp, ReduceOp};
use crate::rng::{stream, streams};

/// One output row. Times are per operation in microseconds; throughput is
/// in MB/s (10^6 bytes) and only reported for nonzero point-to-point sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct NetRow {
    pub op: NetOp,
    pub ranks: usize,
    pub size_bytes: usize,
    pub t_min_us: f64,
    pub t_avg_us: f64,
    pub t_max_us: f64,
    pub throughput_mbps: Option<f64>,
}

fn us_per(total_ns: u64, count: usize) -> f64 {
    total_ns as f64 / (count as f64 * 1000.0)
}

/// Ping-pong between two ranks: rank 0 sends and waits for the echo.
/// Latency is half the round trip, `total / (2 reps)`.
pub fn pingpong<T0, T1, C>(
    t0: T0,
    t1: T1,
    cfg: &NetBenchConfig,
    clock: &C,
) -> Result<Vec<NetRow>, NetError>
where
    T0: Transport,
    T1: Transport,
    C: Clock + ?Sized,
{
    cfg.validate()?;
    if t0.size() != 2 || t1.size() != 2 || t0.rank() != 0 || t1.rank() != 1 {
        return Err(NetError::Config(
            "pingpong needs ranks 0 and 1 of a two-rank world".into(),
        ));
    }
    let max = cfg.msg_sizes.last().copied().unwrap_or(0);
    let pattern = payload(cfg.seed, max);

    std::thread::scope(|s| {
        let echo = s.spawn(move || -> Result<(), NetError> {
            for &size in &cfg.msg_sizes {
                for _ in 0..cfg.warmup_iters + cfg.repetitions.count(size) {
                    let m = t1.recv(0)?;
                    t1.send(0, &m)?;
                }
            }
            Ok(())
        });

        let run = || -> Result<Vec<NetRow>, NetError> {
            let mut rows = Vec::with_capacity(cfg.msg_sizes.len());
            for &size in &cfg.msg_sizes {
                let expect = &pattern[..size];
                let pool = BufferPool::new(expect, cfg.cache_avoidance);
                let reps = cfg.repetitions.count(size);
                let round_trip = |rep: usize| -> Result<(), NetError> {
                    t0.send(1, pool.get(rep))?;
                    if t0.recv(1)? != expect {
                        return Err(NetError::Integrity { size, rep });
                    }
                    Ok(())
                };
                for rep in 0..cfg.warmup_iters {
                    round_trip(rep)?;
                }
                let start = clock.now();
                for rep in 0..reps {
                    round_trip(rep)?;
                }
                let latency = us_per(clock.now() - start, 2 * reps);
                rows.push(NetRow {
                    op: NetOp::PingPong,
                    ranks: 2,
                    size_bytes: size,
                    t_min_us: latency,
                    t_avg_us: latency,
                    t_max_us: latency,
                    throughput_mbps: (size > 0).then(|| size as f64 / latency),
                });
            }
            Ok(rows)
        };
        let rows = run();
        drop(t0);
        let echoed = echo.join().expect("echo worker panicked");
        let rows = rows?;
        echoed?;
        Ok(rows)
    })
}

/// Inputs and expected result for one message size.
struct Case {
    inputs: Vec<Vec<u8>>,
    values: Vec<Vec<f64>>,
    expect: Vec<u8>,
}

fn cases(op: NetOp, n: usize, cfg: &NetBenchConfig, red: &ReduceOp) -> Vec<Case> {
    let mut rng = stream(cfg.seed, streams::NET_PAYLOAD);
    cfg.msg_sizes
        .iter()
        .map(|&size| match op {
            NetOp::Gatherv => {
                let inputs: Vec<Vec<u8>> = (0..n)
                    .map(|_| (0..size).map(|_| rng.random()).collect())
                    .collect();
                let expect = inputs.concat();
                Case {
                    inputs,
                    values: vec![],
                    expect,
                }
            }
            _ => {
                let values: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..size / 8).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect();
                let expect = encode(&serial_reduce(&values, red));
                Case {
                    inputs: vec![],
                    values,
                    expect,
                }
            }
        })
        .collect()
}

/// Per-size mean time of one rank, in microseconds.
fn rank_worker<T: Transport, C: Clock>(
    t: &T,
    op: NetOp,
    red: &ReduceOp,
    cfg: &NetBenchConfig,
    cases: &[Case],
    clock: &C,
) -> Result<Vec<f64>, NetError> {
    let rank = t.rank();
    let n = t.size();
    let mut out = Vec::with_capacity(cases.len());
    for (case, &size) in cases.iter().zip(&cfg.msg_sizes) {
        let counts = vec![size; n];
        let bytes = BufferPool::new(
            case.inputs.get(rank).map_or(&[][..], |v| v),
            cfg.cache_avoidance,
        );
        let values = BufferPool::new(
            case.values.get(rank).map_or(&[][..], |v| v),
            cfg.cache_avoidance,
        );
        // Some(bytes) where this rank holds a result to check.
        let once = |rep: usize| -> Result<Option<Vec<u8>>, NetError> {
            Ok(match op {
                NetOp::Reduce => reduce(t, values.get(rep), red)?.map(|r| encode(&r)),
                NetOp::Allreduce => Some(encode(&allreduce(t, values.get(rep), red)?)),
                NetOp::Gatherv => gatherv(t, bytes.get(rep), &counts)?,
                NetOp::PingPong => unreachable!("checked by the caller"),
            })
        };
        for rep in 0..cfg.warmup_iters {
            barrier(t)?;
            once(rep)?;
        }
        let reps = cfg.repetitions.count(size);
        let mut total = 0;
        for rep in 0..reps {
            barrier(t)?;
            let start = clock.now();
            let got = once(rep)?;
            total += clock.now() - start;
            if got.is_some_and(|g| g != case.expect) {
                return Err(NetError::Correctness { op, rank, size });
            }
        }
        out.push(us_per(total, reps));
    }
    Ok(out)
}

/// Time a collective on every rank of `world`. Each repetition starts with a
/// barrier and its result is compared with a serial reference. Rows report
/// the minimum, mean and maximum over ranks of the per-rank mean time.
pub fn collective_bench<T, C>(
    op: NetOp,
    world: Vec<T>,
    red: &ReduceOp,
    cfg: &NetBenchConfig,
    make_clock: impl Fn(usize) -> C + Sync,
) -> Result<Vec<NetRow>, NetError>
where
    T: Transport,
    C: Clock,
{
    cfg.validate()?;
    if op == NetOp::PingPong {
        return Err(NetError::Config("pingpong is not a collective".into()));
    }
    let n = world.len();
    if n < 2 {
        return Err(NetError::Config(format!(
            "collectives need at least 2 ranks, got {n}"
        )));
    }
    if world
        .iter()
        .enumerate()
        .any(|(r, t)| t.rank() != r || t.size() != n)
    {
        return Err(NetError::Config(
            "endpoints must be ranks 0..n of one world".into(),
        ));
    }
    let cases = cases(op, n, cfg, red);

    let results: Vec<Result<Vec<f64>, NetError>> = std::thread::scope(|s| {
        let handles: Vec<_> = world
            .into_iter()
            .map(|t| {
                let (cases, make_clock) = (&cases, &make_clock);
                s.spawn(move || rank_worker(&t, op, red, cfg, cases, &make_clock(t.rank())))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("rank worker panicked"))
            .collect()
    });

    // A failing rank makes its peers see hang-ups; report the cause.
    if let Some(e) = results
        .iter()
        .filter_map(|r| r.as_ref().err())
        .min_by_key(|e| matches!(e, NetError::Transport(_)))
    {
        return Err(e.clone());
    }
    let per_rank: Vec<Vec<f64>> = results.into_iter().map(Result::unwrap).collect();
    Ok(cfg
        .msg_sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let t = per_rank.iter().map(|r| r[i]);
            NetRow {
                op,
                ranks: n,
                size_bytes: size,
                t_min_us: t.clone().fold(f64::INFINITY, f64::min),
                t_avg_us: t.clone().sum::<f64>() / n as f64,
                t_max_us: t.fold(f64::NEG_INFINITY, f64::max),
                throughput_mbps: None,
            }
        })
        .collect())
}
