//! Type-generic `y <- a*x + y` and a single-threaded timing harness that
//! produces rate-vs-size curves.

use std::time::{Duration, Instant};

use rand::Rng;
use thiserror::Error;

use crate::half::RoundingPolicy;
use crate::rng::{stream, streams};
use crate::scalar::{Scalar, ScalarKind};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("length mismatch: x has {x} elements, y has {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("size {size} needs {needed} bytes, above the {cap}-byte memory cap")]
    MemoryCap {
        size: usize,
        needed: usize,
        cap: usize,
    },
    #[error("size must be positive")]
    EmptySize,
    #[error("{0} is not a kernel element type")]
    UnsupportedKind(ScalarKind),
}

/// `y[i] = a*x[i] + y[i]` for every `i`, in ascending order, through
/// `T::mul_add`.
pub fn axpy_inplace<T: Scalar>(a: T, x: &[T], y: &mut [T]) -> Result<(), KernelError> {
    if x.len() != y.len() {
        return Err(KernelError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = a.mul_add(xi, *yi);
    }
    Ok(())
}

/// One row of a rate-vs-size curve.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub label: String,
    pub kind: ScalarKind,
    pub size: usize,
    pub t_min: f64,
    pub t_median: f64,
    /// Floating-point operations per second at `t_min`.
    pub rate: f64,
}

impl BenchRecord {
    pub fn new(
        label: impl Into<String>,
        kind: ScalarKind,
        size: usize,
        t_min: f64,
        t_median: f64,
        flops: f64,
    ) -> Self {
        Self {
            label: label.into(),
            kind,
            size,
            t_min,
            t_median,
            rate: flops / t_min,
        }
    }

    pub fn gflops(&self) -> f64 {
        self.rate / 1e9
    }
}

/// Repetition and timing rules for one measured size.
#[derive(Clone, Debug)]
pub struct TimingProtocol {
    pub warmup_calls: usize,
    /// Calls are repeated until a sample lasts at least this long.
    pub min_sample_time: Duration,
    pub samples: usize,
}

impl Default for TimingProtocol {
    fn default() -> Self {
        Self {
            warmup_calls: 3,
            min_sample_time: Duration::from_millis(10),
            samples: 11,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Timing {
    pub min: f64,
    pub median: f64,
}

/// Time `call` per the protocol and return seconds per call.
pub fn measure(protocol: &TimingProtocol, mut call: impl FnMut()) -> Timing {
    for _ in 0..protocol.warmup_calls {
        call();
    }
    let mut per_call = Vec::with_capacity(protocol.samples.max(1));
    for _ in 0..protocol.samples.max(1) {
        let start = Instant::now();
        let mut calls = 0u64;
        loop {
            call();
            calls += 1;
            if start.elapsed() >= protocol.min_sample_time {
                break;
            }
        }
        per_call.push(start.elapsed().as_secs_f64() / calls as f64);
    }
    per_call.sort_by(f64::total_cmp);
    Timing {
        min: per_call[0],
        median: per_call[per_call.len() / 2],
    }
}

#[derive(Clone, Debug)]
pub struct AxpyBenchConfig {
    pub protocol: TimingProtocol,
    pub seed: u64,
    /// Rotate through enough buffer copies that each call touches memory the
    /// previous call did not.
    pub cold: bool,
    pub cold_footprint_bytes: usize,
    pub memory_cap_bytes: usize,
    pub policy: RoundingPolicy,
}

impl Default for AxpyBenchConfig {
    fn default() -> Self {
        Self {
            protocol: TimingProtocol::default(),
            seed: 42,
            cold: false,
            cold_footprint_bytes: 64 << 20,
            memory_cap_bytes: 2 << 30,
            policy: RoundingPolicy::default(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct AxpyReport {
    pub records: Vec<BenchRecord>,
    /// Sizes that could not be run, in input order.
    pub skipped: Vec<(usize, KernelError)>,
}

/// Multiplier used by the benchmark.
pub const BENCH_ALPHA: f64 = 0.5;

/// The benchmark's input vectors for `n` elements, drawn from `[-1, 1)`.
pub fn bench_inputs<T: Scalar<Context = ()>>(n: usize, seed: u64) -> (Vec<T>, Vec<T>) {
    let mut rng = stream(seed, streams::AXPY);
    let x = (0..n)
        .map(|_| T::from_f64(rng.random_range(-1.0..1.0), ()))
        .collect();
    let y = (0..n)
        .map(|_| T::from_f64(rng.random_range(-1.0..1.0), ()))
        .collect();
    (x, y)
}

/// Output of one `axpy` call on the benchmark inputs, widened to binary64.
/// Independent of how often the timed loop ran.
pub fn bench_result<T: Scalar<Context = ()>>(n: usize, seed: u64) -> Vec<f64> {
    let (x, mut y) = bench_inputs::<T>(n, seed);
    axpy_inplace(T::from_f64(BENCH_ALPHA, ()), &x, &mut y).expect("equal lengths");
    y.into_iter().map(Scalar::to_f64).collect()
}

fn bench_one<T: Scalar<Context = ()>>(
    n: usize,
    cfg: &AxpyBenchConfig,
) -> Result<BenchRecord, KernelError> {
    if n == 0 {
        return Err(KernelError::EmptySize);
    }
    let elem = std::mem::size_of::<T>();
    let pair_bytes = 2 * n * elem;
    let copies = if cfg.cold {
        (cfg.cold_footprint_bytes / pair_bytes).clamp(2, 256)
    } else {
        1
    };
    let needed = pair_bytes * copies;
    if needed > cfg.memory_cap_bytes {
        return Err(KernelError::MemoryCap {
            size: n,
            needed,
            cap: cfg.memory_cap_bytes,
        });
    }
    let (x, y) = bench_inputs::<T>(n, cfg.seed);
    let mut buffers: Vec<(Vec<T>, Vec<T>)> = (0..copies).map(|_| (x.clone(), y.clone())).collect();
    let a = T::from_f64(BENCH_ALPHA, ());
    let mut next = 0usize;
    let timing = measure(&cfg.protocol, || {
        let (x, y) = &mut buffers[next];
        axpy_inplace(a, std::hint::black_box(x), std::hint::black_box(y)).expect("equal lengths");
        next = (next + 1) % copies;
    });
    Ok(BenchRecord::new(
        "axpy",
        T::KIND,
        n,
        timing.min,
        timing.median,
        2.0 * n as f64,
    ))
}

fn bench_sizes<T: Scalar<Context = ()>>(sizes: &[usize], cfg: &AxpyBenchConfig) -> AxpyReport {
    let mut report = AxpyReport::default();
    for &n in sizes {
        match bench_one::<T>(n, cfg) {
            Ok(r) => report.records.push(r),
            Err(e) => report.skipped.push((n, e)),
        }
    }
    report
}

/// Time `axpy` at each size for one element type on the calling thread.
pub fn bench_axpy(
    kind: ScalarKind,
    sizes: &[usize],
    cfg: &AxpyBenchConfig,
) -> Result<AxpyReport, KernelError> {
    match kind {
        ScalarKind::F64 => Ok(bench_sizes::<f64>(sizes, cfg)),
        ScalarKind::F32 => Ok(bench_sizes::<f32>(sizes, cfg)),
        ScalarKind::F16 => {
            Ok(crate::with_f16_policy!(cfg.policy, H => bench_sizes::<H>(sizes, cfg)))
        }
        ScalarKind::Mixed => Err(KernelError::UnsupportedKind(kind)),
    }
}

/// [`bench_result`] for a runtime-selected kind.
pub fn bench_result_for(
    kind: ScalarKind,
    n: usize,
    seed: u64,
    policy: RoundingPolicy,
) -> Result<Vec<f64>, KernelError> {
    match kind {
        ScalarKind::F64 => Ok(bench_result::<f64>(n, seed)),
        ScalarKind::F32 => Ok(bench_result::<f32>(n, seed)),
        ScalarKind::F16 => Ok(crate::with_f16_policy!(policy, H => bench_result::<H>(n, seed))),
        ScalarKind::Mixed => Err(KernelError::UnsupportedKind(kind)),
    }
}

/// Powers of two `2^min_exp ..= 2^max_exp`.
pub fn doubling_sizes(min_exp: u32, max_exp: u32) -> Vec<usize> {
    (min_exp..=max_exp).map(|e| 1usize << e).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::half::Half16;
    use crate::scalar::F16;

    fn quick() -> AxpyBenchConfig {
        AxpyBenchConfig {
            protocol: TimingProtocol {
                warmup_calls: 1,
                min_sample_time: Duration::from_micros(50),
                samples: 3,
            },
            ..Default::default()
        }
    }

    #[test]
    fn zero_multiplier_leaves_y() {
        let x = vec![1.5, -2.0, f64::MAX];
        let mut y = vec![0.25, -0.0, 7.0];
        let before: Vec<u64> = y.iter().map(|v: &f64| v.to_bits()).collect();
        axpy_inplace(0.0, &x, &mut y).unwrap();
        let after: Vec<u64> = y.iter().map(|v| v.to_bits()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn hand_example() {
        let mut y = vec![1.0, 1.0, 1.0];
        axpy_inplace(2.0, &[1.0, 2.0, 3.0], &mut y).unwrap();
        assert_eq!(y, vec![3.0, 5.0, 7.0]);
    }

    #[test]
    fn f16_overflow() {
        type H = F16;
        let max = F16(Half16::MAX);
        let mut y = vec![max];
        axpy_inplace(H::from_f64(1.0, ()), &[max], &mut y).unwrap();
        assert_eq!(y[0].0, Half16::INFINITY);
    }

    #[test]
    fn length_mismatch() {
        let mut y = vec![0.0; 2];
        assert_eq!(
            axpy_inplace(1.0, &[1.0; 3], &mut y),
            Err(KernelError::LengthMismatch { x: 3, y: 2 })
        );
    }

    #[test]
    fn bench_structure() {
        let sizes = doubling_sizes(4, 8);
        let report = bench_axpy(ScalarKind::F64, &sizes, &quick()).unwrap();
        assert_eq!(report.records.len(), 5);
        for (r, &n) in report.records.iter().zip(&sizes) {
            assert_eq!(r.size, n);
            assert!(r.t_min <= r.t_median);
            assert_eq!(r.rate, 2.0 * n as f64 / r.t_min);
            assert!(r.rate > 0.0);
        }
    }

    #[test]
    fn cold_mode_and_memory_cap() {
        let cfg = AxpyBenchConfig {
            cold: true,
            cold_footprint_bytes: 1 << 16,
            memory_cap_bytes: 1 << 20,
            ..quick()
        };
        let report = bench_axpy(ScalarKind::F32, &[16, 1 << 20, 64], &cfg).unwrap();
        assert_eq!(
            report.records.iter().map(|r| r.size).collect::<Vec<_>>(),
            vec![16, 64]
        );
        assert!(matches!(report.skipped[0], (n, KernelError::MemoryCap { .. }) if n == 1 << 20));
    }

    #[test]
    fn results_are_reproducible() {
        for kind in [ScalarKind::F64, ScalarKind::F32, ScalarKind::F16] {
            let a = bench_result_for(kind, 1000, 7, RoundingPolicy::default()).unwrap();
            let b = bench_result_for(kind, 1000, 7, RoundingPolicy::default()).unwrap();
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a), bits(&b));
        }
        assert!(bench_axpy(ScalarKind::Mixed, &[4], &quick()).is_err());
    }
}
