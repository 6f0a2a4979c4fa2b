//! IMB-style message-passing benchmarks over a pluggable transport.
//!
//! Ranks are independent workers that talk only through [`Transport`]; the
//! in-process [`ChannelTransport`] world runs each rank on its own thread.
//! Timing goes through [`Clock`] so that a scripted [`FakeClock`] makes every
//! reported latency an exact, predictable number.

mod bench;
mod clock;
mod collectives;
mod transport;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::RngCore;
use thiserror::Error;

use crate::rng::{stream, streams};

pub use bench::{collective_bench, pingpong, NetRow};
pub use clock::{Clock, FakeClock, MonotonicClock, TickOnRecv};
pub use collectives::{allreduce, barrier, broadcast, gatherv, reduce, serial_reduce};
pub use transport::{channel_world, ChannelTransport, Transport};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum NetError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("payload corrupted at size {size}, repetition {rep}")]
    Integrity { size: usize, rep: usize },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("{op} result on rank {rank} differs from the serial reference at size {size}")]
    Correctness { op: NetOp, rank: usize, size: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NetOp {
    PingPong,
    Reduce,
    Allreduce,
    Gatherv,
}

impl NetOp {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PingPong => "pingpong",
            Self::Reduce => "reduce",
            Self::Allreduce => "allreduce",
            Self::Gatherv => "gatherv",
        }
    }
}

impl fmt::Display for NetOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pingpong" => Ok(Self::PingPong),
            "reduce" => Ok(Self::Reduce),
            "allreduce" => Ok(Self::Allreduce),
            "gatherv" => Ok(Self::Gatherv),
            _ => Err(format!(
                "unknown operation `{s}` (pingpong, reduce, allreduce, gatherv)"
            )),
        }
    }
}

/// Elementwise binary64 reduction. Applied as `op(lower rank, higher rank)`
/// with the binomial tree's bracketing; the caller is responsible for
/// commutativity and associativity of custom operators.
#[derive(Clone)]
pub enum ReduceOp {
    Sum,
    Max,
    Custom {
        name: String,
        f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    },
}

impl ReduceOp {
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    #[inline]
    pub fn apply(&self, a: f64, b: f64) -> f64 {
        match self {
            Self::Sum => a + b,
            Self::Max => a.max(b),
            Self::Custom { f, .. } => f(a, b),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Sum => "sum",
            Self::Max => "max",
            Self::Custom { name, .. } => name,
        }
    }
}

impl fmt::Debug for ReduceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ReduceOp({})", self.name())
    }
}

/// Number of disjoint buffer copies rotated through with cache avoidance.
pub const CACHE_COPIES: usize = 16;

/// How many timed repetitions each message size gets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Repetitions {
    /// 1000 up to 4 KiB, halved per doubling above that, at least 10.
    Imb,
    Fixed(usize),
}

impl Repetitions {
    pub fn count(self, size: usize) -> usize {
        match self {
            Self::Fixed(n) => n,
            Self::Imb => {
                let mut reps = 1000;
                let mut s = 4096;
                while s < size && reps > 10 {
                    s *= 2;
                    reps /= 2;
                }
                reps.max(10)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetBenchConfig {
    /// Message sizes in bytes, ascending.
    pub msg_sizes: Vec<usize>,
    pub warmup_iters: usize,
    pub repetitions: Repetitions,
    pub cache_avoidance: bool,
    pub seed: u64,
}

/// 0 and the powers of two up to 4 MiB.
pub fn default_sizes() -> Vec<usize> {
    std::iter::once(0).chain((0..=22).map(|k| 1 << k)).collect()
}

impl Default for NetBenchConfig {
    fn default() -> Self {
        Self {
            msg_sizes: default_sizes(),
            warmup_iters: 10,
            repetitions: Repetitions::Imb,
            cache_avoidance: false,
            seed: crate::rng::DEFAULT_SEED,
        }
    }
}

impl NetBenchConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        if self.msg_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NetError::Config(
                "message sizes must be strictly ascending".into(),
            ));
        }
        if self.repetitions == Repetitions::Fixed(0) {
            return Err(NetError::Config("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Seeded byte pattern used as message payload.
pub fn payload(seed: u64, len: usize) -> Vec<u8> {
    let mut buf = vec![0u8; len];
    stream(seed, streams::NET_PAYLOAD).fill_bytes(&mut buf);
    buf
}

/// One buffer, or [`CACHE_COPIES`] separately allocated copies of it.
#[derive(Clone, Debug)]
pub struct BufferPool<T> {
    copies: Vec<Vec<T>>,
}

impl<T: Clone> BufferPool<T> {
    pub fn new(data: &[T], cache_avoidance: bool) -> Self {
        let n = if cache_avoidance { CACHE_COPIES } else { 1 };
        Self {
            copies: (0..n).map(|_| data.to_vec()).collect(),
        }
    }

    /// Buffer for repetition `rep`.
    pub fn get(&self, rep: usize) -> &[T] {
        &self.copies[rep % self.copies.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repetition_schedule() {
        let r = Repetitions::Imb;
        assert_eq!(r.count(0), 1000);
        assert_eq!(r.count(4096), 1000);
        assert_eq!(r.count(8192), 500);
        assert_eq!(r.count(1 << 22), 10);
        assert_eq!(Repetitions::Fixed(3).count(1 << 22), 3);
    }

    #[test]
    fn default_config_is_valid() {
        let c = NetBenchConfig::default();
        c.validate().unwrap();
        assert_eq!(c.msg_sizes.len(), 24);
        let bad = NetBenchConfig {
            msg_sizes: vec![4, 2],
            ..c
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn pool_rotates_distinct_copies() {
        let data = payload(1, 64);
        let pool = BufferPool::new(&data, true);
        let addrs: std::collections::HashSet<_> =
            (0..CACHE_COPIES).map(|r| pool.get(r).as_ptr()).collect();
        assert_eq!(addrs.len(), CACHE_COPIES);
        assert!((0..40).all(|r| pool.get(r) == data.as_slice()));
        let hot = BufferPool::new(&data, false);
        assert_eq!(hot.get(0).as_ptr(), hot.get(7).as_ptr());
    }

    #[test]
    fn op_names_roundtrip() {
        for op in [
            NetOp::PingPong,
            NetOp::Reduce,
            NetOp::Allreduce,
            NetOp::Gatherv,
        ] {
            assert_eq!(op.as_str().parse::<NetOp>().unwrap(), op);
        }
        assert!("bcast".parse::<NetOp>().is_err());
    }
}
