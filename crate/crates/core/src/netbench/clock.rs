use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use super::transport::Transport;
use super::NetError;

/// Monotonic time source in nanoseconds.
pub trait Clock {
    fn now(&self) -> u64;
}

/// Wall clock, counted from construction.
#[derive(Clone, Copy, Debug)]
pub struct MonotonicClock(Instant);

impl MonotonicClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    fn now(&self) -> u64 {
        self.0.elapsed().as_nanos() as u64
    }
}

/// Scripted clock that only moves when told to. Clones share the reading.
#[derive(Clone, Debug, Default)]
pub struct FakeClock {
    ns: Arc<AtomicU64>,
}

impl FakeClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, ns: u64) {
        self.ns.fetch_add(ns, Ordering::SeqCst);
    }
}

impl Clock for FakeClock {
    fn now(&self) -> u64 {
        self.ns.load(Ordering::SeqCst)
    }
}

/// Transport wrapper that advances a fake clock by a fixed step after
/// every completed receive.
#[derive(Debug)]
pub struct TickOnRecv<T> {
    pub inner: T,
    pub clock: FakeClock,
    pub step_ns: u64,
}

impl<T: Transport> Transport for TickOnRecv<T> {
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn size(&self) -> usize {
        self.inner.size()
    }

    fn send(&self, dest: usize, buf: &[u8]) -> Result<(), NetError> {
        self.inner.send(dest, buf)
    }

    fn recv(&self, src: usize) -> Result<Vec<u8>, NetError> {
        let m = self.inner.recv(src)?;
        self.clock.advance(self.step_ns);
        Ok(m)
    }
}
