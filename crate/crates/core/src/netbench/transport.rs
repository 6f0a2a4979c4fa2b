use std::sync::mpsc::{channel, Receiver, Sender};

use super::NetError;

/// Point-to-point byte transport between the ranks of one world.
///
/// Messages between a pair of ranks arrive in the order they were sent,
/// exactly once.
pub trait Transport: Send {
    fn rank(&self) -> usize;
    fn size(&self) -> usize;
    /// Enqueue a copy of `buf` for `dest` without waiting for it to be received.
    fn send(&self, dest: usize, buf: &[u8]) -> Result<(), NetError>;
    /// Block until the next message from `src` arrives.
    fn recv(&self, src: usize) -> Result<Vec<u8>, NetError>;
}

/// In-process endpoint backed by one channel per ordered pair of ranks.
#[derive(Debug)]
pub struct ChannelTransport {
    rank: usize,
    to: Vec<Sender<Vec<u8>>>,
    from: Vec<Receiver<Vec<u8>>>,
}

/// Endpoints for ranks `0..n`, to be moved into one worker each.
pub fn channel_world(n: usize) -> Vec<ChannelTransport> {
    // pairs[src][dest]
    let mut senders: Vec<Vec<Sender<Vec<u8>>>> = (0..n).map(|_| Vec::with_capacity(n)).collect();
    let mut receivers: Vec<Vec<Receiver<Vec<u8>>>> =
        (0..n).map(|_| Vec::with_capacity(n)).collect();
    for s in senders.iter_mut() {
        for r in receivers.iter_mut() {
            let (tx, rx) = channel();
            s.push(tx);
            r.push(rx);
        }
    }
    senders
        .into_iter()
        .zip(receivers)
        .enumerate()
        .map(|(rank, (to, from))| ChannelTransport { rank, to, from })
        .collect()
}

impl ChannelTransport {
    fn check(&self, peer: usize) -> Result<(), NetError> {
        if peer < self.to.len() {
            Ok(())
        } else {
            Err(NetError::Transport(format!(
                "rank {peer} out of range for a world of {}",
                self.to.len()
            )))
        }
    }
}

impl Transport for ChannelTransport {
    fn rank(&self) -> usize {
        self.rank
    }

    fn size(&self) -> usize {
        self.to.len()
    }

    fn send(&self, dest: usize, buf: &[u8]) -> Result<(), NetError> {
        self.check(dest)?;
        self.to[dest]
            .send(buf.to_vec())
            .map_err(|_| NetError::Transport(format!("rank {dest} hung up")))
    }

    fn recv(&self, src: usize) -> Result<Vec<u8>, NetError> {
        self.check(src)?;
        self.from[src]
            .recv()
            .map_err(|_| NetError::Transport(format!("rank {src} hung up")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_send() {
        let w = channel_world(1);
        w[0].send(0, b"abc").unwrap();
        assert_eq!(w[0].recv(0).unwrap(), b"abc");
    }

    #[test]
    fn out_of_range_peer() {
        let w = channel_world(2);
        assert!(matches!(w[0].send(2, b""), Err(NetError::Transport(_))));
    }

    #[test]
    fn hangup_is_an_error() {
        let mut w = channel_world(2);
        let b = w.pop().unwrap();
        drop(w);
        assert!(b.recv(0).is_err());
    }
}
