//! Collective operations built from point-to-point messages.

use super::transport::Transport;
use super::{NetError, ReduceOp};

pub(super) fn encode(x: &[f64]) -> Vec<u8> {
    x.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub(super) fn decode(b: &[u8]) -> Result<Vec<f64>, NetError> {
    if b.len() % 8 != 0 {
        return Err(NetError::Protocol(format!(
            "{} bytes is not a whole number of f64",
            b.len()
        )));
    }
    Ok(b.chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

/// Binomial-tree reduction to rank 0. In round `k`, rank `r` with
/// `r % 2^(k+1) == 0` combines `acc = op(acc, acc of r + 2^k)`. Returns the
/// result on rank 0 and `None` elsewhere.
pub fn reduce<T: Transport + ?Sized>(
    t: &T,
    data: &[f64],
    op: &ReduceOp,
) -> Result<Option<Vec<f64>>, NetError> {
    let (rank, n) = (t.rank(), t.size());
    let mut acc = data.to_vec();
    let mut stride = 1;
    while stride < n {
        if rank % (2 * stride) != 0 {
            t.send(rank - stride, &encode(&acc))?;
            return Ok(None);
        }
        if rank + stride < n {
            let other = decode(&t.recv(rank + stride)?)?;
            if other.len() != acc.len() {
                return Err(NetError::Protocol(format!(
                    "rank {} sent {} elements, expected {}",
                    rank + stride,
                    other.len(),
                    acc.len()
                )));
            }
            for (a, b) in acc.iter_mut().zip(other) {
                *a = op.apply(*a, b);
            }
        }
        stride *= 2;
    }
    Ok(Some(acc))
}

/// Binomial-tree broadcast of rank 0's `buf`; other ranks' `buf` is ignored.
pub fn broadcast<T: Transport + ?Sized>(t: &T, buf: Vec<u8>) -> Result<Vec<u8>, NetError> {
    let (rank, n) = (t.rank(), t.size());
    // the lowest set bit of a nonzero rank is the stride it receives at
    let mut stride = n.next_power_of_two();
    let buf = if rank == 0 {
        buf
    } else {
        stride = 1 << rank.trailing_zeros();
        t.recv(rank - stride)?
    };
    stride /= 2;
    while stride > 0 {
        if rank + stride < n {
            t.send(rank + stride, &buf)?;
        }
        stride /= 2;
    }
    Ok(buf)
}

/// Reduction to rank 0 followed by a broadcast of the result.
pub fn allreduce<T: Transport + ?Sized>(
    t: &T,
    data: &[f64],
    op: &ReduceOp,
) -> Result<Vec<f64>, NetError> {
    let root = reduce(t, data, op)?;
    let bytes = broadcast(t, root.map(|r| encode(&r)).unwrap_or_default())?;
    decode(&bytes)
}

/// Every rank sends its chunk to rank 0, which returns the concatenation in
/// rank order. `counts[r]` is the number of bytes rank `r` contributes.
pub fn gatherv<T: Transport + ?Sized>(
    t: &T,
    chunk: &[u8],
    counts: &[usize],
) -> Result<Option<Vec<u8>>, NetError> {
    let (rank, n) = (t.rank(), t.size());
    if counts.len() != n {
        return Err(NetError::Protocol(format!(
            "{} counts for {n} ranks",
            counts.len()
        )));
    }
    let mismatch = |r: usize, got: usize| {
        NetError::Protocol(format!(
            "rank {r} contributed {got} bytes, declared {}",
            counts[r]
        ))
    };
    if chunk.len() != counts[rank] {
        return Err(mismatch(rank, chunk.len()));
    }
    if rank != 0 {
        t.send(0, chunk)?;
        return Ok(None);
    }
    let mut out = Vec::with_capacity(counts.iter().sum());
    out.extend_from_slice(chunk);
    for (src, &want) in counts.iter().enumerate().take(n).skip(1) {
        let m = t.recv(src)?;
        if m.len() != want {
            return Err(mismatch(src, m.len()));
        }
        out.extend_from_slice(&m);
    }
    Ok(Some(out))
}

/// No rank leaves before every rank has entered.
pub fn barrier<T: Transport + ?Sized>(t: &T) -> Result<(), NetError> {
    let (rank, n) = (t.rank(), t.size());
    if rank == 0 {
        for src in 1..n {
            t.recv(src)?;
        }
        for dest in 1..n {
            t.send(dest, &[])?;
        }
    } else {
        t.send(0, &[])?;
        t.recv(0)?;
    }
    Ok(())
}

/// Reduction of `inputs[rank]` computed serially with the same bracketing as
/// [`reduce`].
pub fn serial_reduce(inputs: &[Vec<f64>], op: &ReduceOp) -> Vec<f64> {
    let n = inputs.len();
    let mut acc = inputs.to_vec();
    let mut stride = 1;
    while stride < n {
        for r in (0..n).step_by(2 * stride) {
            if r + stride < n {
                let other = std::mem::take(&mut acc[r + stride]);
                for (a, b) in acc[r].iter_mut().zip(other) {
                    *a = op.apply(*a, b);
                }
            }
        }
        stride *= 2;
    }
    acc.swap_remove(0)
}
