//! Serial references for the collective operations.

/// Reduce `inputs[rank]` across ranks with the binomial bracketing: in round
/// `k` every rank `r` with `r % 2^(k+1) == 0` absorbs rank `r + 2^k` as
/// `acc[r] = op(acc[r], acc[r + 2^k])`.
pub fn binomial_reduce(inputs: &[Vec<f64>], op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut acc: Vec<Vec<f64>> = inputs.to_vec();
    let n = acc.len();
    let mut stride = 1;
    while stride < n {
        let mut r = 0;
        while r + stride < n {
            let (left, right) = acc.split_at_mut(r + stride);
            for (a, b) in left[r].iter_mut().zip(&right[0]) {
                *a = op(*a, *b);
            }
            r += 2 * stride;
        }
        stride *= 2;
    }
    acc.swap_remove(0)
}

/// Plain left fold over ranks `0..n`.
pub fn fold_left(inputs: &[Vec<f64>], op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut acc = inputs[0].clone();
    for row in &inputs[1..] {
        for (a, b) in acc.iter_mut().zip(row) {
            *a = op(*a, *b);
        }
    }
    acc
}

pub fn gatherv(chunks: &[Vec<u8>]) -> Vec<u8> {
    chunks.iter().flatten().copied().collect()
}
