use crate::scalar::Scalar;

use super::rhs::NonFinite;

/// Scratch space for classical fourth-order Runge-Kutta increments.
#[derive(Clone, Debug)]
pub struct Rk4<T> {
    k: Vec<T>,
    stage: Vec<T>,
    acc: Vec<T>,
    two: T,
    segments: Vec<Segment<T>>,
}

/// Stage weights for a run of elements whose tendencies come out in a time
/// unit of `units` steps.
#[derive(Clone, Debug)]
struct Segment<T> {
    len: usize,
    half: T,
    one: T,
    sixth: T,
}

impl<T: Scalar> Rk4<T> {
    /// All tendencies in units of one step.
    pub fn new(len: usize, ctx: T::Context) -> Self {
        Self::with_units(&[(len, 1.0)], ctx)
    }

    /// Consecutive segments `(length, units)`: `f` returns `units * dt *
    /// dy/dt` on each.
    pub fn with_units(segments: &[(usize, f64)], ctx: T::Context) -> Self {
        let len = segments.iter().map(|s| s.0).sum();
        let zero = T::from_f64(0.0, ctx);
        let c = |x: f64| T::from_f64(x, ctx);
        Self {
            k: vec![zero; len],
            stage: vec![zero; len],
            acc: vec![zero; len],
            two: c(2.0),
            segments: segments
                .iter()
                .map(|&(len, units)| Segment {
                    len,
                    half: c(0.5 / units),
                    one: c(1.0 / units),
                    sixth: c(1.0 / (6.0 * units)),
                })
                .collect(),
        }
    }

    /// `out = (k1 + 2 k2 + 2 k3 + k4) / 6` in units of one step, where `f`
    /// includes the time step, i.e. `f(y) = units * dt * dy/dt`.
    #[allow(clippy::needless_range_loop)]
    pub fn increment(
        &mut self,
        y: &[T],
        out: &mut [T],
        mut f: impl FnMut(&[T], &mut [T]) -> Result<(), NonFinite>,
    ) -> Result<(), NonFinite> {
        let n = y.len();
        assert_eq!(self.k.len(), n);
        assert_eq!(out.len(), n);

        f(y, &mut self.k)?;
        self.acc.copy_from_slice(&self.k);
        for _ in 0..2 {
            let mut start = 0;
            for seg in &self.segments {
                for i in start..start + seg.len {
                    self.stage[i] = y[i] + seg.half * self.k[i];
                }
                start += seg.len;
            }
            f(&self.stage, &mut self.k)?;
            for i in 0..n {
                self.acc[i] = self.acc[i] + self.two * self.k[i];
            }
        }
        let mut start = 0;
        for seg in &self.segments {
            for i in start..start + seg.len {
                self.stage[i] = y[i] + seg.one * self.k[i];
            }
            start += seg.len;
        }
        f(&self.stage, &mut self.k)?;
        let mut start = 0;
        for seg in &self.segments {
            for i in start..start + seg.len {
                out[i] = (self.acc[i] + self.k[i]) * seg.sixth;
            }
            start += seg.len;
        }
        Ok(())
    }
}

/// One-off RK4 increment of `y` under `f`.
pub fn rk4_increment<T: Scalar>(
    y: &[T],
    ctx: T::Context,
    f: impl FnMut(&[T], &mut [T]) -> Result<(), NonFinite>,
) -> Result<Vec<T>, NonFinite> {
    let mut rk = Rk4::new(y.len(), ctx);
    let mut out = vec![T::from_f64(0.0, ctx); y.len()];
    rk.increment(y, &mut out, f)?;
    Ok(out)
}

/// Add `delta` to `sum`. With `compensated`, the low-order part lost by each
/// addition is kept in `carry` and fed into the next one (Kahan).
pub fn compensated_update<A: Scalar>(
    sum: &mut [A],
    carry: &mut [A],
    delta: &[A],
    compensated: bool,
) {
    assert_eq!(sum.len(), delta.len());
    assert_eq!(carry.len(), delta.len());
    if !compensated {
        for (s, &d) in sum.iter_mut().zip(delta) {
            *s = *s + d;
        }
        return;
    }
    for ((s, c), &d) in sum.iter_mut().zip(carry.iter_mut()).zip(delta) {
        let y = d + *c;
        let t = *s + y;
        *c = y - (t - *s);
        *s = t;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::half::Half16;
    use crate::scalar::F16;

    #[test]
    fn fixed_point_has_zero_increment() {
        let y = vec![1.0, -2.0, 3.5];
        let d = rk4_increment(&y, (), |_, k| {
            k.fill(0.0);
            Ok(())
        })
        .unwrap();
        assert_eq!(d, vec![0.0; 3]);
    }

    #[test]
    fn exponential_growth() {
        let dt = 0.1;
        let d = rk4_increment(&[1.0f64], (), |y, k| {
            k[0] = dt * y[0];
            Ok(())
        })
        .unwrap();
        let expect = dt + dt * dt / 2.0 + dt.powi(3) / 6.0 + dt.powi(4) / 24.0;
        assert!((d[0] - expect).abs() <= 1e-15, "{}", d[0]);
        assert!((d[0] - 0.105_170_833_333_333_33).abs() <= 1e-15);
    }

    #[test]
    fn time_units_cancel() {
        let dt = 0.1;
        let mut rk = Rk4::with_units(&[(1, 1.0), (1, 64.0)], ());
        let mut out = [0.0; 2];
        rk.increment(&[1.0, 1.0], &mut out, |y, k| {
            k[0] = dt * y[0];
            k[1] = 64.0 * dt * y[1];
            Ok(())
        })
        .unwrap();
        assert_eq!(out[0], out[1]);
    }

    #[test]
    fn blowup_propagates() {
        let r = rk4_increment(&[1.0f64], (), |_, _| Err(NonFinite));
        assert_eq!(r, Err(NonFinite));
    }

    #[test]
    fn zero_increment_is_identity() {
        let mut s = vec![1.0f64, -2.5, 1e-300];
        let before: Vec<u64> = s.iter().map(|x| x.to_bits()).collect();
        let mut c = vec![0.0; 3];
        compensated_update(&mut s, &mut c, &[0.0; 3], true);
        assert_eq!(s.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), before);
        assert!(c.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn f16_accumulation_stalls_without_carry() {
        type H = F16;
        let one = H::from_f64(1.0, ());
        let run = |compensated| {
            let mut s = [H::from_f64(2048.0, ())];
            let mut c = [H::from_f64(0.0, ())];
            for _ in 0..512 {
                compensated_update(&mut s, &mut c, &[one], compensated);
            }
            s[0].to_f64()
        };
        assert_eq!(run(false), 2048.0);
        assert_eq!(run(true), 2560.0);
        assert_eq!(
            H::from_f64(2048.0, ()).0.to_f64() + 2.0,
            Half16::from_f64(2050.0, Default::default()).to_f64()
        );
    }
}
