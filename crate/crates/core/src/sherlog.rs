//! Range instrumentation: a shadow number that behaves exactly like the
//! format it wraps and logs the base-2 magnitude of every arithmetic result.
//!
//! Running a program once with `Sherlog<T>` and once with `T` gives bitwise
//! identical numbers; the histogram then shows where magnitudes sit relative
//! to a target format's normal range and which power-of-two scaling would
//! centre them.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::{Scalar, ScalarKind};

pub const MIN_EXPONENT: i32 = -64;
pub const MAX_EXPONENT: i32 = 64;
const BINS: usize = (MAX_EXPONENT - MIN_EXPONENT + 1) as usize;

/// Smallest binary16 subnormal.
pub const F16_SUBNORMAL_LO: f64 = 5.960464477539063e-8;
/// Smallest binary16 normal.
pub const F16_SUBNORMAL_HI: f64 = 6.103515625e-5;

#[derive(Debug, Error, PartialEq)]
pub enum SherlogError {
    #[error("invalid magnitude range [{lo}, {hi}): bounds must be positive and increasing")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("histogram is empty")]
    Empty,
}

/// Counts of `floor(log2 |x|)` clamped to `[-64, 64]`, plus zeros, infinities
/// and NaNs.
#[derive(Clone, PartialEq, Eq)]
pub struct LogHistogram {
    bins: [u64; BINS],
    zero: u64,
    inf: u64,
    nan: u64,
    total: u64,
}

impl Default for LogHistogram {
    fn default() -> Self {
        Self {
            bins: [0; BINS],
            zero: 0,
            inf: 0,
            nan: 0,
            total: 0,
        }
    }
}

impl fmt::Debug for LogHistogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogHistogram")
            .field("total", &self.total)
            .field("zero", &self.zero)
            .field("inf", &self.inf)
            .field("nan", &self.nan)
            .field("bins", &self.nonzero_bins().collect::<Vec<_>>())
            .finish()
    }
}

/// `floor(log2 |x|)` for finite non-zero `x`, read off the bit pattern.
pub fn exponent_of(x: f64) -> i32 {
    let bits = x.to_bits() & !(1u64 << 63);
    let biased = (bits >> 52) as i32;
    if biased == 0 {
        // subnormal binary64: position of the leading mantissa bit
        let man = bits & ((1u64 << 52) - 1);
        -1022 - (man.leading_zeros() as i32 - 11)
    } else {
        biased - 1023
    }
}

impl LogHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, x: f64) {
        self.total += 1;
        if x.is_nan() {
            self.nan += 1;
        } else if x.is_infinite() {
            self.inf += 1;
        } else if x == 0.0 {
            self.zero += 1;
        } else {
            let e = exponent_of(x).clamp(MIN_EXPONENT, MAX_EXPONENT);
            self.bins[(e - MIN_EXPONENT) as usize] += 1;
        }
    }

    pub fn merge(&mut self, other: &LogHistogram) {
        for (a, b) in self.bins.iter_mut().zip(other.bins.iter()) {
            *a += b;
        }
        self.zero += other.zero;
        self.inf += other.inf;
        self.nan += other.nan;
        self.total += other.total;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn zero_count(&self) -> u64 {
        self.zero
    }

    pub fn inf_count(&self) -> u64 {
        self.inf
    }

    pub fn nan_count(&self) -> u64 {
        self.nan
    }

    pub fn bin(&self, exponent: i32) -> u64 {
        if (MIN_EXPONENT..=MAX_EXPONENT).contains(&exponent) {
            self.bins[(exponent - MIN_EXPONENT) as usize]
        } else {
            0
        }
    }

    /// `(exponent, count)` for every bin, lowest exponent first.
    pub fn bins(&self) -> impl Iterator<Item = (i32, u64)> + '_ {
        self.bins
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as i32 + MIN_EXPONENT, c))
    }

    pub fn nonzero_bins(&self) -> impl Iterator<Item = (i32, u64)> + '_ {
        self.bins().filter(|&(_, c)| c > 0)
    }

    /// Fraction of all records whose magnitude bin overlaps `[lo, hi)`.
    ///
    /// Works at bin granularity, so a bin straddling a bound counts in full.
    /// Empty histograms give 0.
    pub fn subnormal_fraction(&self, lo: f64, hi: f64) -> Result<f64, SherlogError> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(SherlogError::InvalidRange { lo, hi });
        }
        if self.total == 0 {
            return Ok(0.0);
        }
        let hits: u64 = self
            .bins()
            .filter(|&(e, _)| {
                let bin_lo = 2f64.powi(e);
                let bin_hi = 2f64.powi(e + 1);
                bin_lo < hi && bin_hi > lo
            })
            .map(|(_, c)| c)
            .sum();
        Ok(hits as f64 / self.total as f64)
    }

    /// Occupancy of the binary16 subnormal range.
    pub fn f16_subnormal_fraction(&self) -> f64 {
        self.subnormal_fraction(F16_SUBNORMAL_LO, F16_SUBNORMAL_HI)
            .expect("constant range is valid")
    }

    /// Exponent `k` such that scaling every value by `2^k` moves the median
    /// recorded exponent to 0. With an even count the lower middle exponent
    /// is used, which favours the larger scale. Zeros, infinities and NaNs
    /// carry no exponent and are ignored; if nothing else was recorded the
    /// answer is 0.
    pub fn suggest_scale_exponent(&self) -> Result<i32, SherlogError> {
        if self.total == 0 {
            return Err(SherlogError::Empty);
        }
        let n: u64 = self.bins.iter().sum();
        if n == 0 {
            return Ok(0);
        }
        // 0-based rank of the lower median
        let target = (n - 1) / 2;
        let mut seen = 0;
        for (e, c) in self.bins() {
            seen += c;
            if seen > target {
                return Ok(-e);
            }
        }
        unreachable!("bin counts sum to n")
    }

    /// The power of two `s` from [`Self::suggest_scale_exponent`].
    pub fn suggest_scale(&self) -> Result<f64, SherlogError> {
        self.suggest_scale_exponent().map(|k| 2f64.powi(k))
    }
}

/// Accumulation context shared by all numbers of one instrumented run.
///
/// Single-threaded; give each thread its own recorder and merge the
/// histograms afterwards.
#[derive(Default, Debug)]
pub struct Recorder {
    hist: RefCell<LogHistogram>,
}

impl Recorder {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn record(&self, x: f64) {
        self.hist.borrow_mut().record(x);
    }

    pub fn histogram(&self) -> LogHistogram {
        self.hist.borrow().clone()
    }

    pub fn take(&self) -> LogHistogram {
        self.hist.take()
    }
}

/// A `T` that logs every arithmetic result to its recorder.
#[derive(Clone, Copy)]
pub struct Sherlog<'r, T: Scalar> {
    pub value: T,
    recorder: &'r Recorder,
    base_ctx: T::Context,
}

impl<'r, T: Scalar> Sherlog<'r, T> {
    pub fn new(value: T, recorder: &'r Recorder) -> Self {
        Self {
            base_ctx: value.context(),
            value,
            recorder,
        }
    }

    pub fn recorder(&self) -> &'r Recorder {
        self.recorder
    }

    #[inline]
    fn emit(self, value: T) -> Self {
        self.recorder.record(value.to_f64());
        Self { value, ..self }
    }

    #[inline]
    fn check_shared(&self, other: &Self) {
        debug_assert!(
            std::ptr::eq(self.recorder, other.recorder),
            "operands belong to different recorders"
        );
    }
}

impl<T: Scalar> fmt::Debug for Sherlog<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sherlog({:?})", self.value)
    }
}

impl<T: Scalar> PartialEq for Sherlog<'_, T> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl<T: Scalar> PartialOrd for Sherlog<'_, T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

macro_rules! sherlog_binop {
    ($tr:ident, $method:ident) => {
        impl<T: Scalar> $tr for Sherlog<'_, T> {
            type Output = Self;
            #[inline]
            fn $method(self, rhs: Self) -> Self {
                self.check_shared(&rhs);
                self.emit($tr::$method(self.value, rhs.value))
            }
        }
    };
}

sherlog_binop!(Add, add);
sherlog_binop!(Sub, sub);
sherlog_binop!(Mul, mul);
sherlog_binop!(Div, div);

/// Sign flips are not recorded: they cannot change a magnitude.
impl<T: Scalar> Neg for Sherlog<'_, T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            value: -self.value,
            ..self
        }
    }
}

impl<'r, T: Scalar> Scalar for Sherlog<'r, T> {
    type Context = (&'r Recorder, T::Context);
    const KIND: ScalarKind = T::KIND;

    fn from_f64(x: f64, (recorder, base_ctx): Self::Context) -> Self {
        Self {
            value: T::from_f64(x, base_ctx),
            recorder,
            base_ctx,
        }
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self.value.to_f64()
    }

    fn context(self) -> Self::Context {
        (self.recorder, self.base_ctx)
    }

    /// One record for the final result, whatever the base rounding.
    #[inline]
    fn mul_add(self, b: Self, c: Self) -> Self {
        self.check_shared(&b);
        self.check_shared(&c);
        self.emit(self.value.mul_add(b.value, c.value))
    }

    #[inline]
    fn sqrt(self) -> Self {
        self.emit(self.value.sqrt())
    }

    #[inline]
    fn is_finite(self) -> bool {
        self.value.is_finite()
    }
}
