//! Precision-flexible numerics: a software binary16 type, range
//! instrumentation, BLAS-1 kernels, a shallow-water model and a
//! message-passing benchmark engine.

pub mod half;
pub mod kernels;
pub mod netbench;
pub mod precision_bench;
pub mod rng;
pub mod scalar;
pub mod sherlog;
pub mod swm;

pub use half::{FpClass, Half16, MulAddMode, RoundingPolicy};
pub use scalar::{Scalar, ScalarKind, F16};
pub use sherlog::{LogHistogram, Recorder, Sherlog};
