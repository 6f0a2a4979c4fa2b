//! Reference implementations that the test suites check the main library
//! against. Nothing here shares code with `lowprec-core`; every routine is
//! written from first principles so that agreement between the two is
//! meaningful.

pub mod binary16;
pub mod collectives;
pub mod stencil;
