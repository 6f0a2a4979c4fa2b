//! Shallow-water model on a closed double-gyre basin, generic over the
//! number format, with power-of-two field scaling and compensated time
//! integration.

mod fields;
mod integrate;
mod params;
mod rhs;
mod run;
pub mod snapshot;

use thiserror::Error;

pub use fields::{CompensatedState, Fields, Layout, SwmState};
pub use integrate::{compensated_update, rk4_increment, Rk4};
pub use params::{check_scale, SwmParams, CFL_SAFETY};
pub use rhs::{momentum_units, rhs, NonFinite, Stencil, MOMENTUM_UNIT_TARGET};
pub use run::{
    apply_scaling, calibrate_scale, initial_eta, rk4_step, run_simulation, run_with, unscale,
    Diagnostics, SwmOutput,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwmError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical blowup at step {step}")]
    Blowup { step: usize },
}
