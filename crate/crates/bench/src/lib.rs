//! Shared fixtures for the criterion benchmarks.

use lowprec_core::swm::{initial_eta, Fields, Layout, SwmParams, SwmState};
use lowprec_core::Scalar;

/// Grid sizes timed by the step benchmark.
pub const SWM_GRIDS: [(usize, usize); 3] = [(32, 16), (64, 32), (128, 64)];

/// Vector lengths timed by the axpy benchmark.
pub fn axpy_sizes() -> Vec<usize> {
    lowprec_core::kernels::doubling_sizes(8, 20)
        .into_iter()
        .step_by(3)
        .collect()
}

/// The initial condition of a default run on `nx` x `ny`, in `T`.
pub fn swm_state<T: Scalar<Context = ()>>(nx: usize, ny: usize) -> (SwmParams, SwmState<T>) {
    let params = SwmParams::desk(nx, ny);
    let layout = Layout::new(nx, ny);
    let eta: Vec<T> = initial_eta(&params)
        .into_iter()
        .map(|x| T::from_f64(x, ()))
        .collect();
    let zero = T::from_f64(0.0, ());
    let fields = Fields::from_parts(
        layout,
        &vec![zero; layout.nu()],
        &vec![zero; layout.nv()],
        &eta,
    );
    (params, SwmState { fields, t: 0.0 })
}
