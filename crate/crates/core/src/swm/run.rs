use rand::Rng;

use crate::half::RoundingPolicy;
use crate::rng::{stream, streams};
use crate::scalar::{Scalar, ScalarKind};
use crate::sherlog::{Recorder, Sherlog};

use super::fields::{Fields, Layout, SwmState};
use super::integrate::{compensated_update, Rk4};
use super::params::{check_scale, SwmParams};
use super::rhs::{momentum_units, NonFinite, Stencil};
use super::SwmError;

/// One row of the diagnostics time series, in physical units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub step: usize,
    pub t: f64,
    pub mean_eta: f64,
    /// Basin mean of `(u^2 + v^2) / 2` with both components averaged to
    /// cell centres.
    pub mean_ke: f64,
    pub max_u: f64,
}

impl Diagnostics {
    fn of(step: usize, t: f64, f: &Fields<f64>) -> Self {
        let Layout { nx, ny } = f.layout;
        let (u, v, eta) = (f.u(), f.v(), f.eta());
        let n = (nx * ny) as f64;
        let mean_eta = eta.iter().sum::<f64>() / n;
        let mut ke = 0.0;
        for j in 0..ny {
            for i in 0..nx {
                let uu = 0.5 * (u[j * (nx + 1) + i].powi(2) + u[j * (nx + 1) + i + 1].powi(2));
                let vv = 0.5 * (v[j * nx + i].powi(2) + v[(j + 1) * nx + i].powi(2));
                ke += 0.5 * (uu + vv);
            }
        }
        let max_u = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Self {
            step,
            t,
            mean_eta,
            mean_ke: ke / n,
            max_u,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwmOutput {
    pub kind: ScalarKind,
    pub integration_kind: ScalarKind,
    pub diagnostics: Vec<Diagnostics>,
    /// Prognostic fields after the last step, unscaled.
    pub fields: Fields<f64>,
    pub t: f64,
}

/// Interface noise for the initial condition, unscaled.
pub fn initial_eta(params: &SwmParams) -> Vec<f64> {
    let amp = params.perturbation * params.depth;
    let mut rng = stream(params.seed, streams::SWM_INIT);
    (0..params.nx * params.ny)
        .map(|_| amp * rng.random_range(-1.0..1.0))
        .collect()
}

/// Multiply every field by `s`.
pub fn apply_scaling(fields: &Fields<f64>, s: f64) -> Result<Fields<f64>, SwmError> {
    if s.is_nan() || s <= 0.0 {
        return Err(SwmError::Config(format!("scale s = {s} must be positive")));
    }
    Ok(fields.map(|x| x * s))
}

/// Divide every field by `s`.
pub fn unscale(fields: &Fields<f64>, s: f64) -> Fields<f64> {
    fields.map(|x| x / s)
}

fn stepper<T: Scalar>(params: &SwmParams, ctx: T::Context) -> (Stencil<T>, Rk4<T>) {
    let km = momentum_units(params);
    let layout = Layout::new(params.nx, params.ny);
    let stencil = Stencil::new(params, km * params.dt, params.dt, ctx);
    let rk = Rk4::with_units(&[(layout.nu() + layout.nv(), km), (layout.ne(), 1.0)], ctx);
    (stencil, rk)
}

/// Increment of one RK4 step of length `params.dt` for a (scaled) state.
pub fn rk4_step<T: Scalar>(
    state: &SwmState<T>,
    params: &SwmParams,
    ctx: T::Context,
) -> Result<Fields<T>, NonFinite> {
    let layout = state.fields.layout;
    let (mut stencil, mut rk) = stepper(params, ctx);
    let mut out = Fields::zeros(layout, ctx);
    rk.increment(&state.fields.data, &mut out.data, |y, k| stencil.eval(y, k))?;
    Ok(out)
}

/// Integrate with the model arithmetic in `T` and the state, carries and
/// update in `A`.
pub fn run_with<T: Scalar, A: Scalar>(
    params: &SwmParams,
    ctx_t: T::Context,
    ctx_a: A::Context,
) -> Result<SwmOutput, SwmError> {
    params.validate()?;
    let s = params.scale_s;
    let layout = Layout::new(params.nx, params.ny);
    let eta0 = initial_eta(params);
    let init = Fields::from_parts(
        layout,
        &vec![0.0; layout.nu()],
        &vec![0.0; layout.nv()],
        &eta0,
    );
    let init = apply_scaling(&init, s)?;

    let mut state: Vec<A> = init.data.iter().map(|&x| A::from_f64(x, ctx_a)).collect();
    let mut carry = vec![A::from_f64(0.0, ctx_a); layout.len()];
    let mut y_t = vec![T::from_f64(0.0, ctx_t); layout.len()];
    let mut delta_t = y_t.clone();
    let mut delta_a = carry.clone();

    let (mut stencil, mut rk) = stepper::<T>(params, ctx_t);

    let snapshot = |state: &[A]| Fields {
        layout,
        data: state.iter().map(|x| x.to_f64() / s).collect(),
    };
    let mut diagnostics = vec![Diagnostics::of(0, 0.0, &snapshot(&state))];
    let mut t = 0.0;

    for step in 1..=params.n_steps {
        for (yt, &ya) in y_t.iter_mut().zip(&state) {
            *yt = ya.convert(ctx_t);
        }
        rk.increment(&y_t, &mut delta_t, |y, k| stencil.eval(y, k))
            .map_err(|_| SwmError::Blowup { step })?;
        for (da, &dt) in delta_a.iter_mut().zip(&delta_t) {
            *da = dt.convert(ctx_a);
        }
        compensated_update(&mut state, &mut carry, &delta_a, params.compensated);
        if !state.iter().all(|x| x.is_finite()) {
            return Err(SwmError::Blowup { step });
        }
        t = step as f64 * params.dt;
        if step % params.diag_every == 0 || step == params.n_steps {
            diagnostics.push(Diagnostics::of(step, t, &snapshot(&state)));
        }
    }

    Ok(SwmOutput {
        kind: T::KIND,
        integration_kind: A::KIND,
        diagnostics,
        fields: snapshot(&state),
        t,
    })
}

fn run_pair<T: Scalar, A: Scalar>(
    params: &SwmParams,
    ctx_t: T::Context,
    ctx_a: A::Context,
    recorder: Option<&Recorder>,
) -> Result<SwmOutput, SwmError> {
    match recorder {
        None => run_with::<T, A>(params, ctx_t, ctx_a),
        Some(r) => run_with::<Sherlog<T>, Sherlog<A>>(params, (r, ctx_t), (r, ctx_a)),
    }
}

fn with_integration<T: Scalar>(
    params: &SwmParams,
    ctx_t: T::Context,
    integration: ScalarKind,
    policy: RoundingPolicy,
    recorder: Option<&Recorder>,
) -> Result<SwmOutput, SwmError> {
    match integration {
        ScalarKind::F64 => run_pair::<T, f64>(params, ctx_t, (), recorder),
        ScalarKind::F32 => run_pair::<T, f32>(params, ctx_t, (), recorder),
        ScalarKind::F16 => {
            crate::with_f16_policy!(policy, H => run_pair::<T, H>(params, ctx_t, (), recorder))
        }
        ScalarKind::Mixed => Err(SwmError::Config(
            "integration kind must be a single format (f64, f32 or f16)".into(),
        )),
    }
}

/// Run the model with arithmetic in `kind`. The time integration uses
/// `params.integration_kind` if set, otherwise `f32` for the mixed mode and
/// the model's own format for the rest. With a recorder, every arithmetic
/// result of the run is logged to it.
pub fn run_simulation(
    params: &SwmParams,
    kind: ScalarKind,
    policy: RoundingPolicy,
    recorder: Option<&Recorder>,
) -> Result<SwmOutput, SwmError> {
    let integration = params.integration_kind.unwrap_or(match kind {
        ScalarKind::Mixed => ScalarKind::F32,
        k => k,
    });
    match kind {
        ScalarKind::F64 => with_integration::<f64>(params, (), integration, policy, recorder),
        ScalarKind::F32 => with_integration::<f32>(params, (), integration, policy, recorder),
        ScalarKind::F16 | ScalarKind::Mixed => {
            crate::with_f16_policy!(policy, H => with_integration::<H>(params, (), integration, policy, recorder))
        }
    }
}

/// Power-of-two scale that centres the magnitudes of a short binary32 run
/// at `s = 1` around one.
pub fn calibrate_scale(params: &SwmParams, steps: usize) -> Result<f64, SwmError> {
    let probe = SwmParams {
        n_steps: steps,
        scale_s: 1.0,
        integration_kind: None,
        ..params.clone()
    };
    let recorder = Recorder::new();
    run_simulation(
        &probe,
        ScalarKind::F32,
        RoundingPolicy::default(),
        Some(&recorder),
    )?;
    let hist = recorder.take();
    let s = hist
        .suggest_scale()
        .map_err(|e| SwmError::Config(e.to_string()))?;
    check_scale(s)?;
    Ok(s)
}
