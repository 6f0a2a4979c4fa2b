use lowprec_core::sherlog::Recorder;
use lowprec_core::swm::{
    calibrate_scale, initial_eta, rhs, rk4_step, run_simulation, run_with, Fields, Layout,
    SwmParams, SwmState,
};
use lowprec_core::{RoundingPolicy, Scalar, ScalarKind, Sherlog};
use lowprec_oracle::stencil::{self, relative_max_error, Setup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(p: &SwmParams) -> Setup {
    Setup {
        nx: p.nx,
        ny: p.ny,
        lx: p.lx,
        ly: p.ly,
        g: p.g,
        depth: p.depth,
        f0: p.f0,
        beta: p.beta,
        wind: p.wind_amplitude,
        nu4: p.nu4,
        r_bottom: p.r_bottom,
        nonlinear: p.nonlinear,
    }
}

/// A rough but smooth-ish state with realistic magnitudes.
fn random_state(p: &SwmParams, seed: u64) -> Fields<f64> {
    let l = Layout::new(p.nx, p.ny);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Fields::<f64>::zeros(l, ());
    let (u, v, eta) = f.split_mut();
    for x in u.iter_mut() {
        *x = rng.random_range(-0.3..0.3);
    }
    for x in v.iter_mut() {
        *x = rng.random_range(-0.3..0.3);
    }
    for x in eta.iter_mut() {
        *x = rng.random_range(-5.0..5.0);
    }
    // walls
    for j in 0..p.ny {
        u[j * (p.nx + 1)] = 0.0;
        u[j * (p.nx + 1) + p.nx] = 0.0;
    }
    for i in 0..p.nx {
        v[i] = 0.0;
        v[p.ny * p.nx + i] = 0.0;
    }
    f
}

fn oracle_fields(f: &Fields<f64>) -> stencil::Fields {
    stencil::Fields {
        u: f.u().to_vec(),
        v: f.v().to_vec(),
        eta: f.eta().to_vec(),
    }
}

fn assert_close(ours: &Fields<f64>, oracle: &stencil::Fields, tol: f64) {
    for (name, a, b) in [
        ("u", ours.u(), &oracle.u),
        ("v", ours.v(), &oracle.v),
        ("eta", ours.eta(), &oracle.eta),
    ] {
        let e = relative_max_error(a, b);
        assert!(e <= tol, "{name}: relative error {e:e}");
    }
}

#[test]
fn rhs_matches_oracle() {
    for nonlinear in [false, true] {
        let p = SwmParams {
            nonlinear,
            ..SwmParams::desk(8, 8)
        };
        let f = random_state(&p, 11);
        let ours = rhs(&f, &p, ()).unwrap();
        let oracle = stencil::rhs(&setup(&p), &oracle_fields(&f));
        assert_close(&ours, &oracle, 1e-14);
    }
}

#[test]
fn rk4_step_matches_oracle() {
    for nonlinear in [false, true] {
        let p = SwmParams {
            nonlinear,
            ..SwmParams::desk(8, 8)
        };
        let f = random_state(&p, 12);
        let state = SwmState {
            fields: f.clone(),
            t: 0.0,
        };
        let ours = rk4_step(&state, &p, ()).unwrap();
        let oracle = stencil::rk4_increment(&setup(&p), &oracle_fields(&f), p.dt);
        assert_close(&ours, &oracle, 1e-14);
    }
}

#[test]
fn rhs_is_scale_covariant() {
    let p = SwmParams::desk(8, 8);
    let f = random_state(&p, 13);
    let s = 1024.0;
    let ps = SwmParams {
        scale_s: s,
        ..p.clone()
    };
    let a = rhs(&f, &p, ()).unwrap();
    let b = rhs(&f.map(|x| x * s), &ps, ()).unwrap();
    assert_eq!(a.map(|x| x * s), b);
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[test]
fn mass_is_conserved() {
    let p = SwmParams {
        n_steps: 1000,
        wind_amplitude: 0.0,
        r_bottom: 0.0,
        diag_every: 1000,
        ..SwmParams::desk(64, 32)
    };
    let out = run_simulation(&p, ScalarKind::F64, RoundingPolicy::default(), None).unwrap();
    let m0 = out.diagnostics[0].mean_eta;
    let m1 = out.diagnostics.last().unwrap().mean_eta;
    assert_eq!(m0, mean(&initial_eta(&p)));
    assert!(((m1 - m0) / m0).abs() <= 1e-12, "drift {m0} -> {m1}");
    assert!(out.diagnostics.last().unwrap().mean_ke > 0.0);
}

#[test]
fn compensation_is_near_noop_in_f64() {
    let p = SwmParams {
        n_steps: 10,
        ..SwmParams::desk(32, 16)
    };
    let a = run_simulation(&p, ScalarKind::F64, RoundingPolicy::default(), None).unwrap();
    let b = run_simulation(
        &SwmParams {
            compensated: false,
            ..p
        },
        ScalarKind::F64,
        RoundingPolicy::default(),
        None,
    )
    .unwrap();
    let d = a
        .fields
        .data
        .iter()
        .zip(&b.fields.data)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(d <= 1e-12, "{d}");
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

#[test]
fn precision_ladder() {
    let p = SwmParams {
        n_steps: 100,
        ..SwmParams::desk(64, 32)
    };
    let run = |k| run_simulation(&p, k, RoundingPolicy::default(), None).unwrap();
    let r64 = run(ScalarKind::F64);
    let e = |k| rmse(run(k).fields.eta(), r64.fields.eta());
    let (e32, e16, emix) = (e(ScalarKind::F32), e(ScalarKind::F16), e(ScalarKind::Mixed));
    eprintln!("rmse f32 {e32:e} f16 {e16:e} mixed {emix:e}");
    assert!(e32.is_finite() && e16.is_finite());
    assert!(e32 < e16);
    assert!(emix <= e16);
}

#[test]
fn scaling_invariance() {
    for nonlinear in [false, true] {
        let p = SwmParams {
            n_steps: 100,
            nonlinear,
            ..SwmParams::desk(64, 32)
        };
        let a = run_simulation(&p, ScalarKind::F64, RoundingPolicy::default(), None).unwrap();
        let ps = SwmParams {
            scale_s: 1024.0,
            ..p.clone()
        };
        let b = run_simulation(&ps, ScalarKind::F64, RoundingPolicy::default(), None).unwrap();
        if nonlinear {
            let e = relative_max_error(b.fields.eta(), a.fields.eta());
            assert!(e <= 1e-12, "{e:e}");
        } else {
            assert_eq!(a.fields.eta(), b.fields.eta());
        }
    }
}

#[test]
fn instrumented_run_is_transparent() {
    let p = SwmParams {
        n_steps: 20,
        ..SwmParams::desk(64, 32)
    };
    let plain = run_with::<f64, f64>(&p, (), ()).unwrap();
    let rec = Recorder::new();
    let logged = run_with::<Sherlog<f64>, Sherlog<f64>>(&p, (&rec, ()), (&rec, ())).unwrap();
    assert_eq!(plain, logged);
    assert!(rec.histogram().total() > 0);
}

#[test]
fn suggested_scale_avoids_subnormals() {
    let p = SwmParams {
        n_steps: 100,
        ..SwmParams::desk(64, 32)
    };
    let s = calibrate_scale(&p, p.n_steps).unwrap();
    let frac = |s: f64| {
        let rec = Recorder::new();
        let ps = SwmParams {
            scale_s: s,
            ..p.clone()
        };
        run_simulation(&ps, ScalarKind::F16, RoundingPolicy::default(), Some(&rec)).unwrap();
        rec.take().f16_subnormal_fraction()
    };
    let (f1, fs) = (frac(1.0), frac(s));
    eprintln!("s = {s}: subnormal fraction {fs:e} vs {f1:e} at s = 1");
    assert!(fs < 1e-4);
    assert!(fs < f1);
}

#[test]
fn f16_scalar_is_reachable_generically() {
    let x = lowprec_core::F16::<false, false>::from_f64(1.0, ());
    assert_eq!(x.to_f64(), 1.0);
}
