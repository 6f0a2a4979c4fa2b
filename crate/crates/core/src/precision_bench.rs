//! Speed and accuracy of the shallow-water model across number formats and
//! grid sizes.

use std::fmt;
use std::time::Instant;

use crate::half::RoundingPolicy;
use crate::scalar::ScalarKind;
use crate::swm::{run_simulation, SwmError, SwmOutput, SwmParams};

/// Printed next to every sweep.
pub const HARDWARE_CAVEAT: &str = "speedups depend on the host: binary16 here is emulated in software and is \
expected to be slower than binary64; native half-precision hardware is needed to see low-precision speedups";

pub const DEFAULT_HORIZON: usize = 200;

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub base: SwmParams,
    /// Must contain `F64`, the baseline.
    pub kinds: Vec<ScalarKind>,
    pub sizes: Vec<(usize, usize)>,
    pub horizon: usize,
    pub policy: RoundingPolicy,
    /// Run all cases concurrently. Timings are then unreliable.
    pub parallel: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: SwmParams::default(),
            kinds: ScalarKind::ALL.to_vec(),
            sizes: vec![(64, 32), (128, 64), (256, 128)],
            horizon: DEFAULT_HORIZON,
            policy: RoundingPolicy::default(),
            parallel: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Diverged { step: usize },
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ok => f.write_str("ok"),
            Self::Diverged { .. } => f.write_str("diverged"),
        }
    }
}

/// One (kind, grid) case. Columns a diverged run cannot supply are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub kind: ScalarKind,
    pub nx: usize,
    pub ny: usize,
    pub steps: usize,
    /// Wall time of the compensated run.
    pub t_wall_s: Option<f64>,
    /// `t(F64) / t(kind)` on the same grid.
    pub speedup: Option<f64>,
    /// RMSE of the final interface height against the F64 run.
    pub rmse_eta: Option<f64>,
    /// `t(compensated) / t(uncompensated) - 1`
    pub comp_overhead: Option<f64>,
    pub status: RunStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub timings_reliable: bool,
}

struct Timed {
    out: Result<SwmOutput, SwmError>,
    secs: f64,
}

fn timed(p: &SwmParams, kind: ScalarKind, policy: RoundingPolicy) -> Timed {
    let start = Instant::now();
    let out = run_simulation(p, kind, policy, None);
    Timed {
        out,
        secs: start.elapsed().as_secs_f64(),
    }
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (ss / a.len() as f64).sqrt()
}

/// Both runs of one case: (uncompensated, compensated).
type Case = (Timed, Timed);

fn run_case(p: &SwmParams, kind: ScalarKind, policy: RoundingPolicy) -> Case {
    let plain = SwmParams {
        compensated: false,
        ..p.clone()
    };
    let comp = SwmParams {
        compensated: true,
        ..p.clone()
    };
    (timed(&plain, kind, policy), timed(&comp, kind, policy))
}

fn blowup_step(r: &Result<SwmOutput, SwmError>) -> Result<Option<usize>, SwmError> {
    match r {
        Ok(_) => Ok(None),
        Err(SwmError::Blowup { step }) => Ok(Some(*step)),
        Err(e) => Err(e.clone()),
    }
}

/// Run every kind on every grid for `horizon` steps, once without and once
/// with compensation. Blown-up runs are reported as diverged; configuration
/// errors abort the sweep.
pub fn precision_sweep(cfg: &SweepConfig) -> Result<SweepReport, SwmError> {
    if !cfg.kinds.contains(&ScalarKind::F64) {
        return Err(SwmError::Config(
            "the sweep needs f64 as its baseline".into(),
        ));
    }
    let jobs: Vec<(SwmParams, ScalarKind)> = cfg
        .sizes
        .iter()
        .flat_map(|&(nx, ny)| {
            let p = SwmParams {
                n_steps: cfg.horizon,
                diag_every: cfg.horizon.max(1),
                ..cfg.base.with_grid(nx, ny)
            };
            cfg.kinds.iter().map(move |&k| (p.clone(), k))
        })
        .collect();
    for (p, _) in &jobs {
        p.validate()?;
    }

    let cases: Vec<Case> = if cfg.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = jobs
                .iter()
                .map(|(p, k)| s.spawn(move || run_case(p, *k, cfg.policy)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        })
    } else {
        jobs.iter()
            .map(|(p, k)| run_case(p, *k, cfg.policy))
            .collect()
    };

    let nk = cfg.kinds.len();
    let base_idx = cfg
        .kinds
        .iter()
        .position(|&k| k == ScalarKind::F64)
        .expect("checked above");
    let mut rows = Vec::with_capacity(jobs.len());
    for (g, group) in cases.chunks(nk).enumerate() {
        let base = &group[base_idx].1;
        let base_ok = base.out.as_ref().ok();
        for (i, (plain, comp)) in group.iter().enumerate() {
            let (p, kind) = &jobs[g * nk + i];
            let plain_blowup = blowup_step(&plain.out)?;
            let comp_blowup = blowup_step(&comp.out)?;
            let status = match comp_blowup.or(plain_blowup) {
                Some(step) => RunStatus::Diverged { step },
                None => RunStatus::Ok,
            };
            let comp_ok = comp.out.as_ref().ok();
            rows.push(SweepRow {
                kind: *kind,
                nx: p.nx,
                ny: p.ny,
                steps: p.n_steps,
                t_wall_s: comp_ok.map(|_| comp.secs),
                speedup: comp_ok.zip(base_ok).map(|_| base.secs / comp.secs),
                rmse_eta: comp_ok
                    .zip(base_ok)
                    .map(|(o, b)| rmse(o.fields.eta(), b.fields.eta())),
                comp_overhead: (comp_ok.is_some() && plain.out.is_ok())
                    .then(|| comp.secs / plain.secs - 1.0),
                status,
            });
        }
    }
    Ok(SweepReport {
        rows,
        timings_reliable: !cfg.parallel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kinds: Vec<ScalarKind>) -> SweepConfig {
        SweepConfig {
            kinds,
            sizes: vec![(16, 8)],
            horizon: 5,
            ..Default::default()
        }
    }

    #[test]
    fn baseline_only() {
        let r = precision_sweep(&small(vec![ScalarKind::F64])).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].speedup, Some(1.0));
        assert_eq!(r.rows[0].rmse_eta, Some(0.0));
    }

    #[test]
    fn baseline_required() {
        assert!(matches!(
            precision_sweep(&small(vec![ScalarKind::F32])),
            Err(SwmError::Config(_))
        ));
    }

    #[test]
    fn divergence_is_recorded() {
        let mut cfg = small(vec![ScalarKind::F64, ScalarKind::F16]);
        cfg.base.perturbation = 1e3;
        cfg.horizon = 50;
        let r = precision_sweep(&cfg).unwrap();
        assert_eq!(r.rows.len(), 2);
        let h = &r.rows[1];
        assert!(matches!(h.status, RunStatus::Diverged { .. }));
        assert_eq!((h.t_wall_s, h.rmse_eta), (None, None));
    }
}
