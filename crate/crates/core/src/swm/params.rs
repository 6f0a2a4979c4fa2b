use crate::scalar::ScalarKind;

use super::SwmError;

/// Physical and numerical configuration of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct SwmParams {
    pub nx: usize,
    pub ny: usize,
    /// Domain size in x (m).
    pub lx: f64,
    /// Domain size in y (m).
    pub ly: f64,
    /// Gravity, reduced (m/s^2).
    pub g: f64,
    /// Mean layer depth H (m).
    pub depth: f64,
    /// Coriolis parameter at mid-basin (1/s).
    pub f0: f64,
    /// Meridional Coriolis gradient (1/(m s)).
    pub beta: f64,
    /// Peak wind acceleration on u (m/s^2), double-gyre profile.
    pub wind_amplitude: f64,
    /// Biharmonic viscosity (m^4/s).
    pub nu4: f64,
    /// Linear bottom friction (1/s).
    pub r_bottom: f64,
    /// Time step (s).
    pub dt: f64,
    pub n_steps: usize,
    /// Power-of-two factor applied to the prognostic fields.
    pub scale_s: f64,
    pub nonlinear: bool,
    pub compensated: bool,
    /// Format of the time integration; `None` uses the model's own.
    pub integration_kind: Option<ScalarKind>,
    /// Amplitude of the initial interface noise as a fraction of `depth`.
    pub perturbation: f64,
    pub seed: u64,
    /// Record diagnostics every this many steps.
    pub diag_every: usize,
}

/// Safety factor on the gravity-wave time step bound.
pub const CFL_SAFETY: f64 = 0.9;

impl Default for SwmParams {
    fn default() -> Self {
        Self::desk(200, 100)
    }
}

impl SwmParams {
    /// Double-gyre basin of 2000 km x 1000 km on an `nx` x `ny` grid with
    /// the largest stable time step.
    pub fn desk(nx: usize, ny: usize) -> Self {
        let mut p = Self {
            nx,
            ny,
            lx: 2000e3,
            ly: 1000e3,
            g: 0.1,
            depth: 500.0,
            f0: 1e-4,
            beta: 2e-11,
            wind_amplitude: 2e-7,
            nu4: 1e11,
            r_bottom: 1e-7,
            dt: 0.0,
            n_steps: 500,
            scale_s: 1.0,
            nonlinear: true,
            compensated: true,
            integration_kind: None,
            perturbation: 0.01,
            seed: crate::rng::DEFAULT_SEED,
            diag_every: 10,
        };
        p.dt = p.cfl_limit();
        p
    }

    /// Same physics on a different grid; the time step is reset to the CFL
    /// limit of the new spacing.
    pub fn with_grid(&self, nx: usize, ny: usize) -> Self {
        let mut p = Self {
            nx,
            ny,
            ..self.clone()
        };
        p.dt = p.cfl_limit();
        p
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn wave_speed(&self) -> f64 {
        (self.g * self.depth).sqrt()
    }

    /// `0.9 min(dx, dy) / sqrt(g H)`
    pub fn cfl_limit(&self) -> f64 {
        CFL_SAFETY * self.dx().min(self.dy()) / self.wave_speed()
    }

    pub fn validate(&self) -> Result<(), SwmError> {
        let bad = |msg: String| Err(SwmError::Config(msg));
        if self.nx < 4 || self.ny < 4 {
            return bad(format!(
                "grid {}x{} is below the 4x4 minimum",
                self.nx, self.ny
            ));
        }
        for (name, v) in [
            ("lx", self.lx),
            ("ly", self.ly),
            ("g", self.g),
            ("depth", self.depth),
            ("dt", self.dt),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        for (name, v) in [
            ("nu4", self.nu4),
            ("r_bottom", self.r_bottom),
            ("perturbation", self.perturbation),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        for (name, v) in [
            ("f0", self.f0),
            ("beta", self.beta),
            ("wind_amplitude", self.wind_amplitude),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        check_scale(self.scale_s)?;
        // Allow for the last-bit rounding of a limit computed elsewhere.
        let limit = self.cfl_limit();
        if self.dt > limit * (1.0 + 1e-12) {
            return bad(format!(
                "dt = {} s exceeds the CFL limit {limit} s",
                self.dt
            ));
        }
        if self.diag_every == 0 {
            return bad("diag_every must be at least 1".into());
        }
        Ok(())
    }
}

/// Positive power of two within binary64's normal range.
pub fn check_scale(s: f64) -> Result<(), SwmError> {
    let bits = s.to_bits();
    let is_pow2 = s.is_normal() && s > 0.0 && bits & ((1u64 << 52) - 1) == 0;
    if is_pow2 {
        Ok(())
    } else {
        Err(SwmError::Config(format!(
            "scale s = {s} is not a positive power of two"
        )))
    }
}
