//! Tendencies of the shallow-water equations on a closed C-grid basin.
//!
//! Momentum: pressure gradient, Coriolis (beta plane), double-gyre wind on
//! `u`, linear bottom friction, biharmonic viscosity, and optionally
//! vector-invariant advection (vorticity flux plus Bernoulli gradient).
//! Continuity is in flux form with thickness `h = eta/s + H`, so the basin
//! mean of `eta` is conserved up to rounding.
//!
//! Boundaries are free-slip walls: normal velocity is zero on the walls and
//! tangential derivatives vanish there. The Laplacian used for the
//! biharmonic operator is taken as zero on the walls.
//!
//! Fields are stored multiplied by `s`. Every physical constant is folded
//! together with a time unit, the grid spacing and `1/s` into a handful of
//! coefficients, so the loops never divide. Momentum and continuity take
//! separate time units: momentum tendencies are much smaller than the
//! thickness fluxes, and a longer unit lifts them away from the bottom of
//! the binary16 range without pushing the fluxes towards its top.

use std::f64::consts::PI;

use crate::scalar::Scalar;

use super::fields::{Fields, Layout};
use super::params::SwmParams;

/// A non-finite tendency was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonFinite;

/// Precomputed coefficients and scratch space for one grid and format.
#[derive(Clone, Debug)]
pub struct Stencil<T: Scalar> {
    layout: Layout,
    nonlinear: bool,
    zero: T,
    two: T,
    /// tau_m g / dx, tau_m g / dy
    gx: T,
    gy: T,
    /// tau_m f / 4 at u rows and v rows
    cor_u: Vec<T>,
    cor_v: Vec<T>,
    /// 2 f dx s at u rows and v rows: planetary vorticity in the units of
    /// the scaled relative vorticity below
    pv_u: Vec<T>,
    pv_v: Vec<T>,
    /// tau_m s F(y) at u rows
    wind: Vec<T>,
    damping: Damping<T>,
    /// (dx/dy)^2 and dx/dy
    rho2: T,
    rho: T,
    /// thickness coefficients: h' = (eta_l + eta_r) * h1 + h0
    hx1: T,
    hx0: T,
    hy1: T,
    hy0: T,
    /// tau_m / (8 dx s)
    adv: T,
    /// tau_m / (4 dx s), tau_m / (4 dy s)
    bx: T,
    by: T,
    // scratch
    lap_u: Vec<T>,
    lap_v: Vec<T>,
    zeta: Vec<T>,
    flux_x: Vec<T>,
    flux_y: Vec<T>,
}

/// Friction and biharmonic viscosity. With viscosity present both go
/// through one product, `visc * (bih + ratio * u)`, which keeps the small
/// damping coefficients out of separate products.
#[derive(Clone, Copy, Debug)]
enum Damping<T> {
    /// tau_m nu4 / dx^4 and r dx^4 / nu4
    Combined { visc: T, ratio: T },
    /// tau_m r
    FrictionOnly { fric: T },
}

impl<T: Scalar> Damping<T> {
    #[inline]
    fn apply(self, t: T, vel: T, bih: T) -> T {
        match self {
            Damping::Combined { visc, ratio } => t - visc * (bih + ratio * vel),
            Damping::FrictionOnly { fric } => t - fric * vel,
        }
    }
}

impl<T: Scalar> Stencil<T> {
    /// Coefficients for momentum tendencies multiplied by `tau_m` seconds
    /// and the thickness tendency multiplied by `tau_c` seconds.
    pub fn new(p: &SwmParams, tau_m: f64, tau_c: f64, ctx: T::Context) -> Self {
        let tau = tau_m;
        let layout = Layout::new(p.nx, p.ny);
        let (nx, ny) = (p.nx, p.ny);
        let (dx, dy, s) = (p.dx(), p.dy(), p.scale_s);
        let c = |x: f64| T::from_f64(x, ctx);
        let coriolis = |y: f64| p.f0 + p.beta * (y - 0.5 * p.ly);
        let y_u = |j: usize| (j as f64 + 0.5) * dy;
        let y_v = |j: usize| j as f64 * dy;
        let zero = c(0.0);
        let damping = if p.nu4 > 0.0 {
            Damping::Combined {
                visc: c(tau * p.nu4 / dx.powi(4)),
                ratio: c(p.r_bottom * dx.powi(4) / p.nu4),
            }
        } else {
            Damping::FrictionOnly {
                fric: c(tau * p.r_bottom),
            }
        };
        Self {
            layout,
            nonlinear: p.nonlinear,
            zero,
            two: c(2.0),
            gx: c(tau * p.g / dx),
            gy: c(tau * p.g / dy),
            cor_u: (0..ny).map(|j| c(tau * coriolis(y_u(j)) / 4.0)).collect(),
            cor_v: (0..=ny).map(|j| c(tau * coriolis(y_v(j)) / 4.0)).collect(),
            pv_u: (0..ny)
                .map(|j| c(2.0 * coriolis(y_u(j)) * dx * s))
                .collect(),
            pv_v: (0..=ny)
                .map(|j| c(2.0 * coriolis(y_v(j)) * dx * s))
                .collect(),
            wind: (0..ny)
                .map(|j| {
                    // s applied last so that the scaled constant is exactly s times the unscaled one
                    c(tau * -p.wind_amplitude * (2.0 * PI * y_u(j) / p.ly).cos() * s)
                })
                .collect(),
            damping,
            rho2: c((dx / dy).powi(2)),
            rho: c(dx / dy),
            hx1: c(tau_c / (2.0 * dx) / s),
            hx0: c(tau_c * p.depth / dx),
            hy1: c(tau_c / (2.0 * dy) / s),
            hy0: c(tau_c * p.depth / dy),
            adv: c(tau / (8.0 * dx) / s),
            bx: c(tau / (4.0 * dx) / s),
            by: c(tau / (4.0 * dy) / s),
            lap_u: vec![zero; layout.nu()],
            lap_v: vec![zero; layout.nv()],
            zeta: vec![zero; (nx + 1) * (ny + 1)],
            flux_x: vec![zero; layout.nu()],
            flux_y: vec![zero; layout.nv()],
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Write the time-unit-weighted tendencies of `state` into `out`.
    pub fn eval(&mut self, state: &[T], out: &mut [T]) -> Result<(), NonFinite> {
        let l = self.layout;
        assert_eq!(state.len(), l.len());
        assert_eq!(out.len(), l.len());
        let (u, rest) = state.split_at(l.nu());
        let (v, eta) = rest.split_at(l.nv());
        let (du, rest) = out.split_at_mut(l.nu());
        let (dv, deta) = rest.split_at_mut(l.nv());

        self.laplacians(u, v);
        if self.nonlinear {
            self.vorticity(u, v);
        }
        self.u_tendency(u, v, eta, du);
        self.v_tendency(u, v, eta, dv);
        self.continuity(u, v, eta, deta);

        if out.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(NonFinite)
        }
    }

    fn laplacians(&mut self, u: &[T], v: &[T]) {
        let Layout { nx, ny } = self.layout;
        let (two, rho2) = (self.two, self.rho2);
        let su = nx + 1;
        for j in 0..ny {
            let jm = j.saturating_sub(1);
            let jp = (j + 1).min(ny - 1);
            for i in 1..nx {
                let c = u[j * su + i];
                let xx = u[j * su + i + 1] - two * c + u[j * su + i - 1];
                let yy = u[jp * su + i] - two * c + u[jm * su + i];
                self.lap_u[j * su + i] = xx + rho2 * yy;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                let im = i.saturating_sub(1);
                let ip = (i + 1).min(nx - 1);
                let c = v[j * nx + i];
                let xx = v[j * nx + ip] - two * c + v[j * nx + im];
                let yy = v[(j + 1) * nx + i] - two * c + v[(j - 1) * nx + i];
                self.lap_v[j * nx + i] = xx + rho2 * yy;
            }
        }
    }

    /// Relative vorticity at corners, times `dx s`.
    fn vorticity(&mut self, u: &[T], v: &[T]) {
        let Layout { nx, ny } = self.layout;
        let su = nx + 1;
        for j in 0..=ny {
            for i in 0..=nx {
                let dv = if i == 0 || i == nx {
                    None
                } else {
                    Some(v[j * nx + i] - v[j * nx + i - 1])
                };
                let du = if j == 0 || j == ny {
                    None
                } else {
                    Some(u[j * su + i] - u[(j - 1) * su + i])
                };
                self.zeta[j * su + i] = match (dv, du) {
                    (Some(a), Some(b)) => a - self.rho * b,
                    (Some(a), None) => a,
                    (None, Some(b)) => -(self.rho * b),
                    (None, None) => self.zero,
                };
            }
        }
    }

    fn u_tendency(&self, u: &[T], v: &[T], eta: &[T], du: &mut [T]) {
        let Layout { nx, ny } = self.layout;
        let su = nx + 1;
        let lap = &self.lap_u;
        for j in 0..ny {
            let jm = j.saturating_sub(1);
            let jp = (j + 1).min(ny - 1);
            du[j * su] = self.zero;
            du[j * su + nx] = self.zero;
            for i in 1..nx {
                let k = j * su + i;
                let (vbl, vbr) = (v[j * nx + i - 1], v[j * nx + i]);
                let (vtl, vtr) = (v[(j + 1) * nx + i - 1], v[(j + 1) * nx + i]);
                let vsum = (vbl + vbr) + (vtl + vtr);
                let c = lap[k];
                let bih = (lap[k + 1] - self.two * c + lap[k - 1])
                    + self.rho2 * (lap[jp * su + i] - self.two * c + lap[jm * su + i]);
                let pg = self.gx * (eta[j * nx + i] - eta[j * nx + i - 1]);
                let mut t = if self.nonlinear {
                    // (f + zeta) v, with f and zeta in the same units before the small factor
                    let q = self.adv * (self.pv_u[j] + (self.zeta[k] + self.zeta[k + su]));
                    q * vsum - pg
                } else {
                    self.cor_u[j] * vsum - pg
                };
                t = t + self.wind[j];
                t = self.damping.apply(t, u[k], bih);
                if self.nonlinear {
                    // gradient of the kinetic energy as differences of squares
                    let (ur, ul) = (u[k + 1], u[k - 1]);
                    let db = ((ur - ul) * (ur + ul) + (vbr - vbl) * (vbr + vbl))
                        + (vtr - vtl) * (vtr + vtl);
                    t = t - self.bx * db;
                }
                du[k] = t;
            }
        }
    }

    fn v_tendency(&self, u: &[T], v: &[T], eta: &[T], dv: &mut [T]) {
        let Layout { nx, ny } = self.layout;
        let su = nx + 1;
        let lap = &self.lap_v;
        for i in 0..nx {
            dv[i] = self.zero;
            dv[ny * nx + i] = self.zero;
        }
        for j in 1..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let im = i.saturating_sub(1);
                let ip = (i + 1).min(nx - 1);
                let (ulb, urb) = (u[(j - 1) * su + i], u[(j - 1) * su + i + 1]);
                let (ult, urt) = (u[j * su + i], u[j * su + i + 1]);
                let usum = (ulb + urb) + (ult + urt);
                let c = lap[k];
                let bih = (lap[j * nx + ip] - self.two * c + lap[j * nx + im])
                    + self.rho2 * (lap[k + nx] - self.two * c + lap[k - nx]);
                let pg = self.gy * (eta[k] - eta[k - nx]);
                let mut t = if self.nonlinear {
                    let z = j * su + i;
                    let q = self.adv * (self.pv_v[j] + (self.zeta[z] + self.zeta[z + 1]));
                    -(q * usum) - pg
                } else {
                    -(self.cor_v[j] * usum) - pg
                };
                t = self.damping.apply(t, v[k], bih);
                if self.nonlinear {
                    let (vt, vb) = (v[k + nx], v[k - nx]);
                    let db = ((ult - ulb) * (ult + ulb) + (urt - urb) * (urt + urb))
                        + (vt - vb) * (vt + vb);
                    t = t - self.by * db;
                }
                dv[k] = t;
            }
        }
    }

    fn continuity(&mut self, u: &[T], v: &[T], eta: &[T], deta: &mut [T]) {
        let Layout { nx, ny } = self.layout;
        let su = nx + 1;
        for j in 0..ny {
            for i in 1..nx {
                let h = (eta[j * nx + i - 1] + eta[j * nx + i]) * self.hx1 + self.hx0;
                self.flux_x[j * su + i] = u[j * su + i] * h;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                let h = (eta[(j - 1) * nx + i] + eta[j * nx + i]) * self.hy1 + self.hy0;
                self.flux_y[j * nx + i] = v[j * nx + i] * h;
            }
        }
        let (fx, fy) = (&self.flux_x, &self.flux_y);
        for j in 0..ny {
            for i in 0..nx {
                let div_x = fx[j * su + i + 1] - fx[j * su + i];
                let div_y = fy[(j + 1) * nx + i] - fy[j * nx + i];
                deta[j * nx + i] = -div_x - div_y;
            }
        }
    }
}

/// Power-of-two number of steps used as the momentum time unit.
///
/// Chosen so that the Coriolis and gravity-wave coefficients come out
/// around `MOMENTUM_UNIT_TARGET`.
pub fn momentum_units(p: &SwmParams) -> f64 {
    let f_max = p.f0.abs() + p.beta.abs() * 0.5 * p.ly;
    let omega = f_max.max(p.wave_speed() / p.dx().min(p.dy()));
    let k = (MOMENTUM_UNIT_TARGET / (omega * p.dt)).log2().round();
    2f64.powi(k.clamp(0.0, 20.0) as i32)
}

pub const MOMENTUM_UNIT_TARGET: f64 = 128.0;

/// Physical tendencies (per second) of a scaled state, in the state's format.
pub fn rhs<T: Scalar>(
    state: &Fields<T>,
    params: &SwmParams,
    ctx: T::Context,
) -> Result<Fields<T>, NonFinite> {
    let mut stencil = Stencil::new(params, 1.0, 1.0, ctx);
    let mut out = Fields::zeros(state.layout, ctx);
    stencil.eval(&state.data, &mut out.data)?;
    Ok(out)
}
