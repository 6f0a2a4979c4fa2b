//! Directly indexed finite differences for the C-grid shallow-water
//! equations, in physical units, with boundary rules applied through ghost
//! lookups. Slow and literal on purpose.
//!
//! Layout (row-major, x fastest):
//! - `u`: (nx+1) x ny, at x = i*dx, y = (j+1/2)*dy
//! - `v`: nx x (ny+1), at x = (i+1/2)*dx, y = j*dy
//! - `eta`: nx x ny, at cell centres

#[derive(Clone, Copy, Debug)]
pub struct Setup {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub g: f64,
    pub depth: f64,
    pub f0: f64,
    pub beta: f64,
    pub wind: f64,
    pub nu4: f64,
    pub r_bottom: f64,
    pub nonlinear: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fields {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub eta: Vec<f64>,
}

struct View<'a> {
    s: &'a Setup,
    f: &'a Fields,
}

impl View<'_> {
    fn dx(&self) -> f64 {
        self.s.lx / self.s.nx as f64
    }
    fn dy(&self) -> f64 {
        self.s.ly / self.s.ny as f64
    }

    /// u with free-slip ghosts in y; walls in x hold zero.
    fn u(&self, i: isize, j: isize) -> f64 {
        let (nx, ny) = (self.s.nx as isize, self.s.ny as isize);
        assert!((0..=nx).contains(&i));
        let j = j.clamp(0, ny - 1);
        self.f.u[(j * (nx + 1) + i) as usize]
    }

    /// v with free-slip ghosts in x.
    fn v(&self, i: isize, j: isize) -> f64 {
        let (nx, ny) = (self.s.nx as isize, self.s.ny as isize);
        assert!((0..=ny).contains(&j));
        let i = i.clamp(0, nx - 1);
        self.f.v[(j * nx + i) as usize]
    }

    fn eta(&self, i: isize, j: isize) -> f64 {
        let nx = self.s.nx as isize;
        self.f.eta[(j * nx + i) as usize]
    }

    fn lap_u(&self, i: isize, j: isize) -> f64 {
        let nx = self.s.nx as isize;
        if i <= 0 || i >= nx {
            return 0.0;
        }
        let (dx, dy) = (self.dx(), self.dy());
        (self.u(i + 1, j) - 2.0 * self.u(i, j) + self.u(i - 1, j)) / (dx * dx)
            + (self.u(i, j + 1) - 2.0 * self.u(i, j) + self.u(i, j - 1)) / (dy * dy)
    }

    fn lap_lap_u(&self, i: isize, j: isize) -> f64 {
        let ny = self.s.ny as isize;
        let (dx, dy) = (self.dx(), self.dy());
        let l = |ii: isize, jj: isize| self.lap_u(ii, jj.clamp(0, ny - 1));
        (l(i + 1, j) - 2.0 * l(i, j) + l(i - 1, j)) / (dx * dx)
            + (l(i, j + 1) - 2.0 * l(i, j) + l(i, j - 1)) / (dy * dy)
    }

    fn lap_v(&self, i: isize, j: isize) -> f64 {
        let ny = self.s.ny as isize;
        if j <= 0 || j >= ny {
            return 0.0;
        }
        let (dx, dy) = (self.dx(), self.dy());
        (self.v(i + 1, j) - 2.0 * self.v(i, j) + self.v(i - 1, j)) / (dx * dx)
            + (self.v(i, j + 1) - 2.0 * self.v(i, j) + self.v(i, j - 1)) / (dy * dy)
    }

    fn lap_lap_v(&self, i: isize, j: isize) -> f64 {
        let nx = self.s.nx as isize;
        let (dx, dy) = (self.dx(), self.dy());
        let l = |ii: isize, jj: isize| self.lap_v(ii.clamp(0, nx - 1), jj);
        (l(i + 1, j) - 2.0 * l(i, j) + l(i - 1, j)) / (dx * dx)
            + (l(i, j + 1) - 2.0 * l(i, j) + l(i, j - 1)) / (dy * dy)
    }

    /// Relative vorticity at corner (i*dx, j*dy).
    fn zeta(&self, i: isize, j: isize) -> f64 {
        let (nx, ny) = (self.s.nx as isize, self.s.ny as isize);
        let dvdx = if i == 0 || i == nx {
            0.0
        } else {
            (self.v(i, j) - self.v(i - 1, j)) / self.dx()
        };
        let dudy = if j == 0 || j == ny {
            0.0
        } else {
            (self.u(i, j) - self.u(i, j - 1)) / self.dy()
        };
        dvdx - dudy
    }

    fn bernoulli(&self, i: isize, j: isize) -> f64 {
        let uu = 0.5 * (self.u(i, j).powi(2) + self.u(i + 1, j).powi(2));
        let vv = 0.5 * (self.v(i, j).powi(2) + self.v(i, j + 1).powi(2));
        0.5 * (uu + vv)
    }

    fn coriolis(&self, y: f64) -> f64 {
        self.s.f0 + self.s.beta * (y - 0.5 * self.s.ly)
    }

    fn v_at_u(&self, i: isize, j: isize) -> f64 {
        0.25 * (self.v(i - 1, j) + self.v(i, j) + self.v(i - 1, j + 1) + self.v(i, j + 1))
    }

    fn u_at_v(&self, i: isize, j: isize) -> f64 {
        0.25 * (self.u(i, j - 1) + self.u(i + 1, j - 1) + self.u(i, j) + self.u(i + 1, j))
    }
}

pub fn rhs(s: &Setup, f: &Fields) -> Fields {
    let w = View { s, f };
    let (nx, ny) = (s.nx as isize, s.ny as isize);
    let (dx, dy) = (w.dx(), w.dy());
    let mut du = vec![0.0; f.u.len()];
    let mut dv = vec![0.0; f.v.len()];
    let mut deta = vec![0.0; f.eta.len()];

    for j in 0..ny {
        for i in 1..nx {
            let y = (j as f64 + 0.5) * dy;
            let vbar = w.v_at_u(i, j);
            let mut t = -s.g * (w.eta(i, j) - w.eta(i - 1, j)) / dx;
            t += w.coriolis(y) * vbar;
            t += -s.wind * (2.0 * std::f64::consts::PI * y / s.ly).cos();
            t -= s.r_bottom * w.u(i, j);
            t -= s.nu4 * w.lap_lap_u(i, j);
            if s.nonlinear {
                let zbar = 0.5 * (w.zeta(i, j) + w.zeta(i, j + 1));
                t += zbar * vbar;
                t -= (w.bernoulli(i, j) - w.bernoulli(i - 1, j)) / dx;
            }
            du[(j * (nx + 1) + i) as usize] = t;
        }
    }

    for j in 1..ny {
        for i in 0..nx {
            let y = j as f64 * dy;
            let ubar = w.u_at_v(i, j);
            let mut t = -s.g * (w.eta(i, j) - w.eta(i, j - 1)) / dy;
            t -= w.coriolis(y) * ubar;
            t -= s.r_bottom * w.v(i, j);
            t -= s.nu4 * w.lap_lap_v(i, j);
            if s.nonlinear {
                let zbar = 0.5 * (w.zeta(i, j) + w.zeta(i + 1, j));
                t -= zbar * ubar;
                t -= (w.bernoulli(i, j) - w.bernoulli(i, j - 1)) / dy;
            }
            dv[(j * nx + i) as usize] = t;
        }
    }

    let flux_x = |i: isize, j: isize| {
        if i == 0 || i == nx {
            0.0
        } else {
            w.u(i, j) * (0.5 * (w.eta(i - 1, j) + w.eta(i, j)) + s.depth)
        }
    };
    let flux_y = |i: isize, j: isize| {
        if j == 0 || j == ny {
            0.0
        } else {
            w.v(i, j) * (0.5 * (w.eta(i, j - 1) + w.eta(i, j)) + s.depth)
        }
    };
    for j in 0..ny {
        for i in 0..nx {
            deta[(j * nx + i) as usize] =
                -(flux_x(i + 1, j) - flux_x(i, j)) / dx - (flux_y(i, j + 1) - flux_y(i, j)) / dy;
        }
    }

    Fields {
        u: du,
        v: dv,
        eta: deta,
    }
}

fn axpy(base: &Fields, k: &Fields, a: f64) -> Fields {
    let f = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(x, y)| x + a * y).collect();
    Fields {
        u: f(&base.u, &k.u),
        v: f(&base.v, &k.v),
        eta: f(&base.eta, &k.eta),
    }
}

/// Classical RK4 increment `dt/6 (k1 + 2 k2 + 2 k3 + k4)`.
pub fn rk4_increment(s: &Setup, f: &Fields, dt: f64) -> Fields {
    let k1 = rhs(s, f);
    let k2 = rhs(s, &axpy(f, &k1, 0.5 * dt));
    let k3 = rhs(s, &axpy(f, &k2, 0.5 * dt));
    let k4 = rhs(s, &axpy(f, &k3, dt));
    let comb = |a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..a.len())
            .map(|n| dt / 6.0 * (a[n] + 2.0 * b[n] + 2.0 * c[n] + d[n]))
            .collect()
    };
    Fields {
        u: comb(&k1.u, &k2.u, &k3.u, &k4.u),
        v: comb(&k1.v, &k2.v, &k3.v, &k4.v),
        eta: comb(&k1.eta, &k2.eta, &k3.eta, &k4.eta),
    }
}

/// `max |a - b| / max |b|` over one field; 0 when both vanish.
pub fn relative_max_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let err = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        err
    } else {
        err / scale
    }
}
