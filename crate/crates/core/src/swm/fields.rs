use std::ops::Range;

use crate::scalar::Scalar;

/// Staggered C-grid storage for `nx` x `ny` cells, all fields row-major
/// with x fastest:
///
/// - `u`: (nx+1) x ny at x-faces
/// - `v`: nx x (ny+1) at y-faces
/// - `eta`: nx x ny at centres
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub nx: usize,
    pub ny: usize,
}

impl Layout {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self { nx, ny }
    }

    pub fn nu(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn nv(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn ne(&self) -> usize {
        self.nx * self.ny
    }

    pub fn len(&self) -> usize {
        self.nu() + self.nv() + self.ne()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn u_range(&self) -> Range<usize> {
        0..self.nu()
    }

    pub fn v_range(&self) -> Range<usize> {
        self.nu()..self.nu() + self.nv()
    }

    pub fn eta_range(&self) -> Range<usize> {
        self.nu() + self.nv()..self.len()
    }
}

/// `u`, `v` and `eta` in one contiguous buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct Fields<T> {
    pub layout: Layout,
    pub data: Vec<T>,
}

impl<T: Copy> Fields<T> {
    pub fn filled(layout: Layout, value: T) -> Self {
        Self {
            layout,
            data: vec![value; layout.len()],
        }
    }

    pub fn from_parts(layout: Layout, u: &[T], v: &[T], eta: &[T]) -> Self {
        assert_eq!(u.len(), layout.nu());
        assert_eq!(v.len(), layout.nv());
        assert_eq!(eta.len(), layout.ne());
        let mut data = Vec::with_capacity(layout.len());
        data.extend_from_slice(u);
        data.extend_from_slice(v);
        data.extend_from_slice(eta);
        Self { layout, data }
    }

    pub fn u(&self) -> &[T] {
        &self.data[self.layout.u_range()]
    }

    pub fn v(&self) -> &[T] {
        &self.data[self.layout.v_range()]
    }

    pub fn eta(&self) -> &[T] {
        &self.data[self.layout.eta_range()]
    }

    pub fn split_mut(&mut self) -> (&mut [T], &mut [T], &mut [T]) {
        let (u, rest) = self.data.split_at_mut(self.layout.nu());
        let (v, eta) = rest.split_at_mut(self.layout.nv());
        (u, v, eta)
    }

    pub fn map<U>(&self, f: impl FnMut(T) -> U) -> Fields<U> {
        Fields {
            layout: self.layout,
            data: self.data.iter().copied().map(f).collect(),
        }
    }
}

impl<T: Scalar> Fields<T> {
    pub fn zeros(layout: Layout, ctx: T::Context) -> Self {
        Self::filled(layout, T::from_f64(0.0, ctx))
    }

    pub fn to_f64(&self) -> Fields<f64> {
        self.map(Scalar::to_f64)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Prognostic fields (scaled) at model time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SwmState<T> {
    pub fields: Fields<T>,
    /// Elapsed model time (s).
    pub t: f64,
}

impl<T: Scalar> SwmState<T> {
    pub fn at_rest(layout: Layout, ctx: T::Context) -> Self {
        Self {
            fields: Fields::zeros(layout, ctx),
            t: 0.0,
        }
    }
}

/// State plus the running Kahan residuals of each prognostic value.
#[derive(Clone, Debug)]
pub struct CompensatedState<A> {
    pub state: SwmState<A>,
    pub carry: Fields<A>,
}

impl<A: Scalar> CompensatedState<A> {
    pub fn new(state: SwmState<A>, ctx: A::Context) -> Self {
        let carry = Fields::zeros(state.fields.layout, ctx);
        Self { state, carry }
    }
}
