//! Small fixed-size tensors for two-dimensional leaves.

use serde::{Deserialize, Serialize};

use crate::scalar::{lit, Real};

/// Leaf dimension for every shipped grid.
pub const DIM: usize = 2;

/// Christoffel symbols at one node, indexed `[c][a][b]` for Γ^c_ab.
pub type Christoffel<T> = [[[T; DIM]; DIM]; DIM];

/// Fully covariant Riemann tensor at one node, indexed `[a][b][c][d]`.
pub type Riemann<T> = [[[[T; DIM]; DIM]; DIM]; DIM];

/// Symmetric 2x2 tensor stored by its three independent components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sym2<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Real> Sym2<T> {
    pub fn new(xx: T, xy: T, yy: T) -> Self {
        Self { xx, xy, yy }
    }

    pub fn diag(xx: T, yy: T) -> Self {
        Self::new(xx, T::zero(), yy)
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one())
    }

    pub fn zero() -> Self {
        Self::diag(T::zero(), T::zero())
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> T {
        match (a, b) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            _ => self.xy,
        }
    }

    /// Builds a tensor from a component function, reading only `a <= b`.
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        Self::new(f(0, 0), f(0, 1), f(1, 1))
    }

    pub fn det(&self) -> T {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> T {
        self.xx + self.yy
    }

    /// Inverse, or `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        Some(Self::new(self.yy / d, -self.xy / d, self.xx / d))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (T, T) {
        let half = lit::<T>(0.5);
        let mean = (self.xx + self.yy) * half;
        let diff = (self.xx - self.yy) * half;
        let rad = (diff * diff + self.xy * self.xy).sqrt();
        (mean - rad, mean + rad)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.xx * s, self.xy * s, self.yy * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }

    /// `self + s * o`
    pub fn axpy(&self, s: T, o: &Self) -> Self {
        Self::new(self.xx + s * o.xx, self.xy + s * o.xy, self.yy + s * o.yy)
    }

    /// Bilinear form `v^T S w`.
    pub fn form(&self, v: [T; DIM], w: [T; DIM]) -> T {
        self.xx * v[0] * w[0] + self.xy * (v[0] * w[1] + v[1] * w[0]) + self.yy * v[1] * w[1]
    }

    /// Contravariant vector `S v`.
    pub fn mul_vec(&self, v: [T; DIM]) -> [T; DIM] {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }

    /// Full contraction `S^{ab} O_{ab}` (or with indices the other way round).
    pub fn contract(&self, o: &Self) -> T {
        self.xx * o.xx + lit::<T>(2.0) * self.xy * o.xy + self.yy * o.yy
    }

    /// Eigenvalues of `inner^{-1} self`, i.e. of the form relative to a metric. Ascending.
    pub fn relative_eigenvalues(&self, inner: &Self) -> Option<(T, T)> {
        // congruence by the Cholesky factor keeps repeated roots accurate
        if !(inner.xx > T::zero()) {
            return None;
        }
        let l11 = inner.xx.sqrt();
        let l21 = inner.xy / l11;
        let rest = inner.yy - l21 * l21;
        if !(rest > T::zero()) {
            return None;
        }
        let l22 = rest.sqrt();
        // rows of L⁻¹
        let r0 = [T::one() / l11, T::zero()];
        let r1 = [-l21 / (l11 * l22), T::one() / l22];
        Some(Self::new(self.form(r0, r0), self.form(r0, r1), self.form(r1, r1)).eigenvalues())
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        (self.xx - o.xx).abs().max((self.xy - o.xy).abs()).max((self.yy - o.yy).abs())
    }

    /// Number of first-axis indices carried by component `(a, b)`.
    pub(crate) fn axis0_count(a: usize, b: usize) -> usize {
        (a == 0) as usize + (b == 0) as usize
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Self::new(f(self.xx), f(self.xy), f(self.yy))
    }
}
