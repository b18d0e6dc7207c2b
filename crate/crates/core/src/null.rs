//! The ambient null manifold: degenerate block metrics with a rank-one
//! radical, the screen projection, Frénet frames along null curves and the
//! distinguished parameter that turns a null curve into a null geodesic.
//!
//! Ambient vectors are written `[radical, leaf_0, leaf_1]`.

use crate::fd::sampled_derivative;
use crate::metric::{GeometryError, LeafMetric};
use crate::scalar::{from_usize, lit, to_f64, Real};
use crate::tensor::Sym2;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NullError {
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("sample parameters must be strictly increasing (at sample {0})")]
    NotIncreasing(usize),
    #[error("tangent is not null at sample {sample}: g(E, {against}) = {value}")]
    NotNull { sample: usize, against: &'static str, value: f64 },
    #[error("screen frame is not orthonormal at sample {sample}")]
    NotOrthonormal { sample: usize },
    #[error("frame is degenerate at sample {0}; projection system is singular")]
    DegenerateFrame(usize),
    #[error("scale `a` must be nonzero")]
    ZeroScale,
    #[error("non-finite value at sample {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T, E = NullError> = std::result::Result<T, E>;

/// Rank-deficient metric `[[0, 0], [0, g']]` with the radical coordinate first.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateMetric<T> {
    leaf: LeafMetric<T>,
}

pub fn assemble_degenerate_metric<T: Real>(leaf: LeafMetric<T>) -> DegenerateMetric<T> {
    DegenerateMetric { leaf }
}

/// Ambient 3×3 block matrix for one leaf metric value.
pub fn block_matrix<T: Real>(g: &Sym2<T>) -> Mat3<T> {
    let z = T::zero();
    [[z, z, z], [z, g.xx, g.xy], [z, g.xy, g.yy]]
}

impl<T: Real> DegenerateMetric<T> {
    pub fn leaf(&self) -> &LeafMetric<T> {
        &self.leaf
    }

    /// Ambient dimension m = n + 1.
    pub fn dimension(&self) -> usize {
        self.leaf.dimension() + 1
    }

    pub fn radical_rank(&self) -> usize {
        1
    }

    pub fn matrix_at(&self, node: usize) -> Mat3<T> {
        block_matrix(&self.leaf.at(node))
    }

    /// g(v, w) at a node.
    pub fn inner(&self, node: usize, v: Vec3<T>, w: Vec3<T>) -> T {
        let m = self.matrix_at(node);
        (0..3).map(|i| (0..3).map(|j| v[i] * m[i][j] * w[j]).sum::<T>()).sum()
    }

    /// Numerical rank at every node: eigenvalues above `rel_tol · max |λ|`.
    pub fn ranks(&self, rel_tol: T) -> Vec<usize> {
        (0..self.leaf.grid().len())
            .map(|n| {
                let ev = symmetric_eigenvalues(self.matrix_at(n));
                let big = ev.iter().fold(T::zero(), |m, v| m.max(v.abs()));
                ev.iter().filter(|v| v.abs() > rel_tol * big).count()
            })
            .collect()
    }
}

/// Eigenvalues of a symmetric 3×3 matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<T: Real>(mut a: Mat3<T>) -> [T; 3] {
    for _ in 0..50 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off <= T::min_positive_value() {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (lit::<T>(2.0) * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
        }
    }
    let mut ev = [a[0][0], a[1][1], a[2][2]];
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Radical test tolerance on `|g(v, ∂_k)|`.
pub const RADICAL_TOL: f64 = 1e-12;

/// True at nodes where `g(v, X) = 0` for every coordinate basis vector `X`.
pub fn radical_check<T: Real>(metric: &DegenerateMetric<T>, vectors: &[Vec3<T>]) -> Result<Vec<bool>> {
    let n = metric.leaf.grid().len();
    if vectors.len() != n {
        return Err(NullError::LengthMismatch { expected: n, got: vectors.len() });
    }
    let tol = lit::<T>(RADICAL_TOL);
    Ok(vectors
        .iter()
        .enumerate()
        .map(|(node, v)| {
            let m = metric.matrix_at(node);
            (0..3).all(|k| (0..3).map(|j| m[k][j] * v[j]).sum::<T>().abs() <= tol)
        })
        .collect())
}

/// Drops the radical component, leaving the screen (leaf) part.
pub fn screen_projection<T: Real>(vectors: &[Vec3<T>]) -> Vec<[T; 2]> {
    vectors.iter().map(|v| [v[1], v[2]]).collect()
}

/// Screen vectors as ambient vectors with zero radical part.
pub fn lift<T: Real>(vectors: &[[T; 2]]) -> Vec<Vec3<T>> {
    vectors.iter().map(|v| [T::zero(), v[0], v[1]]).collect()
}

/// Null curve with a Frénet frame `{E, W₁, W₂}` sampled along it.
#[derive(Debug, Clone, PartialEq)]
pub struct NullCurveFrame<T> {
    params: Vec<T>,
    tangent: Vec<Vec3<T>>,
    w1: Vec<Vec3<T>>,
    w2: Vec<Vec3<T>>,
}

/// Frame conditions are checked to this tolerance, relative to the frame scale.
pub const FRAME_TOL: f64 = 1e-10;

/// Minimum number of samples for the derivative stencils.
pub const MIN_SAMPLES: usize = 7;

impl<T: Real> NullCurveFrame<T> {
    /// Validates `g(E,E) = g(E,W_i) = 0` and `g(W_i,W_j) = δ_ij` under the
    /// constant degenerate metric `ambient`.
    pub fn new(
        params: Vec<T>,
        tangent: Vec<Vec3<T>>,
        w1: Vec<Vec3<T>>,
        w2: Vec<Vec3<T>>,
        ambient: &Mat3<T>,
    ) -> Result<Self> {
        let n = params.len();
        if n < MIN_SAMPLES {
            return Err(NullError::TooFewSamples { need: MIN_SAMPLES, got: n });
        }
        for len in [tangent.len(), w1.len(), w2.len()] {
            if len != n {
                return Err(NullError::LengthMismatch { expected: n, got: len });
            }
        }
        if let Some(k) = params.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(NullError::NotIncreasing(k + 1));
        }
        let g = |v: &Vec3<T>, w: &Vec3<T>| -> T {
            (0..3).map(|i| (0..3).map(|j| v[i] * ambient[i][j] * w[j]).sum::<T>()).sum()
        };
        let tol = lit::<T>(FRAME_TOL);
        for k in 0..n {
            let all = [tangent[k], w1[k], w2[k]];
            if all.iter().flatten().any(|v| !v.is_finite()) || !params[k].is_finite() {
                return Err(NullError::NonFinite(k));
            }
            let scale = tangent[k].iter().fold(T::one(), |m, v| m.max(v.abs()));
            for (name, other) in [("E", &tangent[k]), ("W1", &w1[k]), ("W2", &w2[k])] {
                let value = g(&tangent[k], other);
                if value.abs() > tol * scale * scale {
                    return Err(NullError::NotNull { sample: k, against: name, value: to_f64(value) });
                }
            }
            let gram = [g(&w1[k], &w1[k]) - T::one(), g(&w1[k], &w2[k]), g(&w2[k], &w2[k]) - T::one()];
            if gram.iter().any(|v| v.abs() > tol) {
                return Err(NullError::NotOrthonormal { sample: k });
            }
        }
        Ok(Self { params, tangent, w1, w2 })
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn tangent(&self) -> &[Vec3<T>] {
        &self.tangent
    }

    pub fn screen_frame(&self) -> (&[Vec3<T>], &[Vec3<T>]) {
        (&self.w1, &self.w2)
    }
}

/// Covariant derivative along a sampled curve.
pub trait ConnectionEvaluator<T> {
    /// `∇_E V` at every sample, where `E = d/dt` is the curve tangent.
    fn along(&self, params: &[T], tangent: &[Vec3<T>], field: &[Vec3<T>]) -> Vec<Vec3<T>>;
}

/// Flat connection of a coordinate space: `∇_E V = dV/dt`, differentiated
/// numerically with a sliding stencil of `width` samples.
#[derive(Debug, Clone, Copy)]
pub struct FlatAmbient {
    pub width: usize,
}

impl Default for FlatAmbient {
    fn default() -> Self {
        Self { width: 7 }
    }
}

impl<T: Real> ConnectionEvaluator<T> for FlatAmbient {
    fn along(&self, params: &[T], _tangent: &[Vec3<T>], field: &[Vec3<T>]) -> Vec<Vec3<T>> {
        let comps: Vec<Vec<T>> = (0..3)
            .map(|c| {
                let ys: Vec<T> = field.iter().map(|v| v[c]).collect();
                sampled_derivative(params, &ys, 1, self.width)
            })
            .collect();
        (0..field.len()).map(|k| [comps[0][k], comps[1][k], comps[2][k]]).collect()
    }
}

/// Structure functions of the Frénet equations at every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FrenetFunctions<T> {
    pub h: Vec<T>,
    pub k1: Vec<T>,
    pub k2: Vec<T>,
    pub k3: Vec<T>,
}

/// Coefficients of `v` in the basis `{e0, e1, e2}` (Cramer's rule).
fn frame_coefficients<T: Real>(basis: [Vec3<T>; 3], v: Vec3<T>) -> Option<Vec3<T>> {
    let det3 = |a: Vec3<T>, b: Vec3<T>, c: Vec3<T>| {
        a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1]) + c[0] * (a[1] * b[2] - a[2] * b[1])
    };
    let [e0, e1, e2] = basis;
    let d = det3(e0, e1, e2);
    let scale = [e0, e1, e2].iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()));
    if !(d.abs() > lit::<T>(1e-12) * scale * scale * scale) {
        return None;
    }
    Some([det3(v, e1, e2) / d, det3(e0, v, e2) / d, det3(e0, e1, v) / d])
}

/// Fits `∇_E E = h̃E`, `∇_E W₁ = −k₁E + k₃W₂`, `∇_E W₂ = −k₂E − k₃W₁` by
/// projecting the covariant derivatives onto the frame.
pub fn frenet_functions<T: Real>(
    curve: &NullCurveFrame<T>,
    connection: &impl ConnectionEvaluator<T>,
) -> Result<FrenetFunctions<T>> {
    let t = &curve.params;
    let de = connection.along(t, &curve.tangent, &curve.tangent);
    let dw1 = connection.along(t, &curve.tangent, &curve.w1);
    let dw2 = connection.along(t, &curve.tangent, &curve.w2);
    let n = t.len();
    let mut out = FrenetFunctions {
        h: Vec::with_capacity(n),
        k1: Vec::with_capacity(n),
        k2: Vec::with_capacity(n),
        k3: Vec::with_capacity(n),
    };
    for k in 0..n {
        let basis = [curve.tangent[k], curve.w1[k], curve.w2[k]];
        let ce = frame_coefficients(basis, de[k]).ok_or(NullError::DegenerateFrame(k))?;
        let c1 = frame_coefficients(basis, dw1[k]).ok_or(NullError::DegenerateFrame(k))?;
        let c2 = frame_coefficients(basis, dw2[k]).ok_or(NullError::DegenerateFrame(k))?;
        out.h.push(ce[0]);
        out.k1.push(-c1[0]);
        out.k3.push(c1[2]);
        out.k2.push(-c2[0]);
    }
    Ok(out)
}

/// Reparametrisation `t(t*)` of a null curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ReparamResult<T> {
    pub t_star: Vec<T>,
    pub t: Vec<T>,
    pub a: T,
    pub b: T,
    /// `|∇_{d/dp} d/dp|` in units of the new tangent, per sample.
    pub residuals: Vec<T>,
    /// Max of `residuals`.
    pub residual: T,
    /// Richardson estimate of the quadrature error in `t`.
    pub quadrature_error: T,
}

impl<T: Real> ReparamResult<T> {
    /// Distinguished parameter `p = (t − b)/a` at every sample.
    pub fn distinguished(&self) -> Vec<T> {
        self.t.iter().map(|&t| (t - self.b) / self.a).collect()
    }

    pub fn is_strictly_monotone(&self) -> bool {
        let up = self.t.windows(2).all(|w| w[1] > w[0]);
        let down = self.t.windows(2).all(|w| w[1] < w[0]);
        up || down
    }
}

fn simpson<T: Real>(f: &impl Fn(T) -> T, lo: T, hi: T) -> T {
    let mid = (lo + hi) * lit(0.5);
    (hi - lo) / lit(6.0) * (f(lo) + lit::<T>(4.0) * f(mid) + f(hi))
}

fn composite_simpson<T: Real>(f: &impl Fn(T) -> T, lo: T, hi: T, panels: usize) -> T {
    let h = (hi - lo) / from_usize(panels);
    (0..panels)
        .map(|k| {
            let a = lo + h * from_usize(k);
            simpson(f, a, a + h)
        })
        .sum()
}

/// `t(t*) = a ∫_{t₀}^{t*} exp(∫_{s₀}^{s} h̃*) ds + b` at every sample, by
/// nested composite Simpson; each outer panel is split `refine` times.
fn nested_quadrature<T: Real>(h_star: &impl Fn(T) -> T, samples: &[T], s0: T, a: T, b: T, refine: usize) -> Vec<T> {
    let t0 = samples[0];
    let span = samples[samples.len() - 1] - t0;
    let mean_step = span / from_usize(samples.len() - 1);
    let lead_panels = (((t0 - s0).abs() / mean_step).ceil().to_usize().unwrap_or(1)).max(1) * refine;
    let mut inner_at = composite_simpson(h_star, s0, t0, lead_panels);
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = T::zero();
    out.push(b);
    for w in samples.windows(2) {
        let step = (w[1] - w[0]) / from_usize(refine);
        for r in 0..refine {
            let lo = w[0] + step * from_usize(r);
            let hi = lo + step;
            let mid = (lo + hi) * lit(0.5);
            let h_mid = inner_at + simpson(h_star, lo, mid);
            let h_hi = h_mid + simpson(h_star, mid, hi);
            acc = acc + step / lit(6.0) * (inner_at.exp() + lit::<T>(4.0) * h_mid.exp() + h_hi.exp());
            inner_at = h_hi;
        }
        out.push(a * acc + b);
    }
    out
}

/// Solves `t'' = h̃* t'` for the general parameter and measures how far the
/// distinguished parameter is from making the curve a geodesic.
pub fn distinguished_parameter<T: Real>(
    h_star: impl Fn(T) -> T,
    samples: &[T],
    s0: T,
    a: T,
    b: T,
) -> Result<ReparamResult<T>> {
    if a == T::zero() {
        return Err(NullError::ZeroScale);
    }
    if samples.len() < MIN_SAMPLES {
        return Err(NullError::TooFewSamples { need: MIN_SAMPLES, got: samples.len() });
    }
    if let Some(k) = samples.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(NullError::NotIncreasing(k + 1));
    }
    let coarse = nested_quadrature(&h_star, samples, s0, a, b, 1);
    let t = nested_quadrature(&h_star, samples, s0, a, b, 2);
    if let Some(k) = t.iter().position(|v| !v.is_finite()) {
        return Err(NullError::NonFinite(k));
    }
    let quadrature_error = t
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (*f - *c).abs() / lit(15.0))
        .fold(T::zero(), T::max);
    let d1 = sampled_derivative(samples, &t, 1, 7);
    let d2 = sampled_derivative(samples, &t, 2, 8);
    let residuals: Vec<T> = (0..samples.len())
        .map(|k| (a / d1[k] * (h_star(samples[k]) - d2[k] / d1[k])).abs())
        .collect();
    let residual = residuals.iter().copied().fold(T::zero(), T::max);
    Ok(ReparamResult { t_star: samples.to_vec(), t, a, b, residuals, residual, quadrature_error })
}
