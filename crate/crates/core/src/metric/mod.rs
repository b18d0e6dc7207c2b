//! Tensor calculus on discretised leaves: metric storage, curvature,
//! differential operators and geodesic distance.

mod curvature;
mod distance;
mod identities;
mod interp;
mod operators;
mod scenario;

use std::sync::Arc;

pub use curvature::{christoffel, curvature, effective_curvature, CurvaturePack};
pub use distance::{geodesic_distance, DistanceCenter, DistanceField, DistanceOptions};
pub use identities::{bochner_residual, ricci_identity_residual};
pub use operators::{
    divergence, grad_norm_sq, gradient, hessian, laplace_beltrami, DiffOperators, VectorField,
};
pub use scenario::{build_scenario_metric, ScenarioId, ScenarioParams, SphereLayout};

use crate::grid::{GridError, LeafGrid, Topology};
use crate::scalar::Real;
use crate::tensor::Sym2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("metric is singular at node {node} (determinant {det})")]
    SingularMetric { node: usize, det: f64 },
    #[error("metric is not positive definite at node {node} (smallest eigenvalue {eigenvalue})")]
    NotPositiveDefinite { node: usize, eigenvalue: f64 },
    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} node values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

/// Marks a metric that is exactly `radius_sq * (dθ² + sin²θ dφ²)` on a polar grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundReduction<T> {
    pub radius_sq: T,
}

/// Riemannian metric sampled at every node of a leaf grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafMetric<T> {
    grid: Arc<LeafGrid<T>>,
    components: Vec<Sym2<T>>,
    round: Option<RoundReduction<T>>,
}

impl<T: Real> LeafMetric<T> {
    /// Validates symmetry (by storage), finiteness and positive definiteness.
    pub fn new(grid: Arc<LeafGrid<T>>, components: Vec<Sym2<T>>) -> Result<Self> {
        if components.len() != grid.len() {
            return Err(GeometryError::LengthMismatch { expected: grid.len(), got: components.len() });
        }
        for (node, g) in components.iter().enumerate() {
            if !g.is_finite() {
                return Err(GeometryError::NonFinite { node });
            }
            let (lo, _) = g.eigenvalues();
            if lo <= T::zero() {
                return Err(GeometryError::NotPositiveDefinite {
                    node,
                    eigenvalue: crate::scalar::to_f64(lo),
                });
            }
        }
        Ok(Self { grid, components, round: None })
    }

    /// Round sphere of squared radius `radius_sq` on a spherical or axisymmetric grid.
    pub fn round_sphere(grid: Arc<LeafGrid<T>>, radius_sq: T) -> Result<Self> {
        if grid.topology() == Topology::Periodic {
            return Err(GeometryError::InvalidParameter {
                name: "grid",
                reason: "round sphere needs a polar grid".into(),
            });
        }
        if !(radius_sq > T::zero()) || !radius_sq.is_finite() {
            return Err(GeometryError::InvalidParameter {
                name: "radius",
                reason: "must be positive".into(),
            });
        }
        let components = (0..grid.len())
            .map(|n| {
                let s = grid.coord(n)[0].sin();
                Sym2::diag(radius_sq, radius_sq * s * s)
            })
            .collect();
        let mut m = Self::new(grid, components)?;
        m.round = Some(RoundReduction { radius_sq });
        Ok(m)
    }

    pub fn grid(&self) -> &LeafGrid<T> {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<LeafGrid<T>> {
        Arc::clone(&self.grid)
    }

    pub fn components(&self) -> &[Sym2<T>] {
        &self.components
    }

    #[inline]
    pub fn at(&self, node: usize) -> Sym2<T> {
        self.components[node]
    }

    /// Leaf dimension n.
    pub fn dimension(&self) -> usize {
        crate::tensor::DIM
    }

    pub fn round_reduction(&self) -> Option<RoundReduction<T>> {
        self.round
    }

    /// Smallest eigenvalue over all nodes and the node attaining it.
    pub fn min_eigenvalue(&self) -> (usize, T) {
        let mut best = (0, T::infinity());
        for (n, g) in self.components.iter().enumerate() {
            let lo = g.eigenvalues().0;
            if lo < best.1 {
                best = (n, lo);
            }
        }
        best
    }

    /// Inverse metric at every node.
    pub fn inverse(&self) -> Result<Vec<Sym2<T>>> {
        self.components
            .iter()
            .enumerate()
            .map(|(node, g)| {
                g.inverse().ok_or(GeometryError::SingularMetric {
                    node,
                    det: crate::scalar::to_f64(g.det()),
                })
            })
            .collect()
    }

    /// Largest componentwise difference to another metric on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(T::zero(), T::max)
    }
}

/// Scalar field on a leaf grid; finite at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: Arc<LeafGrid<T>>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: Arc<LeafGrid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GeometryError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite { node });
        }
        Ok(Self { grid, values })
    }

    /// Evaluates `f` at the coordinates of every node.
    pub fn from_fn(grid: Arc<LeafGrid<T>>, f: impl Fn([T; 2]) -> T) -> Result<Self> {
        let values = (0..grid.len()).map(|n| f(grid.coord(n))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<LeafGrid<T>>, c: T) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    pub fn grid(&self) -> &LeafGrid<T> {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<LeafGrid<T>> {
        Arc::clone(&self.grid)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

pub(crate) fn check_same_grid<T: Real>(a: &LeafGrid<T>, b: &LeafGrid<T>) -> Result<()> {
    if a.same_layout(b) {
        Ok(())
    } else {
        Err(GeometryError::GridMismatch)
    }
}
