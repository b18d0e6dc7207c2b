//! Degenerate Ricci-type flow on the screen leaves of globally null manifolds.
//!
//! The crate evolves discretised leaf metrics under `∂_t g = ∓2 Ric`, co-solves
//! heat and conjugate heat equations on the evolving leaf, and evaluates both
//! sides of the Li–Yau type gradient estimates pointwise.
//!
//! Everything is generic over the scalar type through [`Real`]; the aliases at
//! the crate root fix it to `f64` (or `f32` where suffixed).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod estimate;
pub mod fd;
pub mod flow;
pub mod grid;
pub mod metric;
pub mod null;
pub mod scalar;
pub mod tensor;

pub use estimate::{verify, EstimateParams, EstimateReport, EstimateStatus, TheoremId};
pub use flow::{CurvatureBounds, FlowConfig, FlowDirection, FlowError, FlowTrajectory};
pub use grid::{GridError, LeafGrid, Topology};
pub use metric::{GeometryError, LeafMetric, ScalarField};
pub use scalar::Real;
pub use tensor::Sym2;

pub type Grid = LeafGrid<f64>;
pub type Metric = LeafMetric<f64>;
pub type Field = ScalarField<f64>;
pub type Curvature = metric::CurvaturePack<f64>;
pub type Trajectory = FlowTrajectory<f64>;

pub type Grid32 = LeafGrid<f32>;
pub type Metric32 = LeafMetric<f32>;
pub type Field32 = ScalarField<f32>;
pub type Trajectory32 = FlowTrajectory<f32>;
