use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GeometryError, LeafMetric, Result};
use crate::grid::LeafGrid;
use crate::scalar::{lit, Real};
use crate::tensor::Sym2;

/// Built-in leaf geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    RoundSphere,
    FlatTorus,
    TorusBump,
}

impl ScenarioId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioId::RoundSphere => "round-sphere",
            ScenarioId::FlatTorus => "flat-torus",
            ScenarioId::TorusBump => "torus-bump",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "round-sphere" => Ok(ScenarioId::RoundSphere),
            "flat-torus" => Ok(ScenarioId::FlatTorus),
            "torus-bump" => Ok(ScenarioId::TorusBump),
            other => Err(GeometryError::UnknownScenario(other.to_string())),
        }
    }
}

/// Grid used for the round sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphereLayout {
    /// Full colatitude/longitude grid with `2 * resolution` longitudes.
    #[default]
    Spherical,
    /// Longitude-independent fields on a colatitude grid.
    Axisymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams<T> {
    pub radius: T,
    pub side: T,
    pub amplitude: T,
    pub resolution: usize,
    pub layout: SphereLayout,
}

impl<T: Real> Default for ScenarioParams<T> {
    fn default() -> Self {
        Self {
            radius: T::one(),
            side: T::TAU(),
            amplitude: lit(0.2),
            resolution: 32,
            layout: SphereLayout::Spherical,
        }
    }
}

/// Builds the initial leaf metric of a named scenario.
pub fn build_scenario_metric<T: Real>(name: &str, params: &ScenarioParams<T>) -> Result<LeafMetric<T>> {
    let id: ScenarioId = name.parse()?;
    let n = params.resolution;
    match id {
        ScenarioId::RoundSphere => {
            if !(params.radius > T::zero()) {
                return Err(GeometryError::InvalidParameter {
                    name: "radius",
                    reason: format!("must be positive, got {}", params.radius),
                });
            }
            let grid = match params.layout {
                SphereLayout::Spherical => LeafGrid::spherical(n, 2 * n)?,
                SphereLayout::Axisymmetric => LeafGrid::axisymmetric(n)?,
            };
            LeafMetric::round_sphere(Arc::new(grid), params.radius * params.radius)
        }
        ScenarioId::FlatTorus => {
            let grid = Arc::new(torus_grid(n, params.side)?);
            let comps = vec![Sym2::identity(); grid.len()];
            LeafMetric::new(grid, comps)
        }
        ScenarioId::TorusBump => {
            let amp = params.amplitude;
            if !(amp.abs() < T::one()) {
                return Err(GeometryError::InvalidParameter {
                    name: "amplitude",
                    reason: format!("|amplitude| must be below 1 to stay positive definite, got {amp}"),
                });
            }
            let grid = Arc::new(torus_grid(n, params.side)?);
            let k = T::TAU() / params.side;
            let comps = (0..grid.len())
                .map(|node| {
                    let [x, y] = grid.coord(node);
                    Sym2::identity().scale(T::one() + amp * (k * x).sin() * (k * y).sin())
                })
                .collect();
            LeafMetric::new(grid, comps)
        }
    }
}

fn torus_grid<T: Real>(n: usize, side: T) -> Result<LeafGrid<T>> {
    if !(side > T::zero()) {
        return Err(GeometryError::InvalidParameter {
            name: "side",
            reason: format!("must be positive, got {side}"),
        });
    }
    Ok(LeafGrid::periodic(n, n, side, side)?)
}
