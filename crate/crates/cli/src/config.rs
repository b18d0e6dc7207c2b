//! Run configuration: a TOML document with `[scenario]`, `[flow]`, `[heat]`,
//! `[estimate]` and optional `[fault]` tables.

use std::path::PathBuf;

use nullflow_core::flow::{DtController, FlowConfig, FlowDirection, HeatCoupling};
use nullflow_core::metric::{DistanceCenter, ScenarioId, ScenarioParams, SphereLayout};
use nullflow_core::{CurvatureBounds, EstimateParams, TheoremId};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub theorems: Vec<TheoremId>,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub heat: HeatSection,
    #[serde(default)]
    pub estimate: EstimateSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<FaultSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    Spherical,
    Axisymmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSection {
    pub name: String,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "tau")]
    pub side: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_layout")]
    pub layout: Layout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSection {
    #[serde(default = "default_direction")]
    pub direction: FlowDirection,
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_controller")]
    pub controller: DtController,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_sing: Option<f64>,
    #[serde(default = "default_coupling")]
    pub coupling: HeatCoupling,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self {
            direction: default_direction(),
            t_end: 1.0,
            dt: default_dt(),
            controller: default_controller(),
            eps_sing: None,
            coupling: default_coupling(),
            sample_every: default_sample_every(),
        }
    }
}

/// Initial heat data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialData {
    Constant,
    /// `2 + cos θ` on polar grids.
    TwoPlusCosTheta,
    /// `2 + sin x` on periodic grids.
    TwoPlusSinX,
    /// `2 + ` a seeded sum of low Fourier modes with total amplitude ≤ 1.
    RandomSmooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatSection {
    #[serde(default = "default_initial")]
    pub initial: InitialData,
    #[serde(default = "one")]
    pub value: f64,
}

impl Default for HeatSection {
    fn default() -> Self {
        Self { initial: default_initial(), value: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsSection {
    #[serde(default)]
    pub rho1: f64,
    #[serde(default)]
    pub rho2: f64,
    #[serde(default)]
    pub rho3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSection {
    #[serde(default = "two")]
    pub alpha: f64,
    #[serde(default = "four")]
    pub p: f64,
    #[serde(default = "four")]
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Cube centre; defaults to the north pole on polar grids and node 0 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_node: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSection>,
}

impl Default for EstimateSection {
    fn default() -> Self {
        Self { alpha: 2.0, p: 4.0, q: 4.0, radius: None, center_node: None, a: None, bounds: None }
    }
}

/// Multiplies the stored heat field at one sample and node after the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSection {
    pub sample: usize,
    pub node: usize,
    #[serde(default = "default_factor")]
    pub factor: f64,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn four() -> f64 {
    4.0
}
fn tau() -> f64 {
    std::f64::consts::TAU
}
fn default_amplitude() -> f64 {
    0.2
}
fn default_resolution() -> usize {
    32
}
fn default_layout() -> Layout {
    Layout::Spherical
}
fn default_direction() -> FlowDirection {
    FlowDirection::Forward
}
fn default_dt() -> f64 {
    1e-4
}
fn default_controller() -> DtController {
    DtController::Fixed
}
fn default_coupling() -> HeatCoupling {
    HeatCoupling::None
}
fn default_sample_every() -> usize {
    100
}
fn default_initial() -> InitialData {
    InitialData::Constant
}
fn default_factor() -> f64 {
    1.1
}

/// Parses and validates a configuration. Unknown keys are errors when
/// `strict`, otherwise they are returned so the caller can warn.
pub fn parse_config(text: &str, strict: bool) -> Result<(RunConfig, Vec<String>), CliError> {
    let located = |e: toml::de::Error| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        CliError::Parse { line, column, message: e.message().trim().to_string() }
    };
    let de = toml::Deserializer::parse(text).map_err(located)?;
    let mut unknown = Vec::new();
    let cfg: RunConfig = serde_ignored::deserialize(de, |path| unknown.push(path.to_string())).map_err(located)?;
    if strict && !unknown.is_empty() {
        return Err(CliError::UnknownKeys(unknown.join(", ")));
    }
    cfg.validate()?;
    Ok((cfg, unknown))
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

fn constraint(name: &'static str, reason: impl Into<String>) -> CliError {
    CliError::Constraint { name, reason: reason.into() }
}

impl RunConfig {
    pub fn render(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let id: ScenarioId = self.scenario.name.parse().map_err(|_| {
            constraint("scenario.name", format!("unknown scenario `{}`", self.scenario.name))
        })?;
        self.flow_config().validate().map_err(|e| constraint("flow", e.to_string()))?;
        let est = &self.estimate;
        let gap = (1.0 / est.p + 1.0 / est.q - 1.0 / est.alpha).abs();
        if !(est.p > 0.0 && est.q > 0.0) || gap > nullflow_core::estimate::EXPONENT_TOL {
            return Err(constraint("alpha-p-q", format!("1/p + 1/q = 1/alpha fails by {gap}")));
        }
        if !(est.alpha >= 1.0) {
            return Err(constraint("estimate.alpha", "must be at least 1"));
        }
        let polar = id == ScenarioId::RoundSphere;
        match self.heat.initial {
            InitialData::TwoPlusCosTheta if !polar => {
                return Err(constraint("heat.initial", "two-plus-cos-theta needs the round-sphere scenario"))
            }
            InitialData::TwoPlusSinX | InitialData::RandomSmooth if polar => {
                return Err(constraint("heat.initial", "this initial data needs a periodic scenario"))
            }
            InitialData::Constant if !(self.heat.value > 0.0) => {
                return Err(constraint("heat.value", "must be positive"))
            }
            _ => {}
        }
        if !self.theorems.is_empty() && self.flow.coupling == HeatCoupling::None {
            return Err(constraint("flow.coupling", "estimates need a heat or conjugate-heat coupling"));
        }
        if polar && self.scenario.layout == Layout::Axisymmetric && est.center_node.is_some() {
            return Err(constraint("estimate.center_node", "axisymmetric grids measure distance from the pole"));
        }
        if let Some(f) = &self.fault {
            if !(f.factor > 0.0) {
                return Err(constraint("fault.factor", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn scenario_params(&self) -> ScenarioParams<f64> {
        let s = &self.scenario;
        ScenarioParams {
            radius: s.radius,
            side: s.side,
            amplitude: s.amplitude,
            resolution: s.resolution,
            layout: match s.layout {
                Layout::Spherical => SphereLayout::Spherical,
                Layout::Axisymmetric => SphereLayout::Axisymmetric,
            },
        }
    }

    pub fn flow_config(&self) -> FlowConfig<f64> {
        let f = &self.flow;
        FlowConfig {
            direction: f.direction,
            t_end: f.t_end,
            dt: f.dt,
            controller: f.controller,
            eps_sing: f.eps_sing,
            coupling: f.coupling,
            sample_every: f.sample_every,
        }
    }

    pub fn estimate_params(&self, theorem: TheoremId) -> EstimateParams<f64> {
        let e = &self.estimate;
        let center = match e.center_node {
            Some(n) => DistanceCenter::Node(n),
            None if self.scenario.name == "round-sphere" => DistanceCenter::NorthPole,
            None => DistanceCenter::Node(0),
        };
        let base = if theorem == TheoremId::LiYau {
            EstimateParams::li_yau()
        } else {
            EstimateParams { alpha: e.alpha, p: e.p, q: e.q, ..EstimateParams::default() }
        };
        EstimateParams {
            radius: e.radius,
            center,
            a: e.a,
            bounds: e.bounds.map(|b| CurvatureBounds { rho1: b.rho1, rho2: b.rho2, rho3: b.rho3 }),
            ..base
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[scenario]\nname = \"round-sphere\"\nradius = 1.0\n\n[flow]\nt_end = 0.45\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let (cfg, unknown) = parse_config(MINIMAL, true).unwrap();
        assert!(unknown.is_empty());
        assert_eq!(cfg.flow.t_end, 0.45);
        assert_eq!(cfg.flow.dt, 1e-4);
        assert_eq!(cfg.scenario.resolution, 32);
        assert_eq!(cfg.estimate.alpha, 2.0);
        let (again, _) = parse_config(&cfg.render(), true).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn exponent_constraint_is_named() {
        let ok = format!("{MINIMAL}\n[estimate]\nalpha = 2.0\np = 3.0\nq = 6.0\n");
        assert!(parse_config(&ok, true).is_ok());
        let bad = ok.replace("q = 6.0", "q = 5.0");
        match parse_config(&bad, true) {
            Err(CliError::Constraint { name, .. }) => assert_eq!(name, "alpha-p-q"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_depend_on_strictness() {
        let text = format!("{MINIMAL}colour = \"red\"\n");
        assert!(matches!(parse_config(&text, true), Err(CliError::UnknownKeys(k)) if k == "flow.colour"));
        let (_, unknown) = parse_config(&text, false).unwrap();
        assert_eq!(unknown, ["flow.colour"]);
    }

    #[test]
    fn parse_errors_carry_a_position() {
        let text = "[scenario]\nname = \"round-sphere\"\nradius = = 1\n";
        match parse_config(text, true) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
