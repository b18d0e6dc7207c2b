//! Builds the scenario, runs the flow, checks the requested estimates and
//! writes the artifacts.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use nullflow_core::estimate::{build_cutoff, Constants, CutoffCertificate};
use nullflow_core::flow::{run_flow, HeatCoupling, Termination};
use nullflow_core::metric::build_scenario_metric;
use nullflow_core::null::{assemble_degenerate_metric, radical_check};
use nullflow_core::{verify, EstimateReport, EstimateStatus, Field, Metric, TheoremId, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{InitialData, RunConfig};
use crate::output::{write_json, write_text, write_trajectory};
use crate::{svg, CliError, ExitStatus, SCHEMA_VERSION};

/// Relative eigenvalue cutoff for the numerical rank of the ambient metric.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StructureCheck {
    pub nodes: usize,
    pub rank_min: usize,
    pub rank_max: usize,
    /// Nodes where the radical direction is orthogonal to everything.
    pub radical_passed: usize,
}

impl StructureCheck {
    pub fn of(metric: &Metric) -> Result<Self, CliError> {
        let nodes = metric.grid().len();
        let ambient = assemble_degenerate_metric(metric.clone());
        let ranks = ambient.ranks(RANK_TOL);
        let radical = radical_check(&ambient, &vec![[1.0, 0.0, 0.0]; nodes])
            .map_err(|e| CliError::Constraint { name: "structure", reason: e.to_string() })?;
        Ok(Self {
            nodes,
            rank_min: ranks.iter().copied().min().unwrap_or(0),
            rank_max: ranks.iter().copied().max().unwrap_or(0),
            radical_passed: radical.iter().filter(|&&ok| ok).count(),
        })
    }

    pub fn is_clean(&self, dim: usize) -> bool {
        self.rank_min == dim && self.rank_max == dim && self.radical_passed == self.nodes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Structure {
    pub initial: StructureCheck,
    #[serde(rename = "final")]
    pub last: StructureCheck,
}

/// Comparison of a round-sphere run with `r(t) = √(R₀² − 2t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusCheck {
    pub initial_radius: f64,
    pub max_relative_error: f64,
    pub worst_time: f64,
}

/// Everything written to `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunDocument {
    pub schema_version: u32,
    pub config: RunConfig,
    pub termination: Termination,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singular_time: Option<f64>,
    pub final_time: f64,
    pub samples: usize,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<RadiusCheck>,
    pub structure: Structure,
    pub certificate: CutoffCertificate,
    pub constants: Constants,
    pub reports: Vec<EstimateReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremSummary {
    pub theorem: TheoremId,
    pub status: EstimateStatus,
    pub min_margin: f64,
    pub max_violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timings {
    pub flow_seconds: f64,
    pub verify_seconds: f64,
    pub total_seconds: f64,
}

/// Printed after a run; carries wall-clock timings, so it is not written to disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub termination: Termination,
    pub singular_time: Option<f64>,
    pub theorems: Vec<TheoremSummary>,
    pub timings: Timings,
}

impl RunSummary {
    pub fn exit_status(&self) -> ExitStatus {
        exit_status(self.theorems.iter().map(|t| t.status))
    }
}

pub fn exit_status(statuses: impl IntoIterator<Item = EstimateStatus>) -> ExitStatus {
    if statuses.into_iter().any(|s| s == EstimateStatus::Violated) {
        ExitStatus::Violation
    } else {
        ExitStatus::Clean
    }
}

fn status_word(s: EstimateStatus) -> &'static str {
    match s {
        EstimateStatus::Holds => "holds",
        EstimateStatus::Violated => "violated",
        EstimateStatus::HypothesisViolated => "hypothesis-violated",
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.termination {
            Termination::ReachedEnd => writeln!(f, "termination: reached end")?,
            Termination::Singular { time, node } => writeln!(f, "termination: singular at t = {time:.6} (node {node})")?,
            Termination::StepUnderflow { dt } => writeln!(f, "termination: step underflow (dt = {dt:e})")?,
        }
        for t in &self.theorems {
            writeln!(f, "{:<18} {:<20} min margin {:.6e}", t.theorem.as_str(), status_word(t.status), t.min_margin)?;
        }
        write!(
            f,
            "timings: flow {:.3} s, verify {:.3} s, total {:.3} s",
            self.timings.flow_seconds, self.timings.verify_seconds, self.timings.total_seconds
        )
    }
}

pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub document: RunDocument,
    pub summary: RunSummary,
}

/// `2 + Σ aₖ sin(kx·x + ky·y + φₖ)` over a few seeded low modes with `Σ|aₖ| ≤ 0.9`.
pub fn random_smooth_field(metric: &Metric, side: f64, seed: u64) -> Result<Field, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            let (kx, ky) = loop {
                let k = (rng.gen_range(-2i32..=2), rng.gen_range(-2i32..=2));
                if k != (0, 0) {
                    break k;
                }
            };
            (kx as f64, ky as f64, rng.gen::<f64>(), rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let total: f64 = modes.iter().map(|m| m.2).sum();
    let scale = if total > 0.0 { 0.9 / total } else { 0.0 };
    let w = std::f64::consts::TAU / side;
    Ok(Field::from_fn(metric.shared_grid(), |[x, y]| {
        2.0 + modes.iter().map(|&(kx, ky, a, phase)| scale * a * (w * (kx * x + ky * y) + phase).sin()).sum::<f64>()
    })?)
}

pub fn initial_heat(cfg: &RunConfig, metric: &Metric) -> Result<Option<Field>, CliError> {
    if cfg.flow.coupling == HeatCoupling::None {
        return Ok(None);
    }
    let grid = metric.shared_grid();
    let w = std::f64::consts::TAU / cfg.scenario.side;
    let u = match cfg.heat.initial {
        InitialData::Constant => Field::constant(grid, cfg.heat.value)?,
        InitialData::TwoPlusCosTheta => Field::from_fn(grid, |[theta, _]| 2.0 + theta.cos())?,
        InitialData::TwoPlusSinX => Field::from_fn(grid, |[x, _]| 2.0 + (w * x).sin())?,
        InitialData::RandomSmooth => random_smooth_field(metric, cfg.scenario.side, cfg.seed)?,
    };
    Ok(Some(u))
}

fn apply_fault(cfg: &RunConfig, traj: &mut Trajectory) -> Result<(), CliError> {
    let Some(fault) = cfg.fault else { return Ok(()) };
    let bad = |reason: String| CliError::Constraint { name: "fault", reason };
    let samples = traj.len();
    let heat = traj.heat.as_mut().ok_or_else(|| bad("the run has no heat field".into()))?;
    let field = heat.get_mut(fault.sample).ok_or_else(|| bad(format!("sample {} of {samples}", fault.sample)))?;
    let mut values = field.values().to_vec();
    let len = values.len();
    let v = values.get_mut(fault.node).ok_or_else(|| bad(format!("node {} of {len}", fault.node)))?;
    *v *= fault.factor;
    *field = Field::new(field.shared_grid(), values)?;
    Ok(())
}

fn radius_check(traj: &Trajectory) -> Option<RadiusCheck> {
    let r2 = traj.radius_sq()?;
    let (r0_sq, t0) = (r2[0], traj.times[0]);
    let mut worst = (0.0, t0);
    for (&t, &r) in traj.times.iter().zip(&r2) {
        let exact = (r0_sq - 2.0 * (t - t0)).sqrt();
        let err = (r.sqrt() - exact).abs() / exact;
        if err > worst.0 {
            worst = (err, t);
        }
    }
    Some(RadiusCheck { initial_radius: r0_sq.sqrt(), max_relative_error: worst.0, worst_time: worst.1 })
}

/// Checks every requested estimate on an existing trajectory.
pub fn verify_all(cfg: &RunConfig, traj: &Trajectory, cert: &CutoffCertificate) -> Result<Vec<EstimateReport>, CliError> {
    let mut theorems = cfg.theorems.clone();
    theorems.dedup();
    theorems.iter().map(|&th| Ok(verify(traj, th, &cfg.estimate_params(th), cert)?)).collect()
}

/// Runs a configuration in memory.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let metric = build_scenario_metric(&cfg.scenario.name, &cfg.scenario_params())?;
    let u0 = initial_heat(cfg, &metric)?;
    let mut traj = run_flow(&metric, &cfg.flow_config(), u0.as_ref())?;
    apply_fault(cfg, &mut traj)?;
    let flow_seconds = start.elapsed().as_secs_f64();

    let cert = build_cutoff();
    let reports = verify_all(cfg, &traj, &cert)?;
    let verify_seconds = start.elapsed().as_secs_f64() - flow_seconds;

    let singular_time = match traj.termination {
        Termination::Singular { time, .. } => Some(time),
        _ => None,
    };
    let structure = Structure {
        initial: StructureCheck::of(&traj.metrics[0])?,
        last: StructureCheck::of(traj.metrics.last().expect("trajectory has samples"))?,
    };
    let mut config = cfg.clone();
    config.out = None;
    let document = RunDocument {
        schema_version: SCHEMA_VERSION,
        config,
        termination: traj.termination,
        singular_time,
        final_time: traj.final_time(),
        samples: traj.len(),
        steps: traj.steps,
        dt_min: traj.dt_min,
        dt_max: traj.dt_max,
        radius: radius_check(&traj),
        structure,
        certificate: cert,
        constants: cert.constants(metric.dimension()),
        reports,
    };
    let summary = RunSummary {
        termination: traj.termination,
        singular_time,
        theorems: document
            .reports
            .iter()
            .map(|r| TheoremSummary { theorem: r.theorem, status: r.status, min_margin: r.min_margin, max_violation: r.max_violation })
            .collect(),
        timings: Timings { flow_seconds, verify_seconds, total_seconds: start.elapsed().as_secs_f64() },
    };
    Ok(RunOutcome { trajectory: traj, document, summary })
}

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const REPORT_FILE: &str = "report.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const RADIUS_PLOT: &str = "radius.svg";
pub const MARGIN_PLOT: &str = "margins.svg";

/// Runs a configuration and writes the trajectory, report, resolved config and plots to `out`.
pub fn run_to_dir(cfg: &RunConfig, out: &Path) -> Result<RunOutcome, CliError> {
    let outcome = execute(cfg)?;
    std::fs::create_dir_all(out).map_err(CliError::io(out))?;
    write_trajectory(&out.join(TRAJECTORY_FILE), &outcome.trajectory)?;
    write_json(&out.join(REPORT_FILE), &outcome.document)?;
    write_text(&out.join(CONFIG_FILE), &outcome.document.config.render())?;
    if let Some(r2) = outcome.trajectory.radius_sq() {
        write_text(&out.join(RADIUS_PLOT), &svg::radius_plot(&outcome.trajectory.times, &r2))?;
    }
    if !outcome.document.reports.is_empty() {
        write_text(&out.join(MARGIN_PLOT), &svg::margin_plot(&outcome.document.reports))?;
    }
    Ok(outcome)
}
