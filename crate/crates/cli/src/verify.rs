//! Re-checks an estimate on a trajectory read back from CSV.

use std::path::Path;

use nullflow_core::estimate::build_cutoff;
use nullflow_core::metric::build_scenario_metric;
use nullflow_core::{verify, EstimateReport, Field, Metric, TheoremId, Trajectory};

use crate::config::RunConfig;
use crate::output::{read_trajectory, Slice};
use crate::CliError;

/// Rebuilds a trajectory on the grid described by `cfg`. Slices that match
/// the round sphere exactly regain their round reduction.
pub fn load_trajectory(path: &Path, cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let slices = read_trajectory(path)?;
    let initial = build_scenario_metric::<f64>(&cfg.scenario.name, &cfg.scenario_params())?;
    let grid = initial.shared_grid();
    let round = initial.round_reduction().is_some();
    let mut times = Vec::with_capacity(slices.len());
    let mut metrics = Vec::with_capacity(slices.len());
    let mut heat = Vec::with_capacity(slices.len());
    for Slice { t, metric, heat: u } in slices {
        if metric.len() != grid.len() {
            return Err(CliError::Trajectory(format!(
                "slice t = {t} has {} nodes but the configured grid has {}",
                metric.len(),
                grid.len()
            )));
        }
        let general = || Metric::new(grid.clone(), metric.clone());
        let m = if round {
            match Metric::round_sphere(grid.clone(), metric[0].xx) {
                Ok(r) if r.components() == metric.as_slice() => r,
                _ => general()?,
            }
        } else {
            general()?
        };
        times.push(t);
        metrics.push(m);
        heat.push(u.map(|u| Field::new(grid.clone(), u)).transpose()?);
    }
    let heat = if heat.iter().all(Option::is_some) { Some(heat.into_iter().flatten().collect()) } else { None };
    let mut traj = Trajectory::from_samples(cfg.flow.direction, times, metrics, heat)?;
    if traj.heat.is_some() {
        traj.coupling = cfg.flow.coupling;
    }
    Ok(traj)
}

pub fn verify_file(path: &Path, theorem: TheoremId, cfg: &RunConfig) -> Result<EstimateReport, CliError> {
    let traj = load_trajectory(path, cfg)?;
    Ok(verify(&traj, theorem, &cfg.estimate_params(theorem), &build_cutoff())?)
}
