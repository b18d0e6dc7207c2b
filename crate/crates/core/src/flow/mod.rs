//! Time integration of `∂_t g = ∓2 Ric` on a leaf, optionally co-stepped with
//! a heat or conjugate heat equation.

mod bounds;
mod heat;

use serde::{Deserialize, Serialize};

pub use bounds::{
    measure_pinching_bounds, measure_scalar_bounds, metric_equivalence_check, CurvatureBounds, EquivalenceReport,
    EquivalenceStatus,
};
pub use heat::{heat_rhs, solve_conjugate_heat, solve_heat, total_mass};

use crate::metric::{effective_curvature, CurvaturePack, DiffOperators, GeometryError, LeafMetric, ScalarField};
use crate::scalar::{lit, to_f64, Real};
use crate::tensor::Sym2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowDirection {
    /// `∂_t g = −2 Ric`
    Forward,
    /// `∂_t g = +2 Ric`
    Backward,
    /// Static metric; only the coupled heat field evolves.
    Frozen,
}

impl FlowDirection {
    /// Coefficient `s` in `∂_t g = s · Ric`.
    pub fn ricci_coefficient<T: Real>(self) -> T {
        match self {
            FlowDirection::Forward => lit(-2.0),
            FlowDirection::Backward => lit(2.0),
            FlowDirection::Frozen => T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DtController {
    Fixed,
    CflAdaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeatCoupling {
    None,
    /// `u_t = Δu`
    Heat,
    /// `u_t = Δu − Scal · u`
    ConjugateHeat,
}

/// Largest `dt · λ` on the negative real axis for which RK4 is stable.
pub const RK4_STABILITY: f64 = 2.785;
/// Fraction of the stability limit and of `1 / max |Ric|` used by the adaptive controller.
pub const CFL_NUMBER: f64 = 0.2;
/// Default singular threshold relative to the initial smallest eigenvalue.
pub const SINGULAR_FRACTION: f64 = 1e-6;
/// Adaptive steps below `UNDERFLOW_FRACTION · t_end` abort the run.
pub const UNDERFLOW_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig<T> {
    pub direction: FlowDirection,
    pub t_end: T,
    pub dt: T,
    pub controller: DtController,
    /// Absolute threshold on the smallest metric eigenvalue; defaults to
    /// `SINGULAR_FRACTION` times the initial one.
    pub eps_sing: Option<T>,
    pub coupling: HeatCoupling,
    /// Store every `sample_every`-th step (the final state is always stored).
    pub sample_every: usize,
}

impl<T: Real> Default for FlowConfig<T> {
    fn default() -> Self {
        Self {
            direction: FlowDirection::Forward,
            t_end: T::one(),
            dt: lit(1e-4),
            controller: DtController::Fixed,
            eps_sing: None,
            coupling: HeatCoupling::None,
            sample_every: 1,
        }
    }
}

impl<T: Real> FlowConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(FlowError::InvalidConfig { name, reason: reason.to_string() });
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return bad("t_end", "must be positive and finite");
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return bad("dt", "must be positive and finite");
        }
        if let Some(e) = self.eps_sing {
            if !(e > T::zero()) {
                return bad("eps_sing", "must be positive");
            }
        }
        if self.sample_every == 0 {
            return bad("sample_every", "must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid flow configuration `{name}`: {reason}")]
    InvalidConfig { name: &'static str, reason: String },
    #[error("metric became singular at node {node} (eigenvalue {eigenvalue})")]
    Singular { node: usize, eigenvalue: f64 },
    #[error("time step {dt} exceeds the heat stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("heat data must be positive; found {value} at node {node}")]
    NonPositiveData { node: usize, value: f64 },
    #[error("heat solution lost positivity at node {node}, t = {time}")]
    PositivityLost { node: usize, time: f64 },
    #[error("{0}")]
    Trajectory(String),
}

pub type Result<T, E = FlowError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Termination {
    ReachedEnd,
    /// Smallest eigenvalue fell below the threshold; `time` extrapolates it to zero.
    Singular { time: f64, node: usize },
    StepUnderflow { dt: f64 },
}

/// Sampled states of a flow, immutable once built.
#[derive(Debug, Clone)]
pub struct FlowTrajectory<T> {
    pub direction: FlowDirection,
    pub coupling: HeatCoupling,
    pub times: Vec<T>,
    pub metrics: Vec<LeafMetric<T>>,
    pub curvature: Vec<CurvaturePack<T>>,
    pub heat: Option<Vec<ScalarField<T>>>,
    pub termination: Termination,
    pub steps: usize,
    pub dt_min: T,
    pub dt_max: T,
}

impl<T: Real> FlowTrajectory<T> {
    /// Builds a trajectory from externally computed samples, e.g. an exact
    /// solution, computing curvature at every sample.
    pub fn from_samples(
        direction: FlowDirection,
        times: Vec<T>,
        metrics: Vec<LeafMetric<T>>,
        heat: Option<Vec<ScalarField<T>>>,
    ) -> Result<Self> {
        if times.is_empty() || metrics.len() != times.len() {
            return Err(FlowError::Trajectory("need one metric per sample time".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FlowError::Trajectory("sample times must be strictly increasing".into()));
        }
        if let Some(h) = &heat {
            if h.len() != times.len() {
                return Err(FlowError::Trajectory("need one heat field per sample time".into()));
            }
            for (u, m) in h.iter().zip(&metrics) {
                if !u.grid().same_layout(m.grid()) {
                    return Err(GeometryError::GridMismatch.into());
                }
            }
        }
        let curvature = metrics.iter().map(effective_curvature).collect::<Result<Vec<_>, _>>()?;
        let coupling = if heat.is_some() { HeatCoupling::Heat } else { HeatCoupling::None };
        Ok(Self {
            direction,
            coupling,
            times,
            metrics,
            curvature,
            heat,
            termination: Termination::ReachedEnd,
            steps: 0,
            dt_min: T::zero(),
            dt_max: T::zero(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("trajectory has samples")
    }

    /// Squared radius of every sample when the metric is a round reduction.
    pub fn radius_sq(&self) -> Option<Vec<T>> {
        self.metrics.iter().map(|m| m.round_reduction().map(|r| r.radius_sq)).collect()
    }
}

fn ricci_rate<T: Real>(metric: &LeafMetric<T>, coef: T) -> Result<Vec<Sym2<T>>> {
    let pack = effective_curvature(metric)?;
    Ok(pack.ricci.iter().map(|r| r.scale(coef)).collect())
}

fn singular_from(err: GeometryError) -> FlowError {
    match err {
        GeometryError::NotPositiveDefinite { node, eigenvalue } => FlowError::Singular { node, eigenvalue },
        GeometryError::SingularMetric { node, det } => FlowError::Singular { node, eigenvalue: det },
        other => other.into(),
    }
}

/// One RK4 step of `∂_t g = ∓2 Ric(g)`.
///
/// Round reductions evolve only the squared radius, whose rate `∓2` is
/// constant, so the step is exact.
pub fn step_flow<T: Real>(metric: &LeafMetric<T>, direction: FlowDirection, dt: T) -> Result<LeafMetric<T>> {
    if !(dt > T::zero()) {
        return Err(FlowError::InvalidConfig { name: "dt", reason: "must be positive".into() });
    }
    let coef = direction.ricci_coefficient::<T>();
    if direction == FlowDirection::Frozen {
        return Ok(metric.clone());
    }
    if let Some(round) = metric.round_reduction() {
        let r2 = round.radius_sq + dt * coef;
        if !(r2 > T::zero()) {
            let (node, lo) = metric.min_eigenvalue();
            return Err(FlowError::Singular { node, eigenvalue: to_f64(lo * r2 / round.radius_sq) });
        }
        return LeafMetric::round_sphere(metric.shared_grid(), r2).map_err(singular_from);
    }
    let grid = metric.shared_grid();
    let g0 = metric.components();
    let stage = |base: &[Sym2<T>], k: &[Sym2<T>], s: T| -> Result<LeafMetric<T>> {
        let comps = base.iter().zip(k).map(|(g, r)| g.axpy(s, r)).collect();
        LeafMetric::new(grid.clone(), comps).map_err(singular_from)
    };
    let half = dt * lit(0.5);
    let k1 = ricci_rate(metric, coef)?;
    let m2 = stage(g0, &k1, half)?;
    let k2 = ricci_rate(&m2, coef)?;
    let m3 = stage(g0, &k2, half)?;
    let k3 = ricci_rate(&m3, coef)?;
    let m4 = stage(g0, &k3, dt)?;
    let k4 = ricci_rate(&m4, coef)?;
    let sixth = dt / lit(6.0);
    let two = lit::<T>(2.0);
    let comps = (0..g0.len())
        .map(|n| {
            let incr = k1[n].add(&k2[n].scale(two)).add(&k3[n].scale(two)).add(&k4[n]);
            g0[n].axpy(sixth, &incr)
        })
        .collect();
    LeafMetric::new(grid, comps).map_err(singular_from)
}

/// Largest `|Ric|` eigenvalue relative to the metric.
fn ricci_scale<T: Real>(metric: &LeafMetric<T>, pack: &CurvaturePack<T>) -> T {
    let (lo, hi) = pack.ricci_eigen_range(metric);
    lo.abs().max(hi.abs())
}

/// Spectral bound of the heat operator on the current metric.
fn heat_stiffness<T: Real>(ops: &DiffOperators<T>, pack: &CurvaturePack<T>, coupling: HeatCoupling) -> T {
    let lap = ops.spectral_radius_bound();
    match coupling {
        HeatCoupling::ConjugateHeat => lap + pack.scalar.iter().fold(T::zero(), |m, s| m.max(s.abs())),
        _ => lap,
    }
}

/// Integrates the flow to `t_end`, stopping early at a singularity or when
/// the adaptive step underflows.
pub fn run_flow<T: Real>(
    initial: &LeafMetric<T>,
    config: &FlowConfig<T>,
    u0: Option<&ScalarField<T>>,
) -> Result<FlowTrajectory<T>> {
    config.validate()?;
    let coupled = config.coupling != HeatCoupling::None;
    let mut u = match (coupled, u0) {
        (true, None) => {
            return Err(FlowError::InvalidConfig { name: "u0", reason: "heat coupling needs initial data".into() })
        }
        (true, Some(u)) => {
            if !u.grid().same_layout(initial.grid()) {
                return Err(GeometryError::GridMismatch.into());
            }
            if let Some((node, &value)) = u.values().iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
                return Err(FlowError::NonPositiveData { node, value: to_f64(value) });
            }
            Some(u.values().to_vec())
        }
        (false, _) => None,
    };
    if config.coupling == HeatCoupling::Heat && config.direction == FlowDirection::Backward {
        return Err(FlowError::InvalidConfig {
            name: "coupling",
            reason: "the heat equation is coupled to forward or frozen flows; use conjugate-heat".into(),
        });
    }
    let eps = config.eps_sing.unwrap_or_else(|| lit::<T>(SINGULAR_FRACTION) * initial.min_eigenvalue().1);
    let t_end = config.t_end;
    let mut metric = initial.clone();
    let mut pack = effective_curvature(&metric)?;
    let mut ops = if coupled { Some(DiffOperators::new(&metric)?) } else { None };
    let mut t = T::zero();
    let mut traj = FlowTrajectory {
        direction: config.direction,
        coupling: config.coupling,
        times: vec![t],
        metrics: vec![metric.clone()],
        curvature: vec![pack.clone()],
        heat: u.as_ref().map(|v| vec![ScalarField::new(metric.shared_grid(), v.clone()).expect("validated")]),
        termination: Termination::ReachedEnd,
        steps: 0,
        dt_min: T::infinity(),
        dt_max: T::zero(),
    };
    let mut prev_min = metric.min_eigenvalue();
    let mut prev_t = t;
    let stab = lit::<T>(RK4_STABILITY);
    let cfl = lit::<T>(CFL_NUMBER);
    let tiny = lit::<T>(UNDERFLOW_FRACTION) * t_end;
    let mut last_stored = 0usize;
    while t < t_end && (t_end - t) > tiny * lit(1e-3) {
        let mut dt = config.dt.min(t_end - t);
        // absorb a rounding sliver instead of taking a vanishing last step
        if t_end - t - dt < dt * lit(1e-6) {
            dt = t_end - t;
        }
        let heat_limit = ops.as_ref().map(|o| stab / heat_stiffness(o, &pack, config.coupling));
        match config.controller {
            DtController::CflAdaptive => {
                if let Some(limit) = heat_limit {
                    // limit / stab is 1 / λ
                    dt = dt.min(cfl * lit(2.0) * limit / stab);
                }
                let rs = ricci_scale(&metric, &pack);
                if config.direction != FlowDirection::Frozen && rs > T::zero() {
                    dt = dt.min(cfl / rs);
                }
                if dt < tiny && t_end - t > tiny {
                    traj.termination = Termination::StepUnderflow { dt: to_f64(dt) };
                    break;
                }
            }
            DtController::Fixed => {
                // the heat field is advanced in two half steps
                if let Some(limit) = heat_limit {
                    if dt * lit(0.5) > limit {
                        return Err(FlowError::CflViolation { dt: to_f64(dt), limit: to_f64(limit + limit) });
                    }
                }
            }
        }
        let half = dt * lit(0.5);
        if let (Some(v), Some(o)) = (u.as_mut(), ops.as_ref()) {
            *v = heat::rk4_heat_step(o, &pack.scalar, config.coupling, v, half);
        }
        let next = match step_flow(&metric, config.direction, dt) {
            Ok(m) => m,
            Err(FlowError::Singular { node, .. }) => {
                traj.termination = Termination::Singular {
                    time: to_f64(extrapolate_zero(prev_t, prev_min.1, t, metric.min_eigenvalue().1, t + dt)),
                    node,
                };
                break;
            }
            Err(e) => return Err(e),
        };
        let t_next = t + dt;
        let (node, lo) = next.min_eigenvalue();
        if lo < eps {
            traj.termination = Termination::Singular {
                time: to_f64(extrapolate_zero(t, metric.min_eigenvalue().1, t_next, lo, t_next)),
                node,
            };
            // the collapsed state is not stored
            break;
        }
        prev_min = metric.min_eigenvalue();
        prev_t = t;
        metric = next;
        pack = effective_curvature(&metric)?;
        if coupled {
            ops = Some(DiffOperators::new(&metric)?);
        }
        if let (Some(v), Some(o)) = (u.as_mut(), ops.as_ref()) {
            *v = heat::rk4_heat_step(o, &pack.scalar, config.coupling, v, half);
            if let Some((node, _)) = v.iter().enumerate().find(|(_, x)| !(**x > T::zero())) {
                return Err(FlowError::PositivityLost { node, time: to_f64(t_next) });
            }
        }
        t = t_next;
        traj.steps += 1;
        traj.dt_min = traj.dt_min.min(dt);
        traj.dt_max = traj.dt_max.max(dt);
        let done = !(t < t_end) || (t_end - t) <= tiny * lit(1e-3);
        if traj.steps % config.sample_every == 0 || done {
            traj.times.push(t);
            traj.metrics.push(metric.clone());
            traj.curvature.push(pack.clone());
            if let (Some(h), Some(v)) = (traj.heat.as_mut(), u.as_ref()) {
                h.push(ScalarField::new(metric.shared_grid(), v.clone())?);
            }
            last_stored = traj.steps;
        }
    }
    // keep the last reached state even when stopping between samples
    if last_stored != traj.steps {
        traj.times.push(t);
        traj.metrics.push(metric.clone());
        traj.curvature.push(pack);
        if let (Some(h), Some(v)) = (traj.heat.as_mut(), u.as_ref()) {
            h.push(ScalarField::new(metric.shared_grid(), v.clone())?);
        }
    }
    if traj.steps == 0 {
        traj.dt_min = T::zero();
    }
    Ok(traj)
}

/// Time at which the line through `(t0, y0)` and `(t1, y1)` reaches zero,
/// falling back to `fallback` when the samples do not decrease.
fn extrapolate_zero<T: Real>(t0: T, y0: T, t1: T, y1: T, fallback: T) -> T {
    if y1 < y0 && t1 > t0 {
        t1 + y1 * (t1 - t0) / (y0 - y1)
    } else {
        fallback
    }
}
