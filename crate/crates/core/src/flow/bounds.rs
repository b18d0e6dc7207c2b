use serde::{Deserialize, Serialize};

use super::{FlowDirection, FlowError, FlowTrajectory, Result};
use crate::metric::DiffOperators;
use crate::scalar::{lit, to_f64, Real};

/// Nonnegative curvature scales. Their meaning depends on the estimate:
/// the gradient estimates read them as `Scal ≥ −ρ₁`, `Ric ≥ −ρ₂ g`,
/// `‖∇Scal‖ ≤ ρ₃`; the Harnack estimates read `−ρ₁ g ≤ Ric ≤ ρ₂ g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBounds<T> {
    pub rho1: T,
    pub rho2: T,
    #[serde(default)]
    pub rho3: T,
}

impl<T: Real> Default for CurvatureBounds<T> {
    fn default() -> Self {
        Self { rho1: T::zero(), rho2: T::zero(), rho3: T::zero() }
    }
}

impl<T: Real> CurvatureBounds<T> {
    pub fn new(rho1: T, rho2: T, rho3: T) -> Result<Self> {
        for (name, v) in [("rho1", rho1), ("rho2", rho2), ("rho3", rho3)] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(FlowError::InvalidConfig { name, reason: "must be nonnegative and finite".into() });
            }
        }
        Ok(Self { rho1, rho2, rho3 })
    }
}

/// Smallest bounds with `Scal ≥ −ρ₁`, `Ric ≥ −ρ₂ g`, `‖∇Scal‖ ≤ ρ₃` on every stored sample.
pub fn measure_scalar_bounds<T: Real>(traj: &FlowTrajectory<T>) -> Result<CurvatureBounds<T>> {
    let mut b = CurvatureBounds::<T>::default();
    for (m, pack) in traj.metrics.iter().zip(&traj.curvature) {
        let scal_min = pack.scalar.iter().fold(T::infinity(), |a, s| a.min(*s));
        b.rho1 = b.rho1.max(-scal_min);
        b.rho2 = b.rho2.max(-pack.ricci_eigen_range(m).0);
        let ops = DiffOperators::new(m)?;
        let g = ops.grad_norm_sq(&pack.scalar).into_iter().fold(T::zero(), T::max);
        b.rho3 = b.rho3.max(g.sqrt());
    }
    Ok(b)
}

/// Smallest bounds with `−ρ₁ g ≤ Ric ≤ ρ₂ g` on every stored sample; `ρ₃` is zero.
pub fn measure_pinching_bounds<T: Real>(traj: &FlowTrajectory<T>) -> CurvatureBounds<T> {
    let mut b = CurvatureBounds::<T>::default();
    for (m, pack) in traj.metrics.iter().zip(&traj.curvature) {
        let (lo, hi) = pack.ricci_eigen_range(m);
        b.rho1 = b.rho1.max(-lo);
        b.rho2 = b.rho2.max(hi);
    }
    b
}

/// Relative slack used when comparing measured quantities against bounds.
const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivalenceStatus {
    Holds,
    Violated,
    HypothesisViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub status: EquivalenceStatus,
    /// Measured `−min Ric` and `max Ric` relative to the metric.
    pub observed_rho1: f64,
    pub observed_rho2: f64,
    /// Extreme eigenvalues of `g(0)⁻¹ g(t)` over all nodes and samples.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Smallest of `ratio − lower` and `upper − ratio`, relative to the bound.
    pub worst_margin: f64,
    pub worst_time: f64,
    pub worst_node: usize,
}

/// Checks `lower(t) ≤ eig(g(0)⁻¹ g(t)) ≤ upper(t)` where the exponents follow
/// from integrating `∂_t g = ∓2 Ric` under `−ρ₁ g ≤ Ric ≤ ρ₂ g`: forward flow
/// gives `e^{−2ρ₂t} ≤ ratio ≤ e^{2ρ₁t}`, backward swaps the two scales.
pub fn metric_equivalence_check<T: Real>(
    traj: &FlowTrajectory<T>,
    bounds: &CurvatureBounds<T>,
) -> Result<EquivalenceReport> {
    if traj.len() < 2 {
        return Err(FlowError::Trajectory("equivalence check needs at least two samples".into()));
    }
    let observed = measure_pinching_bounds(traj);
    let tol = lit::<T>(BOUND_TOL);
    let exceeds = |seen: T, allowed: T| seen > allowed + tol * (T::one() + allowed.abs());
    let hypothesis_ok = !exceeds(observed.rho1, bounds.rho1) && !exceeds(observed.rho2, bounds.rho2);
    let (down, up) = match traj.direction {
        FlowDirection::Forward => (bounds.rho2, bounds.rho1),
        FlowDirection::Backward => (bounds.rho1, bounds.rho2),
        FlowDirection::Frozen => (T::zero(), T::zero()),
    };
    let two = lit::<T>(2.0);
    let g0 = traj.metrics[0].components();
    let t0 = traj.times[0];
    let mut report = EquivalenceReport {
        status: EquivalenceStatus::Holds,
        observed_rho1: to_f64(observed.rho1),
        observed_rho2: to_f64(observed.rho2),
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        worst_margin: f64::INFINITY,
        worst_time: to_f64(t0),
        worst_node: 0,
    };
    for (t, m) in traj.times.iter().zip(&traj.metrics).skip(1) {
        let dt = *t - t0;
        let lower = (-two * down * dt).exp();
        let upper = (two * up * dt).exp();
        for (node, (g, base)) in m.components().iter().zip(g0).enumerate() {
            let Some((lo, hi)) = g.relative_eigenvalues(base) else { continue };
            report.min_ratio = report.min_ratio.min(to_f64(lo));
            report.max_ratio = report.max_ratio.max(to_f64(hi));
            let margin = to_f64(((lo - lower) / lower).min((upper - hi) / upper));
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.worst_time = to_f64(*t);
                report.worst_node = node;
            }
        }
    }
    report.status = if !hypothesis_ok {
        EquivalenceStatus::HypothesisViolated
    } else if report.worst_margin < -BOUND_TOL {
        EquivalenceStatus::Violated
    } else {
        EquivalenceStatus::Holds
    };
    Ok(report)
}
