use rayon::prelude::*;

use super::{run_flow, FlowConfig, FlowDirection, FlowError, FlowTrajectory, HeatCoupling, Result};
use crate::metric::{DiffOperators, LeafMetric, ScalarField};
use crate::scalar::{lit, Real};

/// `Δu` or `Δu − Scal · u` on a frozen metric.
pub fn heat_rhs<T: Real>(ops: &DiffOperators<T>, scalar: &[T], coupling: HeatCoupling, u: &[T]) -> Vec<T> {
    let mut lap = ops.laplacian(u);
    if coupling == HeatCoupling::ConjugateHeat {
        lap.par_iter_mut().zip(scalar.par_iter().zip(u.par_iter())).for_each(|(l, (s, v))| *l = *l - *s * *v);
    }
    lap
}

pub(super) fn rk4_heat_step<T: Real>(
    ops: &DiffOperators<T>,
    scalar: &[T],
    coupling: HeatCoupling,
    u: &[T],
    dt: T,
) -> Vec<T> {
    let half = dt * lit(0.5);
    let shifted = |k: &[T], s: T| u.iter().zip(k).map(|(a, b)| *a + s * *b).collect::<Vec<_>>();
    let k1 = heat_rhs(ops, scalar, coupling, u);
    let k2 = heat_rhs(ops, scalar, coupling, &shifted(&k1, half));
    let k3 = heat_rhs(ops, scalar, coupling, &shifted(&k2, half));
    let k4 = heat_rhs(ops, scalar, coupling, &shifted(&k3, dt));
    let sixth = dt / lit(6.0);
    let two = lit::<T>(2.0);
    (0..u.len()).map(|n| u[n] + sixth * (k1[n] + two * (k2[n] + k3[n]) + k4[n])).collect()
}

/// `∫ u dμ` by the midpoint rule on the cell-centred grid.
pub fn total_mass<T: Real>(metric: &LeafMetric<T>, u: &ScalarField<T>) -> T {
    let [h0, h1] = metric.grid().spacing();
    metric.components().iter().zip(u.values()).map(|(g, v)| *v * g.det().sqrt()).sum::<T>() * h0 * h1
}

/// Co-solves `u_t = Δu` with a forward (or frozen) flow.
pub fn solve_heat<T: Real>(
    initial: &LeafMetric<T>,
    config: &FlowConfig<T>,
    u0: &ScalarField<T>,
) -> Result<FlowTrajectory<T>> {
    if config.direction == FlowDirection::Backward {
        return Err(FlowError::InvalidConfig {
            name: "direction",
            reason: "the heat equation runs with a forward or frozen flow".into(),
        });
    }
    run_flow(initial, &FlowConfig { coupling: HeatCoupling::Heat, ..*config }, Some(u0))
}

/// Co-solves `u_t = Δu − Scal · u` with a flow in any direction.
pub fn solve_conjugate_heat<T: Real>(
    initial: &LeafMetric<T>,
    config: &FlowConfig<T>,
    u0: &ScalarField<T>,
) -> Result<FlowTrajectory<T>> {
    run_flow(initial, &FlowConfig { coupling: HeatCoupling::ConjugateHeat, ..*config }, Some(u0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_scenario_metric, ScenarioParams, SphereLayout};

    fn torus(n: usize) -> LeafMetric<f64> {
        build_scenario_metric("flat-torus", &ScenarioParams { resolution: n, ..Default::default() }).unwrap()
    }

    #[test]
    fn fourier_mode_decays_on_flat_torus() {
        let m = torus(32);
        let u0 = ScalarField::from_fn(m.shared_grid(), |[x, _]| 2.0 + x.sin()).unwrap();
        let cfg = FlowConfig { t_end: 0.5, dt: 0.01, sample_every: 10, ..Default::default() };
        let traj = solve_heat(&m, &cfg, &u0).unwrap();
        let h = (std::f64::consts::TAU / 32.0).powi(2);
        for (t, u) in traj.times.iter().zip(traj.heat.as_ref().unwrap()) {
            for (n, v) in u.values().iter().enumerate() {
                let x = m.grid().coord(n)[0];
                assert!((v - (2.0 + (-t).exp() * x.sin())).abs() < h, "t={t}");
            }
        }
    }

    #[test]
    fn constants_are_stationary_and_conjugate_matches_heat_when_flat() {
        let m = torus(16);
        let u0 = ScalarField::constant(m.shared_grid(), 3.0).unwrap();
        let cfg = FlowConfig { t_end: 0.2, dt: 0.01, ..Default::default() };
        let a = solve_heat(&m, &cfg, &u0).unwrap();
        assert!(a.heat.as_ref().unwrap().iter().all(|u| u.values().iter().all(|v| (v - 3.0).abs() < 1e-13)));
        let u1 = ScalarField::from_fn(m.shared_grid(), |[x, y]| 2.0 + x.sin() * y.cos()).unwrap();
        let a = solve_heat(&m, &cfg, &u1).unwrap();
        let b = solve_conjugate_heat(&m, &cfg, &u1).unwrap();
        assert_eq!(a.heat, b.heat);
    }

    #[test]
    fn frozen_sphere_conjugate_heat_decays_exponentially() {
        let p = ScenarioParams { resolution: 16, layout: SphereLayout::Axisymmetric, ..Default::default() };
        let m = build_scenario_metric::<f64>("round-sphere", &p).unwrap();
        let u0 = ScalarField::constant(m.shared_grid(), 1.0).unwrap();
        let cfg = FlowConfig { direction: FlowDirection::Frozen, t_end: 0.3, dt: 1e-3, ..Default::default() };
        let traj = solve_conjugate_heat(&m, &cfg, &u0).unwrap();
        let last = traj.heat.as_ref().unwrap().last().unwrap();
        let exact = (-2.0 * 0.3f64).exp();
        assert!(last.values().iter().all(|v| (v - exact).abs() < 1e-8));
    }

    #[test]
    fn backward_heat_is_rejected() {
        let m = torus(8);
        let u0 = ScalarField::constant(m.shared_grid(), 1.0).unwrap();
        let cfg = FlowConfig { direction: FlowDirection::Backward, ..Default::default() };
        assert!(matches!(solve_heat(&m, &cfg, &u0), Err(FlowError::InvalidConfig { name: "direction", .. })));
    }

    #[test]
    fn sphere_mass_is_area_times_value() {
        let p = ScenarioParams { resolution: 64, layout: SphereLayout::Axisymmetric, ..Default::default() };
        let m = build_scenario_metric::<f64>("round-sphere", &p).unwrap();
        let u = ScalarField::constant(m.shared_grid(), 1.0).unwrap();
        let h = std::f64::consts::PI / 64.0;
        // midpoint rule error on ∫ sin θ dθ is h²/24 relative
        assert!((total_mass(&m, &u) / (4.0 * std::f64::consts::PI) - 1.0).abs() < h * h / 10.0);
    }
}
