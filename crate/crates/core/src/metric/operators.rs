use std::sync::Arc;

use rayon::prelude::*;

use super::curvature::{christoffel_from_jet, metric_jet};
use super::{check_same_grid, LeafMetric, Result, ScalarField};
use crate::grid::LeafGrid;
use crate::scalar::Real;
use crate::tensor::{Christoffel, Sym2, DIM};

/// Contravariant vector field on a leaf grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    pub grid: Arc<LeafGrid<T>>,
    pub values: Vec<[T; DIM]>,
}

/// Precomputed inverse metric, Christoffel symbols and volume density, so the
/// operators can be applied repeatedly to fields on a frozen metric.
#[derive(Debug, Clone)]
pub struct DiffOperators<T> {
    grid: Arc<LeafGrid<T>>,
    metric: Vec<Sym2<T>>,
    inv: Vec<Sym2<T>>,
    gamma: Vec<Christoffel<T>>,
    sqrt_det: Vec<T>,
}

impl<T: Real> DiffOperators<T> {
    pub fn new(metric: &LeafMetric<T>) -> Result<Self> {
        let per_node: Vec<(Sym2<T>, Christoffel<T>)> = (0..metric.grid().len())
            .into_par_iter()
            .map(|node| {
                let jet = metric_jet(metric, node, false)?;
                Ok((jet.inv, christoffel_from_jet(&jet.inv, &jet.first)))
            })
            .collect::<Result<_>>()?;
        let (inv, gamma) = per_node.into_iter().unzip();
        Ok(Self {
            grid: metric.shared_grid(),
            metric: metric.components().to_vec(),
            inv,
            gamma,
            sqrt_det: metric.components().iter().map(|g| g.det().sqrt()).collect(),
        })
    }

    pub fn grid(&self) -> &LeafGrid<T> {
        &self.grid
    }

    pub fn inverse_metric(&self) -> &[Sym2<T>] {
        &self.inv
    }

    #[inline]
    fn partials(&self, values: &[T], node: usize) -> [T; DIM] {
        let f = |k: usize| values[k];
        [self.grid.d1(node, 0, false, &f), self.grid.d1(node, 1, false, &f)]
    }

    /// Coordinate partial derivatives ∂_a f at every node.
    pub fn partial_derivatives(&self, values: &[T]) -> Vec<[T; DIM]> {
        (0..values.len()).into_par_iter().map(|n| self.partials(values, n)).collect()
    }

    /// (∇f)^a = g^ab ∂_b f
    pub fn gradient(&self, values: &[T]) -> Vec<[T; DIM]> {
        (0..values.len())
            .into_par_iter()
            .map(|n| self.inv[n].mul_vec(self.partials(values, n)))
            .collect()
    }

    /// ‖∇f‖² = g^ab ∂_a f ∂_b f
    pub fn grad_norm_sq(&self, values: &[T]) -> Vec<T> {
        (0..values.len())
            .into_par_iter()
            .map(|n| {
                let d = self.partials(values, n);
                self.inv[n].form(d, d)
            })
            .collect()
    }

    #[inline]
    fn hessian_at(&self, values: &[T], node: usize) -> Sym2<T> {
        let f = |k: usize| values[k];
        let d = self.partials(values, node);
        let gm = &self.gamma[node];
        Sym2::from_fn(|a, b| {
            let dd = self.grid.d2(node, a, b, false, &f);
            dd - (0..DIM).map(|c| gm[c][a][b] * d[c]).sum::<T>()
        })
    }

    /// f_ab = ∂_a ∂_b f − Γ^c_ab ∂_c f
    pub fn hessian(&self, values: &[T]) -> Vec<Sym2<T>> {
        (0..values.len()).into_par_iter().map(|n| self.hessian_at(values, n)).collect()
    }

    /// Δf = g^ab f_ab
    pub fn laplacian(&self, values: &[T]) -> Vec<T> {
        (0..values.len())
            .into_par_iter()
            .map(|n| self.inv[n].contract(&self.hessian_at(values, n)))
            .collect()
    }

    /// div V = |g|^{-1/2} ∂_a (|g|^{1/2} V^a)
    pub fn divergence(&self, field: &[[T; DIM]]) -> Vec<T> {
        (0..field.len())
            .into_par_iter()
            .map(|n| {
                let mut s = T::zero();
                for a in 0..DIM {
                    // the colatitude component flips sign across a pole
                    let odd = a == 0;
                    s = s + self.grid.d1(n, a, odd, &|k| self.sqrt_det[k] * field[k][a]);
                }
                s / self.sqrt_det[n]
            })
            .collect()
    }

    /// Stability bound for explicit time stepping of Δ: a Gershgorin estimate
    /// of the spectral radius of the discrete operator, maximised over nodes.
    pub fn spectral_radius_bound(&self) -> T {
        let [h0, h1] = self.grid.spacing();
        let two = T::one() + T::one();
        (0..self.inv.len())
            .map(|n| {
                let gi = &self.inv[n];
                let r0 = if self.grid.resolves(0) { gi.xx / (h0 * h0) } else { T::zero() };
                let r1 = if self.grid.resolves(1) { gi.yy / (h1 * h1) } else { T::zero() };
                let mixed = if self.grid.resolves(1) { gi.xy.abs() / (h0 * h1) } else { T::zero() };
                let gm = &self.gamma[n];
                let mut drift = T::zero();
                for c in 0..DIM {
                    if !self.grid.resolves(c) {
                        continue;
                    }
                    let gc: T = (0..DIM)
                        .flat_map(|a| (0..DIM).map(move |b| (a, b)))
                        .map(|(a, b)| gi.get(a, b) * gm[c][a][b])
                        .sum();
                    let h = if c == 0 { h0 } else { h1 };
                    drift = drift + gc.abs() / h;
                }
                two * (two * (r0 + r1) + two * mixed) + drift
            })
            .fold(T::zero(), T::max)
    }

    /// g(v, w) for contravariant vectors at a node.
    pub fn inner(&self, node: usize, v: [T; DIM], w: [T; DIM]) -> T {
        self.metric[node].form(v, w)
    }
}

pub fn gradient<T: Real>(metric: &LeafMetric<T>, field: &ScalarField<T>) -> Result<VectorField<T>> {
    check_same_grid(metric.grid(), field.grid())?;
    let ops = DiffOperators::new(metric)?;
    Ok(VectorField { grid: metric.shared_grid(), values: ops.gradient(field.values()) })
}

pub fn grad_norm_sq<T: Real>(metric: &LeafMetric<T>, field: &ScalarField<T>) -> Result<ScalarField<T>> {
    check_same_grid(metric.grid(), field.grid())?;
    let ops = DiffOperators::new(metric)?;
    ScalarField::new(metric.shared_grid(), ops.grad_norm_sq(field.values()))
}

pub fn laplace_beltrami<T: Real>(metric: &LeafMetric<T>, field: &ScalarField<T>) -> Result<ScalarField<T>> {
    check_same_grid(metric.grid(), field.grid())?;
    let ops = DiffOperators::new(metric)?;
    ScalarField::new(metric.shared_grid(), ops.laplacian(field.values()))
}

pub fn hessian<T: Real>(metric: &LeafMetric<T>, field: &ScalarField<T>) -> Result<Vec<Sym2<T>>> {
    check_same_grid(metric.grid(), field.grid())?;
    let ops = DiffOperators::new(metric)?;
    Ok(ops.hessian(field.values()))
}

pub fn divergence<T: Real>(metric: &LeafMetric<T>, field: &VectorField<T>) -> Result<ScalarField<T>> {
    check_same_grid(metric.grid(), &field.grid)?;
    let ops = DiffOperators::new(metric)?;
    ScalarField::new(metric.shared_grid(), ops.divergence(&field.values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_scenario_metric, GeometryError, ScenarioParams};
    use std::f64::consts::FRAC_PI_2;

    fn metric(name: &str, n: usize) -> LeafMetric<f64> {
        let p = ScenarioParams { resolution: n, ..Default::default() };
        build_scenario_metric(name, &p).unwrap()
    }

    #[test]
    fn constant_field_is_annihilated() {
        for name in ["round-sphere", "flat-torus", "torus-bump"] {
            let m = metric(name, 16);
            let f = ScalarField::constant(m.shared_grid(), 3.25).unwrap();
            assert!(gradient(&m, &f).unwrap().values.iter().all(|v| v[0] == 0.0 && v[1] == 0.0));
            assert!(grad_norm_sq(&m, &f).unwrap().values().iter().all(|&v| v == 0.0));
            assert!(laplace_beltrami(&m, &f).unwrap().values().iter().all(|&v| v == 0.0));
            assert!(hessian(&m, &f).unwrap().iter().all(|h| *h == Sym2::zero()));
        }
    }

    #[test]
    fn flat_torus_sine() {
        let m = metric("flat-torus", 64);
        let h = m.grid().spacing()[0];
        let f = ScalarField::from_fn(m.shared_grid(), |[x, _]| x.sin()).unwrap();
        let g2 = grad_norm_sq(&m, &f).unwrap();
        let lap = laplace_beltrami(&m, &f).unwrap();
        for n in 0..m.grid().len() {
            let x = m.grid().coord(n)[0];
            assert!((g2.values()[n] - x.cos().powi(2)).abs() <= h * h);
            assert!((lap.values()[n] + x.sin()).abs() <= h * h);
        }
    }

    #[test]
    fn sphere_cos_theta() {
        let m = metric("round-sphere", 64);
        let h = m.grid().spacing()[0];
        let f = ScalarField::from_fn(m.shared_grid(), |[th, _]| th.cos()).unwrap();
        let g2 = grad_norm_sq(&m, &f).unwrap();
        let lap = laplace_beltrami(&m, &f).unwrap();
        for n in 0..m.grid().len() {
            let th = m.grid().coord(n)[0];
            assert!((g2.values()[n] - th.sin().powi(2)).abs() <= h * h);
            assert!((lap.values()[n] + 2.0 * th.cos()).abs() <= h * h);
        }
    }

    #[test]
    fn quadratic_hessian_on_interior_of_patch() {
        let m = metric("flat-torus", 16);
        let f = ScalarField::from_fn(m.shared_grid(), |[x, _]| x * x).unwrap();
        let hess = hessian(&m, &f).unwrap();
        for n in 0..m.grid().len() {
            let (i, _) = m.grid().ij(n);
            if i == 0 || i == 15 {
                continue; // periodic seam is outside the patch
            }
            assert!((hess[n].xx - 2.0).abs() < 1e-9 && hess[n].xy == 0.0 && hess[n].yy == 0.0);
        }
    }

    #[test]
    fn trace_of_hessian_is_laplacian_and_div_grad() {
        let p = ScenarioParams { resolution: 64, amplitude: 0.3, ..Default::default() };
        let m = build_scenario_metric::<f64>("torus-bump", &p).unwrap();
        let f = ScalarField::from_fn(m.shared_grid(), |[x, y]| (x + 2.0 * y).sin() + x.cos()).unwrap();
        let ops = DiffOperators::new(&m).unwrap();
        let lap = ops.laplacian(f.values());
        let hess = ops.hessian(f.values());
        let div_grad = ops.divergence(&ops.gradient(f.values()));
        let h = m.grid().spacing()[0];
        for n in 0..lap.len() {
            let tr = ops.inverse_metric()[n].contract(&hess[n]);
            assert!((tr - lap[n]).abs() < 1e-12);
            assert!((div_grad[n] - lap[n]).abs() < 40.0 * h * h);
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = metric("flat-torus", 16);
        let b = metric("flat-torus", 32);
        let f = ScalarField::constant(b.shared_grid(), 1.0).unwrap();
        assert_eq!(laplace_beltrami(&a, &f).unwrap_err(), GeometryError::GridMismatch);
    }

    #[test]
    fn axisymmetric_laplacian_matches_spherical() {
        let p = ScenarioParams {
            resolution: 32,
            layout: crate::metric::SphereLayout::Axisymmetric,
            ..Default::default()
        };
        let m = build_scenario_metric::<f64>("round-sphere", &p).unwrap();
        let f = ScalarField::from_fn(m.shared_grid(), |[th, _]| (th - FRAC_PI_2).powi(2) * th.cos()).unwrap();
        let full = metric("round-sphere", 32);
        let ff = ScalarField::from_fn(full.shared_grid(), |[th, _]| (th - FRAC_PI_2).powi(2) * th.cos()).unwrap();
        let a = laplace_beltrami(&m, &f).unwrap();
        let b = laplace_beltrami(&full, &ff).unwrap();
        for i in 0..32 {
            let diff = (a.values()[i] - b.values()[full.grid().index(i, 7)]).abs();
            assert!(diff < 1e-10, "row {i}: {diff}");
        }
    }
}
