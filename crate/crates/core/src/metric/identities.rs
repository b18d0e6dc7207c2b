//! Discrete residuals of the Bochner–Weitzenböck formula and the Ricci
//! commutation identity. Both vanish in the continuum, so under refinement
//! they measure the consistency of the stencils.

use rayon::prelude::*;

use super::curvature::effective_curvature;
use super::operators::DiffOperators;
use super::{check_same_grid, LeafMetric, Result, ScalarField};
use crate::scalar::{lit, Real};
use crate::tensor::{Sym2, DIM};

/// `Δ‖∇f‖² − 2‖Hess f‖² − 2 g(∇f, ∇Δf) − 2 Ric(∇f, ∇f)` at every node.
pub fn bochner_residual<T: Real>(metric: &LeafMetric<T>, field: &ScalarField<T>) -> Result<ScalarField<T>> {
    check_same_grid(metric.grid(), field.grid())?;
    let ops = DiffOperators::new(metric)?;
    let ric = effective_curvature(metric)?.ricci;
    let f = field.values();
    let grad = ops.gradient(f);
    let hess = ops.hessian(f);
    let lap_grad_sq = ops.laplacian(&ops.grad_norm_sq(f));
    let dlap = ops.partial_derivatives(&ops.laplacian(f));
    let inv = ops.inverse_metric();
    let two = lit::<T>(2.0);
    let out = (0..f.len())
        .into_par_iter()
        .map(|n| {
            let hess_sq = hess_norm_sq(&inv[n], &hess[n]);
            let cross = grad[n][0] * dlap[n][0] + grad[n][1] * dlap[n][1];
            lap_grad_sq[n] - two * hess_sq - two * cross - two * ric[n].form(grad[n], grad[n])
        })
        .collect();
    ScalarField::new(metric.shared_grid(), out)
}

fn hess_norm_sq<T: Real>(inv: &Sym2<T>, h: &Sym2<T>) -> T {
    let mut s = T::zero();
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    s = s + inv.get(a, c) * inv.get(b, d) * h.get(a, b) * h.get(c, d);
                }
            }
        }
    }
    s
}

/// `f^i (∂_i Δf − f_ijj + Ric_ij f^j)` at every node, where `f_ijj` is the
/// trace of the covariant derivative of the Hessian over its last two slots.
pub fn ricci_identity_residual<T: Real>(metric: &LeafMetric<T>, field: &ScalarField<T>) -> Result<ScalarField<T>> {
    check_same_grid(metric.grid(), field.grid())?;
    let ops = DiffOperators::new(metric)?;
    let pack = effective_curvature(metric)?;
    let grid = metric.grid();
    let f = field.values();
    let grad = ops.gradient(f);
    let hess = ops.hessian(f);
    let dlap = ops.partial_derivatives(&ops.laplacian(f));
    let inv = ops.inverse_metric();
    let christoffel = super::curvature::christoffel(metric)?;
    let out = (0..f.len())
        .into_par_iter()
        .map(|n| {
            let gm = &christoffel[n];
            // ∂_k f_ij with pole parity of the tensor component
            let dh = |i: usize, j: usize, k: usize| {
                let odd = Sym2::<T>::axis0_count(i, j) % 2 == 1;
                grid.d1(n, k, odd, &|m| hess[m].get(i, j))
            };
            let mut s = T::zero();
            for i in 0..DIM {
                let mut fijj = T::zero();
                for j in 0..DIM {
                    for k in 0..DIM {
                        let mut cov = dh(i, j, k);
                        for l in 0..DIM {
                            cov = cov - gm[l][k][i] * hess[n].get(l, j) - gm[l][k][j] * hess[n].get(i, l);
                        }
                        fijj = fijj + inv[n].get(j, k) * cov;
                    }
                }
                let ric_f = (0..DIM).map(|j| pack.ricci[n].get(i, j) * grad[n][j]).sum::<T>();
                s = s + grad[n][i] * (dlap[n][i] - fijj + ric_f);
            }
            s
        })
        .collect();
    ScalarField::new(metric.shared_grid(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_scenario_metric, ScenarioParams};

    fn max_abs(f: &ScalarField<f64>) -> f64 {
        f.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn residuals_shrink_on_the_flat_torus() {
        let mut prev = None;
        for n in [16, 32, 64] {
            let m = build_scenario_metric::<f64>("flat-torus", &ScenarioParams { resolution: n, ..Default::default() })
                .unwrap();
            let f = ScalarField::from_fn(m.shared_grid(), |[x, y]| (x + y).sin() + 0.5 * (2.0 * x).cos()).unwrap();
            let b = max_abs(&bochner_residual(&m, &f).unwrap());
            let r = max_abs(&ricci_identity_residual(&m, &f).unwrap());
            if let Some((pb, pr)) = prev {
                assert!(b < pb / 3.0 && r < pr / 3.0, "{b} {r}");
            }
            prev = Some((b, r));
        }
    }
}
