use rayon::prelude::*;

use super::{GeometryError, LeafMetric, Result};
use crate::grid::LeafGrid;
use crate::scalar::{lit, to_f64, Real};
use crate::tensor::{Christoffel, Riemann, Sym2, DIM};

/// Curvature quantities at every node of a leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePack<T> {
    pub christoffel: Vec<Christoffel<T>>,
    pub riemann: Vec<Riemann<T>>,
    pub ricci: Vec<Sym2<T>>,
    pub scalar: Vec<T>,
}

impl<T: Real> CurvaturePack<T> {
    /// Smallest and largest Ricci eigenvalue relative to the metric, over all nodes.
    pub fn ricci_eigen_range(&self, metric: &LeafMetric<T>) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for (ric, g) in self.ricci.iter().zip(metric.components()) {
            if let Some((a, b)) = ric.relative_eigenvalues(g) {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        (lo, hi)
    }
}

/// Metric derivatives at one node: `first[c]` holds ∂_c g_ab, `second[c][d]` holds ∂_c ∂_d g_ab.
pub(crate) struct MetricJet<T> {
    pub g: Sym2<T>,
    pub inv: Sym2<T>,
    pub first: [Sym2<T>; DIM],
    pub second: [[Sym2<T>; DIM]; DIM],
}

fn odd(a: usize, b: usize) -> bool {
    Sym2::<f64>::axis0_count(a, b) % 2 == 1
}

pub(crate) fn first_derivatives<T: Real>(grid: &LeafGrid<T>, comps: &[Sym2<T>], node: usize) -> [Sym2<T>; DIM] {
    std::array::from_fn(|c| Sym2::from_fn(|a, b| grid.d1(node, c, odd(a, b), &|k| comps[k].get(a, b))))
}

pub(crate) fn metric_jet<T: Real>(metric: &LeafMetric<T>, node: usize, second: bool) -> Result<MetricJet<T>> {
    let grid = metric.grid();
    let comps = metric.components();
    let g = comps[node];
    let inv = g
        .inverse()
        .ok_or(GeometryError::SingularMetric { node, det: to_f64(g.det()) })?;
    let first = first_derivatives(grid, comps, node);
    let second = if second {
        std::array::from_fn(|c| {
            std::array::from_fn(|d| {
                Sym2::from_fn(|a, b| grid.d2(node, c, d, odd(a, b), &|k| comps[k].get(a, b)))
            })
        })
    } else {
        [[Sym2::zero(); DIM]; DIM]
    };
    Ok(MetricJet { g, inv, first, second })
}

/// Γ^c_ab = ½ g^cd (∂_a g_db + ∂_b g_da − ∂_d g_ab)
pub(crate) fn christoffel_from_jet<T: Real>(inv: &Sym2<T>, first: &[Sym2<T>; DIM]) -> Christoffel<T> {
    let half = lit::<T>(0.5);
    let mut lowered = [[[T::zero(); DIM]; DIM]; DIM]; // Γ_dab
    for d in 0..DIM {
        for a in 0..DIM {
            for b in a..DIM {
                let v = half * (first[a].get(d, b) + first[b].get(d, a) - first[d].get(a, b));
                lowered[d][a][b] = v;
                lowered[d][b][a] = v;
            }
        }
    }
    let mut gamma = [[[T::zero(); DIM]; DIM]; DIM];
    for c in 0..DIM {
        for a in 0..DIM {
            for b in 0..DIM {
                gamma[c][a][b] = (0..DIM).map(|d| inv.get(c, d) * lowered[d][a][b]).sum();
            }
        }
    }
    gamma
}

/// R_abcd with the convention that the unit sphere has R_θφθφ = sin²θ.
fn riemann_from_jet<T: Real>(jet: &MetricJet<T>, gamma: &Christoffel<T>) -> Riemann<T> {
    let half = lit::<T>(0.5);
    let dd = |i: usize, j: usize, a: usize, b: usize| jet.second[i][j].get(a, b);
    let mut r = [[[[T::zero(); DIM]; DIM]; DIM]; DIM];
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let second = half * (dd(b, c, a, d) + dd(a, d, b, c) - dd(a, c, b, d) - dd(b, d, a, c));
                    let mut quad = T::zero();
                    for e in 0..DIM {
                        for f in 0..DIM {
                            quad = quad
                                + jet.g.get(e, f)
                                    * (gamma[e][b][c] * gamma[f][a][d] - gamma[e][b][d] * gamma[f][a][c]);
                        }
                    }
                    r[a][b][c][d] = second + quad;
                }
            }
        }
    }
    r
}

/// Christoffel symbols at every node from central differences of the metric.
pub fn christoffel<T: Real>(metric: &LeafMetric<T>) -> Result<Vec<Christoffel<T>>> {
    (0..metric.grid().len())
        .into_par_iter()
        .map(|node| {
            let jet = metric_jet(metric, node, false)?;
            Ok(christoffel_from_jet(&jet.inv, &jet.first))
        })
        .collect()
}

/// Full curvature pack from second-order central differences of the metric.
pub fn curvature<T: Real>(metric: &LeafMetric<T>) -> Result<CurvaturePack<T>> {
    let per_node: Vec<(Christoffel<T>, Riemann<T>, Sym2<T>, T)> = (0..metric.grid().len())
        .into_par_iter()
        .map(|node| {
            let jet = metric_jet(metric, node, true)?;
            let gamma = christoffel_from_jet(&jet.inv, &jet.first);
            let riem = riemann_from_jet(&jet, &gamma);
            let ric = Sym2::from_fn(|b, d| {
                let mut s = T::zero();
                for a in 0..DIM {
                    for c in 0..DIM {
                        s = s + jet.inv.get(a, c) * riem[a][b][c][d];
                    }
                }
                s
            });
            let scal = jet.inv.contract(&ric);
            Ok((gamma, riem, ric, scal))
        })
        .collect::<Result<_>>()?;
    Ok(unzip_pack(per_node))
}

/// Curvature used by the flow: exact for round-sphere reductions, finite differences otherwise.
pub fn effective_curvature<T: Real>(metric: &LeafMetric<T>) -> Result<CurvaturePack<T>> {
    let Some(round) = metric.round_reduction() else {
        return curvature(metric);
    };
    let r2 = round.radius_sq;
    let grid = metric.grid();
    let per_node = (0..grid.len())
        .map(|node| {
            let th = grid.coord(node)[0];
            let (s, c) = th.sin_cos();
            let mut gamma = [[[T::zero(); DIM]; DIM]; DIM];
            gamma[0][1][1] = -s * c;
            gamma[1][0][1] = c / s;
            gamma[1][1][0] = c / s;
            let mut riem = [[[[T::zero(); DIM]; DIM]; DIM]; DIM];
            let k = r2 * s * s;
            riem[0][1][0][1] = k;
            riem[1][0][1][0] = k;
            riem[0][1][1][0] = -k;
            riem[1][0][0][1] = -k;
            // Ric = g / r² = dθ² + sin²θ dφ²
            let ric = Sym2::diag(T::one(), s * s);
            (gamma, riem, ric, lit::<T>(2.0) / r2)
        })
        .collect();
    Ok(unzip_pack(per_node))
}

fn unzip_pack<T>(per_node: Vec<(Christoffel<T>, Riemann<T>, Sym2<T>, T)>) -> CurvaturePack<T> {
    let n = per_node.len();
    let mut pack = CurvaturePack {
        christoffel: Vec::with_capacity(n),
        riemann: Vec::with_capacity(n),
        ricci: Vec::with_capacity(n),
        scalar: Vec::with_capacity(n),
    };
    for (g, r, ric, s) in per_node {
        pack.christoffel.push(g);
        pack.riemann.push(r);
        pack.ricci.push(ric);
        pack.scalar.push(s);
    }
    pack
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_scenario_metric, ScenarioParams};

    fn sphere(r: f64, n: usize) -> LeafMetric<f64> {
        let p = ScenarioParams { radius: r, resolution: n, ..Default::default() };
        build_scenario_metric("round-sphere", &p).unwrap()
    }

    fn in_band(th: f64) -> bool {
        (th - std::f64::consts::FRAC_PI_2).abs() <= 3.0 * std::f64::consts::PI / 8.0
    }

    #[test]
    fn flat_torus_has_no_curvature() {
        let m = build_scenario_metric::<f64>("flat-torus", &ScenarioParams::default()).unwrap();
        let pack = curvature(&m).unwrap();
        assert!(pack.christoffel.iter().flatten().flatten().flatten().all(|&v| v == 0.0));
        assert!(pack.ricci.iter().all(|r| *r == Sym2::zero()));
        assert!(pack.scalar.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn sphere_christoffels_within_h_squared() {
        let m = sphere(1.0, 64);
        let h = m.grid().spacing()[0];
        let gamma = christoffel(&m).unwrap();
        for (node, gm) in gamma.iter().enumerate() {
            let th = m.grid().coord(node)[0];
            assert!((gm[0][1][1] + th.sin() * th.cos()).abs() <= h * h);
            if in_band(th) {
                assert!((gm[1][0][1] - th.cos() / th.sin()).abs() <= 2.0 * h * h);
            }
            assert_eq!(gm[1][0][1], gm[1][1][0]);
        }
    }

    #[test]
    fn sphere_of_radius_two_has_quarter_ricci() {
        let m = sphere(2.0, 64);
        let h = m.grid().spacing()[0];
        let pack = curvature(&m).unwrap();
        for node in 0..m.grid().len() {
            let th = m.grid().coord(node)[0];
            if !in_band(th) {
                continue;
            }
            let expect = m.at(node).scale(0.25);
            assert!(pack.ricci[node].max_abs_diff(&expect) <= 8.0 * h * h);
            assert!((pack.scalar[node] - 0.5).abs() <= 8.0 * h * h);
        }
    }

    #[test]
    fn riemann_antisymmetries_and_trace() {
        let p = ScenarioParams { amplitude: 0.3, resolution: 24, ..Default::default() };
        let m = build_scenario_metric::<f64>("torus-bump", &p).unwrap();
        let pack = curvature(&m).unwrap();
        for node in 0..m.grid().len() {
            let r = &pack.riemann[node];
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        for d in 0..2 {
                            assert!((r[a][b][c][d] + r[b][a][c][d]).abs() < 1e-12);
                            assert!((r[a][b][c][d] + r[a][b][d][c]).abs() < 1e-12);
                        }
                    }
                }
            }
            let inv = m.at(node).inverse().unwrap();
            assert_eq!(pack.scalar[node], inv.contract(&pack.ricci[node]));
        }
    }

    #[test]
    fn reduced_curvature_is_exact() {
        let m = sphere(1.5, 16);
        let pack = effective_curvature(&m).unwrap();
        for node in 0..m.grid().len() {
            let expect = m.at(node).scale(1.0 / 2.25);
            assert!(pack.ricci[node].max_abs_diff(&expect) < 1e-15);
            assert!((pack.scalar[node] - 2.0 / 2.25).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_metric_is_reported() {
        let grid = std::sync::Arc::new(LeafGrid::periodic(8, 8, 1.0, 1.0).unwrap());
        let mut m = LeafMetric::new(grid, vec![Sym2::identity(); 64]).unwrap();
        m.components[5] = Sym2::new(1.0, 1.0, 1.0);
        assert!(matches!(curvature(&m), Err(GeometryError::SingularMetric { node: 5, .. })));
    }
}
