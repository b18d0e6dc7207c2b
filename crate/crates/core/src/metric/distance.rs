//! Geodesic distance from a centre.
//!
//! General metrics are handled by relaxing discrete paths: the path energy
//! `Σ Δxᵀ G(mid) Δx` is minimised over the interior points with a frozen-metric
//! Newton step and backtracking, first with `segments / 2` segments and then
//! with `segments`, and the two lengths are Richardson-extrapolated. Periodic
//! leaves are unrolled onto the covering plane and every nearby lattice image
//! of the centre is tried. Spherical leaves are embedded as the unit sphere in
//! ℝ³ with the ambient tensor `G = Σ g_ab ε^a ε^b` built from the unit chart
//! coframe, and paths start on great circles.
//!
//! Nodes near the cut locus, where the best and second-best candidate lengths
//! come within `2 · margin · h_eff`, are masked rather than reported.

use rayon::prelude::*;

use super::interp::NodeInterp;
use super::{GeometryError, LeafMetric, Result, ScalarField};
use crate::grid::{LeafGrid, Topology};
use crate::scalar::{from_usize, lit, Real};
use crate::tensor::Sym2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceCenter {
    Node(usize),
    /// θ = 0 on a polar chart; the only admissible centre on axisymmetric grids.
    NorthPole,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceOptions<T> {
    /// Cut-locus margin in units of the effective grid spacing.
    pub margin: T,
    /// Segments of the finest relaxed path (even).
    pub segments: usize,
}

impl<T: Real> Default for DistanceOptions<T> {
    fn default() -> Self {
        Self { margin: lit(3.0), segments: 16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField<T> {
    pub distance: ScalarField<T>,
    /// False on masked nodes near the cut locus.
    pub valid: Vec<bool>,
    /// Grid spacing measured in the metric, used to size the mask.
    pub h_eff: T,
}

impl<T: Real> DistanceField<T> {
    pub fn is_valid(&self, node: usize) -> bool {
        self.valid[node]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

pub fn geodesic_distance<T: Real>(
    metric: &LeafMetric<T>,
    center: DistanceCenter,
    opts: &DistanceOptions<T>,
) -> Result<DistanceField<T>> {
    let grid = metric.grid();
    if opts.segments < 4 || !opts.segments.is_multiple_of(2) {
        return Err(GeometryError::InvalidParameter {
            name: "segments",
            reason: format!("need an even count of at least 4, got {}", opts.segments),
        });
    }
    match center {
        DistanceCenter::Node(n) if n >= grid.len() => {
            return Err(GeometryError::InvalidParameter {
                name: "center",
                reason: format!("node {n} outside grid of {} nodes", grid.len()),
            })
        }
        DistanceCenter::NorthPole if grid.topology() == Topology::Periodic => {
            return Err(GeometryError::InvalidParameter {
                name: "center",
                reason: "periodic grids have no pole".into(),
            })
        }
        DistanceCenter::Node(_) if grid.topology() == Topology::Axisymmetric => {
            return Err(GeometryError::InvalidParameter {
                name: "center",
                reason: "axisymmetric distances are measured from the north pole".into(),
            })
        }
        _ => {}
    }
    match grid.topology() {
        Topology::Axisymmetric => Ok(meridian_distance(metric, opts)),
        Topology::Spherical => {
            if let Some(round) = metric.round_reduction() {
                Ok(round_distance(metric, round.radius_sq.sqrt(), center, opts))
            } else {
                sphere_distance(metric, center, opts)
            }
        }
        Topology::Periodic => {
            let DistanceCenter::Node(c) = center else { unreachable!() };
            plane_distance(metric, c, opts)
        }
    }
}

fn finish<T: Real>(
    metric: &LeafMetric<T>,
    pairs: Vec<(T, T)>,
    h_eff: T,
    opts: &DistanceOptions<T>,
) -> Result<DistanceField<T>> {
    let two = lit::<T>(2.0);
    let valid = pairs.iter().map(|&(d, alt)| alt - d >= two * opts.margin * h_eff).collect();
    let distance = ScalarField::new(metric.shared_grid(), pairs.into_iter().map(|p| p.0).collect())?;
    Ok(DistanceField { distance, valid, h_eff })
}

/// Cumulative arc length along a meridian from the north pole.
fn meridian_distance<T: Real>(metric: &LeafMetric<T>, opts: &DistanceOptions<T>) -> DistanceField<T> {
    let grid = metric.grid();
    let n = grid.counts()[0];
    let h = grid.spacing()[0];
    let w: Vec<T> = (0..n).map(|i| metric.at(grid.index(i, 0)).xx.sqrt()).collect();
    // the integrand is even across either pole
    let at = |k: i64| -> T {
        if k < 0 {
            w[(-1 - k) as usize]
        } else if k >= n as i64 {
            w[(2 * n as i64 - 1 - k) as usize]
        } else {
            w[k as usize]
        }
    };
    let c24 = lit::<T>(24.0);
    let half = lit::<T>(0.5);
    // quadratic even fit on [0, h/2]
    let b = (w[1] - w[0]) / (lit::<T>(2.0) * h * h);
    let a = w[0] - b * h * h / lit(4.0);
    let mut d = vec![a * h * half + b * h * h * h / c24];
    for i in 0..n - 1 {
        let k = i as i64;
        let seg = h * half * (at(k) + at(k + 1)) - h * (at(k + 2) - at(k + 1) - at(k) + at(k - 1)) / c24;
        d.push(d[i] + seg);
    }
    let bs = (w[n - 2] - w[n - 1]) / (lit::<T>(2.0) * h * h);
    let as_ = w[n - 1] - bs * h * h / lit(4.0);
    let total = d[n - 1] + as_ * h * half + bs * h * h * h / c24;
    let h_eff = h * w.iter().copied().fold(T::zero(), T::max);
    let pairs = d.iter().map(|&di| (di, total + total - di)).collect();
    finish(metric, pairs, h_eff, opts).expect("finite meridian lengths")
}

fn unit_vector<T: Real>(th: T, ph: T) -> [T; 3] {
    let (st, ct) = th.sin_cos();
    let (sp, cp) = ph.sin_cos();
    [st * cp, st * sp, ct]
}

fn center_point<T: Real>(grid: &LeafGrid<T>, center: DistanceCenter) -> [T; 3] {
    match center {
        DistanceCenter::Node(c) => {
            let [th, ph] = grid.coord(c);
            unit_vector(th, ph)
        }
        DistanceCenter::NorthPole => [T::zero(), T::zero(), T::one()],
    }
}

fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm<T: Real>(a: [T; 3]) -> T {
    dot(a, a).sqrt()
}

fn scale3<T: Real>(s: T, a: [T; 3]) -> [T; 3] {
    [s * a[0], s * a[1], s * a[2]]
}

fn add3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn angle<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    norm(cross(a, b)).atan2(dot(a, b))
}

/// Exact great-circle distances for a round metric.
fn round_distance<T: Real>(
    metric: &LeafMetric<T>,
    radius: T,
    center: DistanceCenter,
    opts: &DistanceOptions<T>,
) -> DistanceField<T> {
    let grid = metric.grid();
    let c = center_point(grid, center);
    let pairs = (0..grid.len())
        .map(|n| {
            let [th, ph] = grid.coord(n);
            let a = angle(c, unit_vector(th, ph));
            (radius * a, radius * (T::TAU() - a))
        })
        .collect();
    let h_eff = grid.spacing()[0] * radius;
    finish(metric, pairs, h_eff, opts).expect("finite great-circle lengths")
}

/// Geometry of the space the relaxed paths live in.
trait PathSpace<T: Real>: Sync {
    fn tensor(&self, p: [T; 3]) -> [[T; 3]; 3];
    fn basis(&self, p: [T; 3]) -> [[T; 3]; 2];
    fn retract(&self, p: [T; 3]) -> [T; 3];

    fn midpoint(&self, p: [T; 3], q: [T; 3]) -> [T; 3] {
        self.retract(scale3(lit(0.5), add3(p, q)))
    }

    fn segment_energy(&self, p: [T; 3], q: [T; 3]) -> T {
        let v = sub3(q, p);
        let g = self.tensor(self.midpoint(p, q));
        let gv = [dot(g[0], v), dot(g[1], v), dot(g[2], v)];
        dot(v, gv).max(T::zero())
    }

    fn length(&self, pts: &[[T; 3]]) -> T {
        pts.windows(2).map(|w| self.segment_energy(w[0], w[1]).sqrt()).sum()
    }

    fn energy(&self, pts: &[[T; 3]]) -> T {
        pts.windows(2).map(|w| self.segment_energy(w[0], w[1])).sum()
    }
}

fn sym3<T: Real>(m: [[T; 3]; 3], a: [T; 3], b: [T; 3]) -> T {
    (0..3).map(|i| a[i] * dot(m[i], b)).sum()
}

/// Minimises the discrete energy with fixed endpoints; returns the final length.
fn relax<T: Real, S: PathSpace<T>>(space: &S, pts: &mut [[T; 3]]) -> T {
    let k = pts.len() - 1;
    let m = k - 1;
    if m == 0 {
        return space.length(pts);
    }
    let tol = T::epsilon().sqrt();
    let cbrt_eps = T::epsilon().cbrt();
    for _ in 0..60 {
        let scale = space.length(pts) / from_usize(k);
        if !(scale > T::zero()) {
            break;
        }
        let delta = cbrt_eps * scale;
        let bases: Vec<[[T; 3]; 2]> = (1..k).map(|i| space.basis(pts[i])).collect();
        let gs: Vec<[[T; 3]; 3]> = (0..k).map(|i| space.tensor(space.midpoint(pts[i], pts[i + 1]))).collect();
        let mut grad = vec![[T::zero(); 2]; m];
        let mut diag = vec![[[T::zero(); 2]; 2]; m];
        let mut off = vec![[[T::zero(); 2]; 2]; m.saturating_sub(1)];
        for r in 0..m {
            let i = r + 1;
            let local = |p: [T; 3]| space.segment_energy(pts[i - 1], p) + space.segment_energy(p, pts[i + 1]);
            for a in 0..2 {
                let e = bases[r][a];
                let plus = local(space.retract(add3(pts[i], scale3(delta, e))));
                let minus = local(space.retract(sub3(pts[i], scale3(delta, e))));
                grad[r][a] = (plus - minus) / (delta + delta);
                for b in 0..2 {
                    let f = bases[r][b];
                    diag[r][a][b] = lit::<T>(2.0) * (sym3(gs[i - 1], e, f) + sym3(gs[i], e, f));
                    if r + 1 < m {
                        off[r][a][b] = lit::<T>(-2.0) * sym3(gs[i], e, bases[r + 1][b]);
                    }
                }
            }
        }
        let step = block_thomas(&diag, &off, &grad);
        let e0 = space.energy(pts);
        let mut s = T::one();
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<[T; 3]> = (0..=k)
                .map(|i| {
                    if i == 0 || i == k {
                        pts[i]
                    } else {
                        let [b0, b1] = bases[i - 1];
                        let d = step[i - 1];
                        space.retract(sub3(pts[i], scale3(s, add3(scale3(d[0], b0), scale3(d[1], b1)))))
                    }
                })
                .collect();
            if space.energy(&trial) <= e0 {
                accepted = Some(trial);
                break;
            }
            s = s * lit(0.5);
        }
        let Some(trial) = accepted else { break };
        pts.copy_from_slice(&trial);
        let size = step.iter().map(|d| d[0].abs().max(d[1].abs())).fold(T::zero(), T::max) * s;
        if size <= tol * scale {
            break;
        }
    }
    space.length(pts)
}

/// Solves the symmetric block-tridiagonal system with 2×2 blocks.
fn block_thomas<T: Real>(diag: &[[[T; 2]; 2]], off: &[[[T; 2]; 2]], rhs: &[[T; 2]]) -> Vec<[T; 2]> {
    let m = diag.len();
    let inv2 = |a: [[T; 2]; 2]| {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]
    };
    let mul = |a: [[T; 2]; 2], b: [[T; 2]; 2]| {
        let mut c = [[T::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        c
    };
    let mv = |a: [[T; 2]; 2], v: [T; 2]| [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]];
    let tr = |a: [[T; 2]; 2]| [[a[0][0], a[1][0]], [a[0][1], a[1][1]]];
    let mut dprime = diag.to_vec();
    let mut y = rhs.to_vec();
    for r in 1..m {
        // L_r = off_{r-1}ᵀ D'_{r-1}^{-1}
        let l = mul(tr(off[r - 1]), inv2(dprime[r - 1]));
        let lo = mul(l, off[r - 1]);
        for i in 0..2 {
            for j in 0..2 {
                dprime[r][i][j] = dprime[r][i][j] - lo[i][j];
            }
        }
        let ly = mv(l, y[r - 1]);
        y[r] = [y[r][0] - ly[0], y[r][1] - ly[1]];
    }
    let mut x = vec![[T::zero(); 2]; m];
    for r in (0..m).rev() {
        let mut b = y[r];
        if r + 1 < m {
            let ox = mv(off[r], x[r + 1]);
            b = [b[0] - ox[0], b[1] - ox[1]];
        }
        x[r] = mv(inv2(dprime[r]), b);
    }
    x
}

fn refine<T: Real, S: PathSpace<T>>(space: &S, pts: &[[T; 3]]) -> Vec<[T; 3]> {
    let mut out = Vec::with_capacity(2 * pts.len() - 1);
    for w in pts.windows(2) {
        out.push(w[0]);
        out.push(space.midpoint(w[0], w[1]));
    }
    out.push(*pts.last().unwrap());
    out
}

/// Relaxes at two resolutions and extrapolates.
fn relaxed_length<T: Real, S: PathSpace<T>>(space: &S, mut coarse: Vec<[T; 3]>) -> T {
    let l1 = relax(space, &mut coarse);
    let mut fine = refine(space, &coarse);
    let l2 = relax(space, &mut fine);
    (lit::<T>(4.0) * l2 - l1) / lit(3.0)
}

fn sampled_length<T: Real, S: PathSpace<T>>(space: &S, coarse: Vec<[T; 3]>) -> T {
    let l1 = space.length(&coarse);
    let l2 = space.length(&refine(space, &coarse));
    (lit::<T>(4.0) * l2 - l1) / lit(3.0)
}

struct Plane<'a, T> {
    interp: NodeInterp<'a, T, 3>,
}

impl<T: Real> PathSpace<T> for Plane<'_, T> {
    fn tensor(&self, p: [T; 3]) -> [[T; 3]; 3] {
        let [xx, xy, yy] = self.interp.eval(p[0], p[1]);
        let z = T::zero();
        [[xx, xy, z], [xy, yy, z], [z, z, z]]
    }

    fn basis(&self, _p: [T; 3]) -> [[T; 3]; 2] {
        let (o, z) = (T::one(), T::zero());
        [[o, z, z], [z, o, z]]
    }

    fn retract(&self, p: [T; 3]) -> [T; 3] {
        [p[0], p[1], T::zero()]
    }
}

fn line<T: Real>(a: [T; 3], b: [T; 3], k: usize) -> Vec<[T; 3]> {
    (0..=k)
        .map(|i| {
            let s = from_usize::<T>(i) / from_usize(k);
            add3(a, scale3(s, sub3(b, a)))
        })
        .collect()
}

fn plane_distance<T: Real>(metric: &LeafMetric<T>, center: usize, opts: &DistanceOptions<T>) -> Result<DistanceField<T>> {
    let grid = metric.grid();
    let data = metric.components().iter().map(|g| [g.xx, g.xy, g.yy]).collect();
    let space = Plane { interp: NodeInterp::new(grid, data) };
    let [n0, n1] = grid.counts();
    let [h0, h1] = grid.spacing();
    let period = [h0 * from_usize(n0), h1 * from_usize(n1)];
    let [cx, cy] = grid.coord(center);
    let k = opts.segments / 2;
    let pairs: Vec<(T, T)> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let [x, y] = grid.coord(node);
            let mut cands: Vec<(T, Vec<[T; 3]>)> = Vec::with_capacity(9);
            for si in -1i32..=1 {
                for sj in -1i32..=1 {
                    let tx = x + period[0] * lit(f64::from(si));
                    let ty = y + period[1] * lit(f64::from(sj));
                    let path = line([cx, cy, T::zero()], [tx, ty, T::zero()], k);
                    cands.push((space.length(&path), path));
                }
            }
            cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            if node == center {
                return (T::zero(), cands[1].0);
            }
            let mut lens: Vec<T> = cands.into_iter().take(4).map(|(_, p)| relaxed_length(&space, p)).collect();
            lens.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            (lens[0], lens[1])
        })
        .collect();
    let h_eff = h0.max(h1) * max_eigen(metric.components().iter().copied()).sqrt();
    finish(metric, pairs, h_eff, opts)
}

fn max_eigen<T: Real>(it: impl Iterator<Item = Sym2<T>>) -> T {
    it.map(|g| g.eigenvalues().1).fold(T::zero(), T::max)
}

struct Sphere<'a, T> {
    interp: NodeInterp<'a, T, 6>,
}

impl<T: Real> PathSpace<T> for Sphere<'_, T> {
    fn tensor(&self, p: [T; 3]) -> [[T; 3]; 3] {
        let th = p[2].max(-T::one()).min(T::one()).acos();
        let ph = p[1].atan2(p[0]);
        let [a, b, c, d, e, f] = self.interp.eval(th, ph);
        [[a, b, c], [b, d, e], [c, e, f]]
    }

    fn basis(&self, p: [T; 3]) -> [[T; 3]; 2] {
        let seed = if p[2].abs() < lit(0.9) {
            [T::zero(), T::zero(), T::one()]
        } else {
            [T::one(), T::zero(), T::zero()]
        };
        let e1 = cross(seed, p);
        let e1 = scale3(T::one() / norm(e1), e1);
        [e1, cross(p, e1)]
    }

    fn retract(&self, p: [T; 3]) -> [T; 3] {
        scale3(T::one() / norm(p), p)
    }
}

/// Ambient tensor `g_θθ e_θe_θᵀ + g_θφ (e_θe_φᵀ + e_φe_θᵀ)/sinθ + g_φφ e_φe_φᵀ/sin²θ`.
fn ambient_tensor<T: Real>(th: T, ph: T, g: &Sym2<T>) -> [T; 6] {
    let (st, ct) = th.sin_cos();
    let (sp, cp) = ph.sin_cos();
    let et = [ct * cp, ct * sp, -st];
    let ep = [-sp, cp, T::zero()];
    let a = g.xx;
    let b = g.xy / st;
    let c = g.yy / (st * st);
    let m = |i: usize, j: usize| a * et[i] * et[j] + b * (et[i] * ep[j] + ep[i] * et[j]) + c * ep[i] * ep[j];
    [m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2)]
}

fn arc<T: Real>(c: [T; 3], w: [T; 3], total: T, k: usize) -> Vec<[T; 3]> {
    (0..=k)
        .map(|i| {
            let s = total * from_usize(i) / from_usize(k);
            add3(scale3(s.cos(), c), scale3(s.sin(), w))
        })
        .collect()
}

fn sphere_distance<T: Real>(
    metric: &LeafMetric<T>,
    center: DistanceCenter,
    opts: &DistanceOptions<T>,
) -> Result<DistanceField<T>> {
    let grid = metric.grid();
    let data = (0..grid.len())
        .map(|n| {
            let [th, ph] = grid.coord(n);
            ambient_tensor(th, ph, &metric.at(n))
        })
        .collect();
    let space = Sphere { interp: NodeInterp::new(grid, data) };
    let c = center_point(grid, center);
    let k = opts.segments / 2;
    let pairs: Vec<(T, T)> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let [th, ph] = grid.coord(node);
            let p = unit_vector(th, ph);
            let a = angle(c, p);
            let tangent = sub3(p, scale3(dot(c, p), c));
            let w = if norm(tangent) > lit(1e-9) {
                scale3(T::one() / norm(tangent), tangent)
            } else {
                space.basis(c)[0]
            };
            let long = sampled_length(&space, arc(c, scale3(-T::one(), w), T::TAU() - a, 2 * k));
            if a <= T::epsilon() {
                return (T::zero(), long);
            }
            let short = relaxed_length(&space, arc(c, w, a, k));
            (short, long)
        })
        .collect();
    let frame_max = (0..grid.len())
        .map(|n| {
            let st = grid.coord(n)[0].sin();
            let g = metric.at(n);
            Sym2::new(g.xx, g.xy / st, g.yy / (st * st)).eigenvalues().1
        })
        .fold(T::zero(), T::max);
    finish(metric, pairs, grid.spacing()[0] * frame_max.sqrt(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_scenario_metric, ScenarioParams, SphereLayout};
    use std::sync::Arc;

    fn unreduced_sphere(n: usize, r: f64) -> LeafMetric<f64> {
        let grid = Arc::new(LeafGrid::<f64>::spherical(n, 2 * n).unwrap());
        let comps = (0..grid.len())
            .map(|k| {
                let s = grid.coord(k)[0].sin();
                Sym2::diag(r * r, r * r * s * s)
            })
            .collect();
        LeafMetric::new(grid, comps).unwrap()
    }

    fn great_circle(a: [f64; 2], b: [f64; 2]) -> f64 {
        let u = unit_vector(a[0], a[1]);
        let v = unit_vector(b[0], b[1]);
        angle(u, v)
    }

    #[test]
    fn flat_neighbor_is_one_spacing() {
        let m = build_scenario_metric::<f64>("flat-torus", &ScenarioParams { resolution: 16, ..Default::default() })
            .unwrap();
        let g = m.grid();
        let c = g.index(3, 4);
        let d = geodesic_distance(&m, DistanceCenter::Node(c), &DistanceOptions::default()).unwrap();
        let h = g.spacing()[0];
        assert_eq!(d.distance.values()[c], 0.0);
        assert!((d.distance.values()[g.index(4, 4)] - h).abs() < 1e-12);
        assert!((d.distance.values()[g.index(3, 3)] - h).abs() < 1e-12);
        // wraps around the seam
        assert!((d.distance.values()[g.index(15, 4)] - 4.0 * h).abs() < 1e-12);
        // antipodal line is the cut locus
        assert!(!d.is_valid(g.index(11, 4)));
        assert!(d.is_valid(g.index(5, 6)));
    }

    #[test]
    fn unreduced_sphere_matches_great_circles() {
        let m = unreduced_sphere(16, 1.0);
        let g = m.grid();
        let c = g.index(4, 3);
        let d = geodesic_distance(&m, DistanceCenter::Node(c), &DistanceOptions::default()).unwrap();
        let h = g.spacing()[0];
        for n in 0..g.len() {
            let exact = great_circle(g.coord(c), g.coord(n));
            if d.is_valid(n) {
                assert!((d.distance.values()[n] - exact).abs() < h * h, "node {n}");
            } else {
                assert!(std::f64::consts::PI - exact < 3.0 * h + 1e-9);
            }
        }
        let antipode = g.index(11, 19);
        assert!(!d.is_valid(antipode));
    }

    #[test]
    fn reduced_sphere_is_scaled_great_circle() {
        let p = ScenarioParams { radius: 2.0, resolution: 16, ..Default::default() };
        let m = build_scenario_metric::<f64>("round-sphere", &p).unwrap();
        let d = geodesic_distance(&m, DistanceCenter::NorthPole, &DistanceOptions::default()).unwrap();
        for n in 0..m.grid().len() {
            assert!((d.distance.values()[n] - 2.0 * m.grid().coord(n)[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn meridian_integral_on_axisymmetric_sphere() {
        let p = ScenarioParams { radius: 1.5, resolution: 32, layout: SphereLayout::Axisymmetric, ..Default::default() };
        let m = build_scenario_metric::<f64>("round-sphere", &p).unwrap();
        let d = geodesic_distance(&m, DistanceCenter::NorthPole, &DistanceOptions::default()).unwrap();
        let h = m.grid().spacing()[0];
        for i in 0..32 {
            let th = m.grid().coord(i)[0];
            assert!((d.distance.values()[i] - 1.5 * th).abs() < 1e-12);
            assert_eq!(d.is_valid(i), std::f64::consts::PI - th >= 3.0 * h - 1e-12);
        }
        assert!(geodesic_distance(&m, DistanceCenter::Node(0), &DistanceOptions::default()).is_err());
    }

    #[test]
    fn bumped_torus_distance_is_a_metric_quantity() {
        let p = ScenarioParams { amplitude: 0.3, resolution: 12, ..Default::default() };
        let m = build_scenario_metric::<f64>("torus-bump", &p).unwrap();
        let g = m.grid();
        let c = g.index(2, 2);
        let d = geodesic_distance(&m, DistanceCenter::Node(c), &DistanceOptions::default()).unwrap();
        let lo = m.min_eigenvalue().1.sqrt();
        let hi = max_eigen(m.components().iter().copied()).sqrt();
        for n in 0..g.len() {
            let [x, y] = g.coord(n);
            let [cx, cy] = g.coord(c);
            let tau = std::f64::consts::TAU;
            let dx = ((x - cx).rem_euclid(tau)).min(tau - (x - cx).rem_euclid(tau));
            let dy = ((y - cy).rem_euclid(tau)).min(tau - (y - cy).rem_euclid(tau));
            let flat = dx.hypot(dy);
            let v = d.distance.values()[n];
            assert!(v >= lo * flat - 1e-9 && v <= hi * flat + 1e-9, "node {n}");
        }
    }
}
