//! Catmull-Rom bicubic interpolation of node data, continued across periodic
//! seams and poles with the grid's own neighbour rules.

use crate::grid::{LeafGrid, Topology};
use crate::scalar::{lit, Real};

#[inline]
fn weights<T: Real>(t: T) -> [T; 4] {
    let half = lit::<T>(0.5);
    let t2 = t * t;
    let t3 = t2 * t;
    [
        half * (-t3 + t2 + t2 - t),
        half * (lit::<T>(3.0) * t3 - lit::<T>(5.0) * t2 + lit(2.0)),
        half * (lit::<T>(-3.0) * t3 + lit::<T>(4.0) * t2 + t),
        half * (t3 - t2),
    ]
}

/// Interpolates `C` scalar components stored per node. Values must be true
/// scalars (no sign change across a pole).
pub(crate) struct NodeInterp<'a, T, const C: usize> {
    grid: &'a LeafGrid<T>,
    data: Vec<[T; C]>,
}

impl<'a, T: Real, const C: usize> NodeInterp<'a, T, C> {
    pub fn new(grid: &'a LeafGrid<T>, data: Vec<[T; C]>) -> Self {
        debug_assert_eq!(grid.len(), data.len());
        Self { grid, data }
    }

    /// Value at chart coordinates `(x0, x1)`; periodic coordinates may lie
    /// outside the fundamental domain.
    pub fn eval(&self, x0: T, x1: T) -> [T; C] {
        let [h0, h1] = self.grid.spacing();
        let [n0, n1] = self.grid.counts();
        let u0 = match self.grid.topology() {
            Topology::Periodic => x0 / h0,
            _ => x0 / h0 - lit(0.5),
        };
        let u1 = x1 / h1;
        let f0 = u0.floor();
        let f1 = u1.floor();
        let w0 = weights(u0 - f0);
        let w1 = weights(u1 - f1);
        let i = f0.to_i64().unwrap_or(0);
        let j = f1.to_i64().unwrap_or(0);
        let (bi, bj) = (i.clamp(0, n0 as i64 - 1), j.rem_euclid(n1 as i64));
        let base = self.grid.index(bi as usize, bj as usize);
        let mut out = [T::zero(); C];
        for (a, wa) in w0.iter().enumerate() {
            let di = i - 1 + a as i64 - bi;
            for (b, wb) in w1.iter().enumerate() {
                let dj = if self.grid.resolves(1) { b as i64 - 1 } else { 0 };
                let nb = self.grid.neighbor(base, di as isize, dj as isize);
                let w = *wa * *wb;
                let v = &self.data[nb.index];
                for c in 0..C {
                    out[c] = out[c] + w * v[c];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_node_values_and_cubics() {
        let g = LeafGrid::<f64>::periodic(16, 16, 1.0, 1.0).unwrap();
        let data: Vec<[f64; 1]> = (0..g.len())
            .map(|n| {
                let [x, y] = g.coord(n);
                [(std::f64::consts::TAU * x).sin() + (std::f64::consts::TAU * y).cos()]
            })
            .collect();
        let ip = NodeInterp::new(&g, data.clone());
        for n in [0, 17, 255] {
            let [x, y] = g.coord(n);
            assert!((ip.eval(x, y)[0] - data[n][0]).abs() < 1e-14);
            assert!((ip.eval(x + 1.0, y - 2.0)[0] - data[n][0]).abs() < 1e-12);
        }
        let v = ip.eval(0.33, 0.71)[0];
        let exact = (std::f64::consts::TAU * 0.33).sin() + (std::f64::consts::TAU * 0.71).cos();
        assert!((v - exact).abs() < 5e-3);
    }

    #[test]
    fn smooth_across_pole() {
        // z = cos θ is a smooth function on the sphere
        let g = LeafGrid::<f64>::spherical(32, 64).unwrap();
        let data: Vec<[f64; 1]> = (0..g.len()).map(|n| [g.coord(n)[0].cos()]).collect();
        let ip = NodeInterp::new(&g, data);
        for th in [0.001, 0.03, 1.0, 3.1] {
            assert!((ip.eval(th, 0.4)[0] - th.cos()).abs() < 1e-4, "{th}");
        }
    }
}
