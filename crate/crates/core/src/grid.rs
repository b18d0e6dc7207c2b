//! Structured leaf grids and the central-difference stencils built on them.
//!
//! Three layouts are supported:
//!
//! * `Periodic`: a doubly periodic rectangle (flat or bumped torus), nodes at `i * h`.
//! * `Spherical`: colatitude/longitude chart with cell-centred colatitudes
//!   `θ_i = (i + 1/2) π / n_θ`, so no node sits on a pole. Stencils that step
//!   past a pole continue on the opposite meridian (`φ + π`); tensor components
//!   carrying an odd number of θ indices change sign there.
//! * `Axisymmetric`: the same colatitude axis with every field independent of
//!   longitude, so derivatives along the second axis vanish identically.

use serde::{Deserialize, Serialize};

use crate::scalar::{from_usize, lit, Real};

/// Minimum number of nodes along any resolved axis.
pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Periodic,
    Spherical,
    Axisymmetric,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("axis {axis} has {count} nodes, need at least {MIN_NODES}")]
    TooFewNodes { axis: usize, count: usize },
    #[error("grid spacing must be strictly positive")]
    NonPositiveSpacing,
    #[error("spherical grids need an even longitude count, got {0}")]
    OddLongitudeCount(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafGrid<T> {
    topology: Topology,
    counts: [usize; 2],
    spacing: [T; 2],
    coords: [Vec<T>; 2],
}

/// A stencil neighbour: storage index plus whether the step crossed a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub index: usize,
    pub reflected: bool,
}

impl<T: Real> LeafGrid<T> {
    pub fn periodic(nx: usize, ny: usize, lx: T, ly: T) -> Result<Self, GridError> {
        check_count(0, nx)?;
        check_count(1, ny)?;
        if !(lx > T::zero() && ly > T::zero()) {
            return Err(GridError::NonPositiveSpacing);
        }
        let hx = lx / from_usize(nx);
        let hy = ly / from_usize(ny);
        Ok(Self {
            topology: Topology::Periodic,
            counts: [nx, ny],
            spacing: [hx, hy],
            coords: [
                (0..nx).map(|i| hx * from_usize(i)).collect(),
                (0..ny).map(|j| hy * from_usize(j)).collect(),
            ],
        })
    }

    pub fn spherical(n_theta: usize, n_phi: usize) -> Result<Self, GridError> {
        check_count(0, n_theta)?;
        check_count(1, n_phi)?;
        if !n_phi.is_multiple_of(2) {
            return Err(GridError::OddLongitudeCount(n_phi));
        }
        let ht = T::PI() / from_usize(n_theta);
        let hp = T::TAU() / from_usize(n_phi);
        Ok(Self {
            topology: Topology::Spherical,
            counts: [n_theta, n_phi],
            spacing: [ht, hp],
            coords: [
                (0..n_theta).map(|i| ht * (from_usize::<T>(i) + lit(0.5))).collect(),
                (0..n_phi).map(|j| hp * from_usize(j)).collect(),
            ],
        })
    }

    pub fn axisymmetric(n_theta: usize) -> Result<Self, GridError> {
        check_count(0, n_theta)?;
        let ht = T::PI() / from_usize(n_theta);
        Ok(Self {
            topology: Topology::Axisymmetric,
            counts: [n_theta, 1],
            spacing: [ht, T::TAU()],
            coords: [
                (0..n_theta).map(|i| ht * (from_usize::<T>(i) + lit(0.5))).collect(),
                vec![T::zero()],
            ],
        })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn counts(&self) -> [usize; 2] {
        self.counts
    }

    pub fn spacing(&self) -> [T; 2] {
        self.spacing
    }

    pub fn axis_coords(&self, axis: usize) -> &[T] {
        &self.coords[axis]
    }

    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Storage index of node `(i, j)`; the first axis varies fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.counts[0] + i
    }

    #[inline]
    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.counts[0], node / self.counts[0])
    }

    #[inline]
    pub fn coord(&self, node: usize) -> [T; 2] {
        let (i, j) = self.ij(node);
        [self.coords[0][i], self.coords[1][j]]
    }

    /// Whether derivatives along `axis` are resolved (false for the symmetry axis).
    #[inline]
    pub fn resolves(&self, axis: usize) -> bool {
        !(axis == 1 && self.topology == Topology::Axisymmetric)
    }

    /// Colatitude/longitude chart (spherical or axisymmetric).
    pub fn is_polar_chart(&self) -> bool {
        matches!(self.topology, Topology::Spherical | Topology::Axisymmetric)
    }

    /// Neighbour reached by stepping `(di, dj)` cells from `node`.
    pub fn neighbor(&self, node: usize, di: isize, dj: isize) -> Neighbor {
        let (i, j) = self.ij(node);
        let [n0, n1] = self.counts;
        let (n0i, n1i) = (n0 as isize, n1 as isize);
        match self.topology {
            Topology::Periodic => {
                let ii = (i as isize + di).rem_euclid(n0i) as usize;
                let jj = (j as isize + dj).rem_euclid(n1i) as usize;
                Neighbor { index: self.index(ii, jj), reflected: false }
            }
            Topology::Spherical | Topology::Axisymmetric => {
                let mut ii = i as isize + di;
                let mut jj = j as isize + dj;
                let mut reflected = false;
                if ii < 0 {
                    ii = -1 - ii;
                    jj += n1i / 2;
                    reflected = true;
                } else if ii >= n0i {
                    ii = 2 * n0i - 1 - ii;
                    jj += n1i / 2;
                    reflected = true;
                }
                let jj = if self.topology == Topology::Axisymmetric {
                    0
                } else {
                    jj.rem_euclid(n1i) as usize
                };
                Neighbor { index: self.index(ii as usize, jj), reflected }
            }
        }
    }

    #[inline]
    fn sample(&self, node: usize, di: isize, dj: isize, odd: bool, f: &impl Fn(usize) -> T) -> T {
        let nb = self.neighbor(node, di, dj);
        let v = f(nb.index);
        if nb.reflected && odd {
            -v
        } else {
            v
        }
    }

    /// Central first derivative along `axis` of the component read by `f`.
    /// `odd` marks components that flip sign across a pole.
    #[inline]
    pub fn d1(&self, node: usize, axis: usize, odd: bool, f: &impl Fn(usize) -> T) -> T {
        if !self.resolves(axis) {
            return T::zero();
        }
        let h = self.spacing[axis];
        let (p, m) = if axis == 0 {
            (self.sample(node, 1, 0, odd, f), self.sample(node, -1, 0, odd, f))
        } else {
            (self.sample(node, 0, 1, odd, f), self.sample(node, 0, -1, odd, f))
        };
        (p - m) / (h + h)
    }

    /// Central second derivative `∂_a ∂_b` of the component read by `f`.
    #[inline]
    pub fn d2(&self, node: usize, a: usize, b: usize, odd: bool, f: &impl Fn(usize) -> T) -> T {
        if !self.resolves(a) || !self.resolves(b) {
            return T::zero();
        }
        let c = f(node);
        if a == b {
            let h = self.spacing[a];
            let (p, m) = if a == 0 {
                (self.sample(node, 1, 0, odd, f), self.sample(node, -1, 0, odd, f))
            } else {
                (self.sample(node, 0, 1, odd, f), self.sample(node, 0, -1, odd, f))
            };
            (p - c - c + m) / (h * h)
        } else {
            let pp = self.sample(node, 1, 1, odd, f);
            let pm = self.sample(node, 1, -1, odd, f);
            let mp = self.sample(node, -1, 1, odd, f);
            let mm = self.sample(node, -1, -1, odd, f);
            (pp - pm - mp + mm) / (lit::<T>(4.0) * self.spacing[0] * self.spacing[1])
        }
    }

    /// True when the two grids share layout and resolution.
    pub fn same_layout(&self, other: &Self) -> bool {
        self.topology == other.topology && self.counts == other.counts && self.spacing == other.spacing
    }

    /// Node nearest to the given coordinates (longitude ignored on axisymmetric grids).
    pub fn nearest_node(&self, x0: T, x1: T) -> usize {
        let pick = |axis: usize, x: T| -> usize {
            let c = &self.coords[axis];
            let mut best = 0;
            for (k, &v) in c.iter().enumerate() {
                if (v - x).abs() < (c[best] - x).abs() {
                    best = k;
                }
            }
            best
        };
        self.index(pick(0, x0), pick(1, x1))
    }
}

fn check_count(axis: usize, count: usize) -> Result<(), GridError> {
    if count < MIN_NODES {
        Err(GridError::TooFewNodes { axis, count })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spherical_nodes_avoid_poles() {
        let g = LeafGrid::<f64>::spherical(16, 32).unwrap();
        let th = g.axis_coords(0);
        assert!(th[0] > 0.0 && th[15] < std::f64::consts::PI);
    }

    #[test]
    fn rejects_small_and_odd_grids() {
        assert!(matches!(
            LeafGrid::<f64>::spherical(4, 16),
            Err(GridError::TooFewNodes { axis: 0, count: 4 })
        ));
        assert!(matches!(LeafGrid::<f64>::spherical(8, 17), Err(GridError::OddLongitudeCount(17))));
        assert!(LeafGrid::<f64>::periodic(8, 8, 0.0, 1.0).is_err());
    }

    #[test]
    fn pole_crossing_lands_on_opposite_meridian() {
        let g = LeafGrid::<f64>::spherical(8, 16).unwrap();
        let nb = g.neighbor(g.index(0, 3), -1, 0);
        assert_eq!(nb, Neighbor { index: g.index(0, 11), reflected: true });
        let nb = g.neighbor(g.index(7, 14), 1, 1);
        assert_eq!(nb, Neighbor { index: g.index(7, 7), reflected: true });
    }

    #[test]
    fn second_derivative_of_even_function_across_pole() {
        // cos θ continued across the pole stays cos θ, so the stencil is exact up to O(h²).
        let g = LeafGrid::<f64>::spherical(32, 64).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|n| g.coord(n)[0].cos()).collect();
        let f = |k: usize| vals[k];
        let n = g.index(0, 5);
        let h = g.spacing()[0];
        let th = g.coord(n)[0];
        let expect = -th.cos() * 2.0 * (1.0 - h.cos()) / (h * h);
        assert!((g.d2(n, 0, 0, false, &f) - expect).abs() < 1e-12);
    }
}
