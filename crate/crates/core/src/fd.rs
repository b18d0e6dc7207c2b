//! Finite-difference weights on arbitrary one-dimensional stencils.

use crate::scalar::{from_usize, Real};

/// Weights for the `order`-th derivative at `x0` using the nodes `xs`
/// (Fornberg's recursion). Returns one weight per node.
pub fn fornberg_weights<T: Real>(x0: T, xs: &[T], order: usize) -> Vec<T> {
    let n = xs.len();
    assert!(n > order, "stencil too small for derivative order");
    // c[j][k]: weight of node j for derivative k
    let mut c = vec![vec![T::zero(); order + 1]; n];
    let mut c1 = T::one();
    let mut c4 = xs[0] - x0;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (from_usize::<T>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - from_usize::<T>(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Derivative of sampled values at every sample, using a sliding stencil of
/// `width` points (centered where possible, one-sided near the ends).
pub fn sampled_derivative<T: Real>(ts: &[T], ys: &[T], order: usize, width: usize) -> Vec<T> {
    let n = ts.len();
    assert_eq!(n, ys.len());
    let width = width.min(n);
    (0..n)
        .map(|k| {
            let start = k.saturating_sub(width / 2).min(n - width);
            let nodes = &ts[start..start + width];
            let w = fornberg_weights(ts[k], nodes, order);
            w.iter().zip(&ys[start..start + width]).map(|(&wi, &yi)| wi * yi).sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_second_derivative_weights() {
        let w = fornberg_weights(0.0_f64, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn five_point_first_derivative() {
        let w = fornberg_weights(0.0_f64, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn sampled_derivative_exact_on_polynomials() {
        let ts: Vec<f64> = (0..20).map(|k| 0.1 * k as f64 + 0.01 * (k % 3) as f64).collect();
        let ys: Vec<f64> = ts.iter().map(|t| t * t * t).collect();
        let d = sampled_derivative(&ts, &ys, 1, 5);
        for (t, v) in ts.iter().zip(d) {
            assert!((v - 3.0 * t * t).abs() < 1e-10, "{v} vs {}", 3.0 * t * t);
        }
    }
}
