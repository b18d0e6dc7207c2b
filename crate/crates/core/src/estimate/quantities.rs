use super::{EstimateError, Result};
use crate::fd::fornberg_weights;
use crate::metric::{check_same_grid, DiffOperators, LeafMetric, ScalarField};
use crate::scalar::{to_f64, Real};

/// `f = ln(u / A)`; rejects the first node where `u > A`.
pub fn log_density<T: Real>(u: &ScalarField<T>, a: T) -> Result<ScalarField<T>> {
    let mut out = Vec::with_capacity(u.values().len());
    for (node, &v) in u.values().iter().enumerate() {
        if !(v > T::zero()) {
            return Err(EstimateError::NonPositive { node, value: to_f64(v) });
        }
        if v > a {
            return Err(EstimateError::ExceedsBound { node, value: to_f64(v), bound: to_f64(a) });
        }
        out.push((v / a).ln());
    }
    Ok(ScalarField::new(u.shared_grid(), out)?)
}

/// `φ = ‖∇f‖² / (1 − f)²`.
pub fn phi_quantity<T: Real>(f: &ScalarField<T>, metric: &LeafMetric<T>) -> Result<ScalarField<T>> {
    check_same_grid(metric.grid(), f.grid())?;
    let ops = DiffOperators::new(metric)?;
    let g = ops.grad_norm_sq(f.values());
    let out = g
        .iter()
        .zip(f.values())
        .map(|(&g, &f)| {
            let d = T::one() - f;
            g / (d * d)
        })
        .collect();
    Ok(ScalarField::new(f.shared_grid(), out)?)
}

/// `∂_t` of sampled fields by three-point Fornberg stencils on the sample
/// times: centred inside, one-sided at the ends, two-point with only two samples.
///
/// Differences are taken against the centre value so spatially and
/// temporally constant data give exactly zero.
pub fn time_derivative<T: Real>(times: &[T], fields: &[&[T]]) -> Result<Vec<Vec<T>>> {
    let k = times.len();
    if k < 2 || fields.len() != k {
        return Err(EstimateError::TooFewSamples { needed: 2, got: k.min(fields.len()) });
    }
    let width = k.min(3);
    Ok((0..k)
        .map(|i| {
            let start = i.saturating_sub(1).min(k - width);
            let w = fornberg_weights(times[i], &times[start..start + width], 1);
            (0..fields[i].len())
                .map(|n| {
                    let centre = fields[i][n];
                    (0..width).map(|j| w[j] * (fields[start + j][n] - centre)).sum()
                })
                .collect()
        })
        .collect())
}

/// Ingredients of the space-time quantities at one sample.
pub struct SampleTerms<T> {
    /// `‖∇u‖² / u²`
    pub grad_log_sq: Vec<T>,
    /// `u_t / u`
    pub log_rate: Vec<T>,
}

pub fn sample_terms<T: Real>(metric: &LeafMetric<T>, u: &[T], u_t: &[T]) -> Result<SampleTerms<T>> {
    let ops = DiffOperators::new(metric)?;
    let g = ops.grad_norm_sq(u);
    Ok(SampleTerms {
        grad_log_sq: g.iter().zip(u).map(|(&g, &u)| g / (u * u)).collect(),
        log_rate: u_t.iter().zip(u).map(|(&d, &u)| d / u).collect(),
    })
}

/// `G = t (‖∇f‖² − α ∂_t f)` with `f = ln u`, at every stored sample.
pub fn harnack_quantity<T: Real>(
    times: &[T],
    metrics: &[LeafMetric<T>],
    heat: &[ScalarField<T>],
    alpha: T,
) -> Result<Vec<ScalarField<T>>> {
    if metrics.len() != times.len() || heat.len() != times.len() {
        return Err(EstimateError::TooFewSamples { needed: times.len(), got: metrics.len().min(heat.len()) });
    }
    let values: Vec<&[T]> = heat.iter().map(|u| u.values()).collect();
    let rates = time_derivative(times, &values)?;
    times
        .iter()
        .zip(metrics)
        .zip(heat.iter().zip(&rates))
        .map(|((&t, m), (u, ut))| {
            let s = sample_terms(m, u.values(), ut)?;
            let g = s.grad_log_sq.iter().zip(&s.log_rate).map(|(&a, &b)| t * (a - alpha * b)).collect();
            Ok(ScalarField::new(u.shared_grid(), g)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_scenario_metric, ScenarioParams};

    fn torus(n: usize) -> LeafMetric<f64> {
        build_scenario_metric("flat-torus", &ScenarioParams { resolution: n, ..Default::default() }).unwrap()
    }

    #[test]
    fn log_density_identities() {
        let m = torus(8);
        let a = 3.0;
        let u = ScalarField::from_fn(m.shared_grid(), |[x, _]| if x == 0.0 { a / 1f64.exp() } else { a }).unwrap();
        let f = log_density(&u, a).unwrap();
        for (node, &v) in f.values().iter().enumerate() {
            let expected = if m.grid().coord(node)[0] == 0.0 { -1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-15);
            assert!(1.0 - v >= 1.0);
        }
        let too_big = ScalarField::constant(m.shared_grid(), 4.0).unwrap();
        assert!(matches!(log_density(&too_big, a), Err(EstimateError::ExceedsBound { node: 0, .. })));
    }

    #[test]
    fn phi_on_an_exponential_profile() {
        let n = 64;
        let m = torus(n);
        let a = 2.0;
        let u = ScalarField::from_fn(m.shared_grid(), |[x, _]| a * (x.sin() - 1.0).exp()).unwrap();
        let f = log_density(&u, a).unwrap();
        let phi = phi_quantity(&f, &m).unwrap();
        let h = std::f64::consts::TAU / n as f64;
        for (node, p) in phi.values().iter().enumerate() {
            let x = m.grid().coord(node)[0];
            let exact = x.cos().powi(2) / (2.0 - x.sin()).powi(2);
            assert!((p - exact).abs() < h * h);
        }
    }

    #[test]
    fn time_derivative_is_exact_for_quadratics() {
        let ts = [0.0, 0.1, 0.25, 0.3, 0.7];
        let ys: Vec<Vec<f64>> = ts.iter().map(|t| vec![1.0 + 2.0 * t - t * t, 5.0]).collect();
        let refs: Vec<&[f64]> = ys.iter().map(|v| v.as_slice()).collect();
        let d = time_derivative(&ts, &refs).unwrap();
        for (t, row) in ts.iter().zip(&d) {
            assert!((row[0] - (2.0 - 2.0 * t)).abs() < 1e-12);
            assert_eq!(row[1], 0.0);
        }
    }

    #[test]
    fn harnack_quantity_for_a_decaying_constant() {
        let m = torus(8);
        let lambda = 0.7;
        let ts: Vec<f64> = (0..6).map(|k| 0.1 * k as f64).collect();
        let heat: Vec<_> =
            ts.iter().map(|t| ScalarField::constant(m.shared_grid(), (-lambda * t).exp()).unwrap()).collect();
        let metrics = vec![m.clone(); ts.len()];
        let alpha = 2.0;
        let g = harnack_quantity(&ts, &metrics, &heat, alpha).unwrap();
        // u_t / u = −λ up to the stencil error of e^{−λt}
        for (t, gk) in ts.iter().zip(&g) {
            assert!(gk.values().iter().all(|v| (v - t * alpha * lambda).abs() < 5e-3));
        }
    }
}
