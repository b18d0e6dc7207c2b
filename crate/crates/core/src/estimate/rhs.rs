//! Right-hand sides of the estimates as plain functions of their parameters.
//! A cube radius of `None` means the whole leaf (`ρ → ∞`).

use super::cutoff::Constants;
use crate::flow::CurvatureBounds;

fn inv_sq(radius: Option<f64>) -> f64 {
    radius.map_or(0.0, |r| 1.0 / (r * r))
}

/// `(1 + ln(A/u))²`
pub fn log_prefactor(a: f64, u: f64) -> f64 {
    let l = 1.0 + (a / u).ln();
    l * l
}

/// Backward flow, `Scal ≥ −ρ₁`, `Ric ≥ −ρ₂`, `‖∇Scal‖ ≤ ρ₃`:
/// `(1 + ln(A/u))² (1/t + c₂ρ₁ + 4ρ₂ + 2ρ₃ + (ρ c₁ √ρ₂ + c₂)/ρ²)`.
pub fn backward_gradient(t: f64, b: &CurvatureBounds<f64>, radius: Option<f64>, k: &Constants, a: f64, u: f64) -> f64 {
    let cube = radius.map_or(0.0, |r| (r * k.c1 * b.rho2.sqrt() + k.c2) / (r * r));
    log_prefactor(a, u) * (1.0 / t + k.c2 * b.rho1 + 4.0 * b.rho2 + 2.0 * b.rho3 + cube)
}

/// Same as [`backward_gradient`] with `ρ₃ + √ρ₃` in place of `2ρ₃`.
pub fn backward_gradient_variant(
    t: f64,
    b: &CurvatureBounds<f64>,
    radius: Option<f64>,
    k: &Constants,
    a: f64,
    u: f64,
) -> f64 {
    let base = backward_gradient(t, b, radius, k, a, u);
    base + log_prefactor(a, u) * (b.rho3.sqrt() - b.rho3)
}

/// Forward flow, `Scal ≥ −ρ₁`, `‖∇Scal‖ ≤ ρ₃`:
/// `(1 + ln(A/u))² (1/t + c₂ρ₁ + 2ρ₃ + c₂/ρ²)`.
pub fn forward_gradient(t: f64, rho1: f64, rho3: f64, radius: Option<f64>, k: &Constants, a: f64, u: f64) -> f64 {
    log_prefactor(a, u) * (1.0 / t + k.c2 * rho1 + 2.0 * rho3 + k.c2 * inv_sq(radius))
}

/// Local space-time bound under `−ρ₁g ≤ Ric ≤ ρ₂g`, `α > 1`:
/// `αnp/(4t) + cα²(α²p/(ρ²(α−1)) + 1/t + ρ₁+ρ₂) + α²npρ₁/(2(α−1)) + (αn/2)(ρ₁+ρ₂)√(pq)`.
#[allow(clippy::too_many_arguments)]
pub fn local_harnack(
    t: f64,
    b: &CurvatureBounds<f64>,
    radius: Option<f64>,
    alpha: f64,
    p: f64,
    q: f64,
    c: f64,
    n: usize,
) -> f64 {
    let n = n as f64;
    let s = b.rho1 + b.rho2;
    let a2 = alpha * alpha;
    alpha * n * p / (4.0 * t)
        + c * a2 * (a2 * p * inv_sq(radius) / (alpha - 1.0) + 1.0 / t + s)
        + a2 * n * p * b.rho1 / (2.0 * (alpha - 1.0))
        + alpha * n / 2.0 * s * (p * q).sqrt()
}

/// Global bound under `−ρ₁g ≤ Ric ≤ ρ₂g`, `α > 1`:
/// `αnp/(4t) + α²npρ₁/(2(α−1)) + (αn/2)(ρ₁+ρ₂)√(pq)`.
pub fn global_harnack(t: f64, rho1: f64, rho2: f64, alpha: f64, p: f64, q: f64, n: usize) -> f64 {
    let n = n as f64;
    alpha * n * p / (4.0 * t)
        + alpha * alpha * n * p * rho1 / (2.0 * (alpha - 1.0))
        + alpha * n / 2.0 * (rho1 + rho2) * (p * q).sqrt()
}

/// Global bound under `0 ≤ Ric ≤ ρg`, `α ≥ 1`: `αnp/(4t) + (αn/2)ρ√(pq)`.
pub fn global_harnack_nonnegative(t: f64, rho: f64, alpha: f64, p: f64, q: f64, n: usize) -> f64 {
    let n = n as f64;
    alpha * n * p / (4.0 * t) + alpha * n / 2.0 * rho * (p * q).sqrt()
}

/// `n/(2t) + nρ`
pub fn li_yau(t: f64, rho: f64, n: usize) -> f64 {
    let n = n as f64;
    n / (2.0 * t) + n * rho
}

/// `C A (1 + ρ₁ T)` bounding `t ‖∇u‖²`.
pub fn gradient_bound(c: f64, a: f64, rho1: f64, t_final: f64) -> f64 {
    c * a * (1.0 + rho1 * t_final)
}

/// `αnp/(4t) + c(n) α² (ρ₁ + ρ₂)` bounding `‖∇u‖²/u² − u_t/u`.
pub fn harnack_bound(t: f64, b: &CurvatureBounds<f64>, alpha: f64, p: f64, cn: f64, n: usize) -> f64 {
    alpha * n as f64 * p / (4.0 * t) + cn * alpha * alpha * (b.rho1 + b.rho2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k() -> Constants {
        Constants { c1: 6.0, c2: 100.0, c3: 100.0, c4: 200.0, cn: 400.0, n: 2 }
    }

    fn zero() -> CurvatureBounds<f64> {
        CurvatureBounds::default()
    }

    #[test]
    fn substitutions() {
        let k = k();
        assert_eq!(backward_gradient(0.5, &zero(), Some(2.0), &k, 1.0, 1.0), 2.0 + 100.0 / 4.0);
        assert_eq!(forward_gradient(0.5, 0.0, 0.0, Some(2.0), &k, 3.0, 3.0), 2.0 + 25.0);
        assert_eq!(forward_gradient(1.0, 0.0, 0.0, Some(4.0), &k, 1.0, 1.0) - 1.0, 25.0 / 4.0);
        assert_eq!(global_harnack(1.0, 0.0, 0.0, 2.0, 4.0, 4.0, 2), 4.0);
        assert_eq!(global_harnack_nonnegative(2.0, 0.5, 1.0, 2.0, 2.0, 2), 0.5 + 1.0);
        assert_eq!(li_yau(1.0, 0.0, 2), 1.0);
        assert_eq!(li_yau(0.5, 1.0, 2), 4.0);
        let c = 3.0;
        let t = 0.5;
        assert!((local_harnack(t, &zero(), Some(1.0), 2.0, 4.0, 4.0, c, 2) - (4.0 / t + c * 4.0 * (16.0 + 1.0 / t))).abs() < 1e-12);
        assert_eq!(gradient_bound(2.0, 3.0, 0.5, 2.0), 12.0);
    }

    #[test]
    fn variant_differs_only_through_rho3() {
        let b = CurvatureBounds { rho1: 0.3, rho2: 0.2, rho3: 0.25 };
        let k = k();
        let d = backward_gradient_variant(0.3, &b, Some(1.0), &k, 2.0, 1.0) - backward_gradient(0.3, &b, Some(1.0), &k, 2.0, 1.0);
        assert!((d - log_prefactor(2.0, 1.0) * (0.5 - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn equal_p_q_collapses_the_root() {
        let (alpha, p, rho2) = (2.0, 4.0, 0.6);
        let d = global_harnack(1.0, 0.0, rho2, alpha, p, p, 2) - global_harnack(1.0, 0.0, 0.0, alpha, p, p, 2);
        assert!((d - alpha * 2.0 / 2.0 * rho2 * p).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn bounds_are_monotone(
            t in 0.01f64..2.0, dt in 0.0f64..1.0,
            r1 in 0.0f64..3.0, r2 in 0.0f64..3.0, r3 in 0.0f64..3.0, dr in 0.0f64..1.0,
            alpha in 1.01f64..4.0, u in 0.1f64..1.0, radius in 0.2f64..5.0,
        ) {
            let k = k();
            let p = 2.0 * alpha;
            let q = 2.0 * alpha;
            let b = CurvatureBounds { rho1: r1, rho2: r2, rho3: r3 };
            let evals = |b: &CurvatureBounds<f64>, t: f64| [
                backward_gradient(t, b, Some(radius), &k, 1.0, u),
                forward_gradient(t, b.rho1, b.rho3, Some(radius), &k, 1.0, u),
                local_harnack(t, b, Some(radius), alpha, p, q, k.c4, 2),
                global_harnack(t, b.rho1, b.rho2, alpha, p, q, 2),
                global_harnack_nonnegative(t, b.rho2, alpha, p, q, 2),
                li_yau(t, b.rho2, 2),
                harnack_bound(t, b, alpha, p, k.cn, 2),
            ];
            let base = evals(&b, t);
            let later = evals(&b, t + dt);
            for (x, y) in base.iter().zip(&later) {
                prop_assert!(y <= x);
            }
            for i in 0..3 {
                let mut bigger = b;
                match i { 0 => bigger.rho1 += dr, 1 => bigger.rho2 += dr, _ => bigger.rho3 += dr }
                for (x, y) in base.iter().zip(&evals(&bigger, t)) {
                    prop_assert!(y >= x);
                }
            }
        }
    }
}
