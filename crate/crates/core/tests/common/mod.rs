#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use nullflow_core::metric::{build_scenario_metric, ScenarioParams, SphereLayout};
use nullflow_core::{Field, Metric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SCENARIOS: [&str; 3] = ["round-sphere", "flat-torus", "torus-bump"];

pub fn scenario(name: &str, n: usize) -> Metric {
    build_scenario_metric(name, &ScenarioParams { resolution: n, ..Default::default() }).unwrap()
}

pub fn sphere(radius: f64, n: usize, layout: SphereLayout) -> Metric {
    build_scenario_metric("round-sphere", &ScenarioParams { radius, resolution: n, layout, ..Default::default() }).unwrap()
}

/// Colatitudes at least π/8 away from both poles.
pub fn in_band(theta: f64) -> bool {
    (theta - FRAC_PI_2).abs() <= 3.0 * PI / 8.0
}

/// Max of `|f|` over the nodes that count for error norms: the polar band
/// on sphere grids, everything on tori.
pub fn error_norm(metric: &Metric, values: impl IntoIterator<Item = f64>) -> f64 {
    let polar = metric.grid().is_polar_chart();
    values
        .into_iter()
        .enumerate()
        .filter(|&(node, _)| !polar || in_band(metric.grid().coord(node)[0]))
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

/// Ricci tensor of `w (dx² + dy²)` with `w = 1 + a sin(kx) sin(ky)`: in two
/// dimensions `Ric = K g` with `K = −Δ₀(½ ln w) / w`, so `Ric = −Δ₀(½ ln w) δ`.
pub fn bump_ricci(a: f64, k: f64, x: f64, y: f64) -> f64 {
    let (sx, cx) = (k * x).sin_cos();
    let (sy, cy) = (k * y).sin_cos();
    let w = 1.0 + a * sx * sy;
    let wx = a * k * cx * sy;
    let wy = a * k * sx * cy;
    let lap_w = -2.0 * k * k * a * sx * sy;
    let lap_half_log = 0.5 * (lap_w * w - (wx * wx + wy * wy)) / (w * w);
    -lap_half_log
}

/// Observed orders `log2(e_k / e_{k+1})` for errors on grids refined by two.
pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// A smooth function drawn from `seed`: a cubic polynomial in the embedding
/// coordinates on the sphere, a low trigonometric polynomial on tori.
pub fn random_smooth(metric: &Metric, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if metric.grid().is_polar_chart() {
        let coef: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Field::from_fn(metric.shared_grid(), |[th, ph]| {
            let (x, y, z) = (th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
            let mut k = 0;
            let mut s = 0.0;
            for i in 0..4 {
                for j in 0..4 - i {
                    for l in 0..4 - i - j {
                        s += coef[k] * x.powi(i) * y.powi(j) * z.powi(l);
                        k += 1;
                    }
                }
            }
            s
        })
        .unwrap()
    } else {
        let modes: Vec<(f64, f64, f64, f64)> = (0..5)
            .map(|_| {
                (
                    rng.gen_range(-2i32..=2) as f64,
                    rng.gen_range(-2i32..=2) as f64,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        Field::from_fn(metric.shared_grid(), |[x, y]| {
            modes.iter().map(|&(kx, ky, a, phase)| a * (kx * x + ky * y + phase).sin()).sum()
        })
        .unwrap()
    }
}
