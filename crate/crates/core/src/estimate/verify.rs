use serde::{Deserialize, Serialize};

use super::cutoff::{Constants, CutoffCertificate};
use super::quantities::{log_density, sample_terms, time_derivative};
use super::rhs;
use super::{EstimateError, EstimateParams, Result, TheoremId, A_SLACK};
use crate::flow::{CurvatureBounds, FlowDirection, FlowTrajectory, HeatCoupling};
use crate::metric::{geodesic_distance, DiffOperators, DistanceCenter, DistanceOptions};
use crate::scalar::{lit, to_f64, Real};

/// Largest `LHS − RHS` still counted as holding.
pub const VIOLATION_TOL: f64 = 1e-6;
/// Relative slack when comparing measured curvature against supplied bounds.
const HYPOTHESIS_TOL: f64 = 1e-9;
/// Violating points listed in a report, worst first.
const MAX_LISTED: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateStatus {
    Holds,
    Violated,
    HypothesisViolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsSource {
    Supplied,
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub satisfied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Curvature extremes over the admissible set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredCurvature {
    pub scal_min: f64,
    pub ricci_min: f64,
    pub ricci_max: f64,
    pub scal_gradient_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub t: f64,
    pub node: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl PointRecord {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Comparison against a second form of the same bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternate {
    pub label: String,
    pub min_margin: f64,
    pub violation_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub theorem: TheoremId,
    pub status: EstimateStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    pub constants: Constants,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub radius: Option<f64>,
    pub center: String,
    pub a: f64,
    pub bounds: CurvatureBounds<f64>,
    pub bounds_source: BoundsSource,
    pub measured: MeasuredCurvature,
    pub hypotheses: Vec<HypothesisCheck>,
    pub admissible_points: usize,
    pub max_lhs: f64,
    pub min_rhs: f64,
    pub min_margin: f64,
    /// Largest `LHS − RHS`; negative when every point holds strictly.
    pub max_violation: f64,
    pub worst: PointRecord,
    /// Margin at the 0, 5, 50, 95 and 100 percent ranks.
    pub margin_quantiles: [f64; 5],
    pub violation_count: usize,
    pub violations: Vec<PointRecord>,
    /// `(t, min margin, max LHS)` per evaluated sample.
    pub margin_by_time: Vec<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternate: Option<Alternate>,
    /// Every admissible point in sample order.
    #[serde(skip)]
    pub points: Vec<PointRecord>,
}

impl EstimateReport {
    pub fn failed_hypotheses(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.hypotheses.iter().filter(|h| !h.satisfied)
    }
}

fn center_label(c: DistanceCenter) -> String {
    match c {
        DistanceCenter::Node(n) => format!("node:{n}"),
        DistanceCenter::NorthPole => "north-pole".into(),
    }
}

fn within(measured: f64, bound: f64, lower: bool) -> bool {
    let slack = HYPOTHESIS_TOL * (1.0 + bound.abs());
    if lower {
        measured >= bound - slack
    } else {
        measured <= bound + slack
    }
}

fn numeric(name: &str, bound: f64, measured: f64, lower: bool) -> HypothesisCheck {
    HypothesisCheck {
        name: name.into(),
        satisfied: within(measured, bound, lower),
        bound: Some(bound),
        measured: Some(measured),
        detail: None,
    }
}

fn categorical(name: &str, satisfied: bool, detail: String) -> HypothesisCheck {
    HypothesisCheck { name: name.into(), satisfied, bound: None, measured: None, detail: Some(detail) }
}

/// Evaluates one estimate at every admissible `(x, t)` with `t > 0`.
///
/// Admissible nodes lie in the cube `d(x, centre, t) ≤ 2ρ` and off the
/// cut-locus mask; without a radius every node is admissible. Curvature
/// hypotheses are checked on the same set, and a failed hypothesis gates the
/// status regardless of the margins.
pub fn verify<T: Real>(
    traj: &FlowTrajectory<T>,
    theorem: TheoremId,
    params: &EstimateParams<T>,
    cert: &CutoffCertificate,
) -> Result<EstimateReport> {
    params.validate(theorem)?;
    let heat = traj.heat.as_ref().ok_or(EstimateError::MissingHeat)?;
    if traj.len() < 2 {
        return Err(EstimateError::TooFewSamples { needed: 2, got: traj.len() });
    }
    let n = traj.metrics[0].dimension();
    let constants = cert.constants(n);
    let sup_u = heat.iter().flat_map(|u| u.values()).fold(T::neg_infinity(), |m, &v| m.max(v));
    let a_t = params.a.unwrap_or(sup_u * (T::one() + lit(A_SLACK)));
    for u in heat {
        log_density(u, a_t)?;
    }
    let a = to_f64(a_t);
    let values: Vec<&[T]> = heat.iter().map(|u| u.values()).collect();
    let rates = time_derivative(&traj.times, &values)?;
    let radius = params.radius.map(to_f64);
    let opts = DistanceOptions::default();

    struct Sample {
        k: usize,
        nodes: Vec<usize>,
        grad_log_sq: Vec<f64>,
        log_rate: Vec<f64>,
    }
    let mut samples = Vec::new();
    let mut measured =
        MeasuredCurvature { scal_min: f64::INFINITY, ricci_min: f64::INFINITY, ricci_max: f64::NEG_INFINITY, scal_gradient_max: 0.0 };
    let mut cached_mask: Option<(usize, Vec<bool>)> = None;
    for k in 0..traj.len() {
        if !(traj.times[k] > T::zero()) {
            continue;
        }
        let metric = &traj.metrics[k];
        let mask = match params.radius {
            None => vec![true; metric.grid().len()],
            Some(r) => match &cached_mask {
                Some((j, m)) if traj.metrics[*j] == *metric => m.clone(),
                _ => {
                    let d = geodesic_distance(metric, params.center, &opts)?;
                    let two_r = r + r;
                    let m: Vec<bool> =
                        d.valid.iter().zip(d.distance.values()).map(|(&ok, &dist)| ok && dist <= two_r).collect();
                    cached_mask = Some((k, m.clone()));
                    m
                }
            },
        };
        let nodes: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        if nodes.is_empty() {
            continue;
        }
        let pack = &traj.curvature[k];
        let grad_scal = if theorem.uses_scalar_bounds() {
            Some(DiffOperators::new(metric)?.grad_norm_sq(&pack.scalar))
        } else {
            None
        };
        for &i in &nodes {
            measured.scal_min = measured.scal_min.min(to_f64(pack.scalar[i]));
            if let Some((lo, hi)) = pack.ricci[i].relative_eigenvalues(&metric.at(i)) {
                measured.ricci_min = measured.ricci_min.min(to_f64(lo));
                measured.ricci_max = measured.ricci_max.max(to_f64(hi));
            }
            if let Some(g) = &grad_scal {
                measured.scal_gradient_max = measured.scal_gradient_max.max(to_f64(g[i].sqrt()));
            }
        }
        let terms = sample_terms(metric, values[k], &rates[k])?;
        samples.push(Sample {
            k,
            grad_log_sq: nodes.iter().map(|&i| to_f64(terms.grad_log_sq[i])).collect(),
            log_rate: nodes.iter().map(|&i| to_f64(terms.log_rate[i])).collect(),
            nodes,
        });
    }
    if samples.is_empty() {
        return Err(EstimateError::EmptyAdmissibleSet);
    }

    let scalar_conv = theorem.uses_scalar_bounds();
    let (bounds, bounds_source) = match params.bounds {
        Some(b) => (CurvatureBounds { rho1: to_f64(b.rho1), rho2: to_f64(b.rho2), rho3: to_f64(b.rho3) }, BoundsSource::Supplied),
        None if scalar_conv => (
            CurvatureBounds {
                rho1: (-measured.scal_min).max(0.0),
                rho2: (-measured.ricci_min).max(0.0),
                rho3: measured.scal_gradient_max,
            },
            BoundsSource::Measured,
        ),
        None if theorem == TheoremId::LiYau => {
            (CurvatureBounds { rho1: 0.0, rho2: measured.ricci_max.max(0.0), rho3: 0.0 }, BoundsSource::Measured)
        }
        None => (
            CurvatureBounds { rho1: (-measured.ricci_min).max(0.0), rho2: measured.ricci_max.max(0.0), rho3: 0.0 },
            BoundsSource::Measured,
        ),
    };

    let mut hypotheses = Vec::new();
    let nonnegative_branch = theorem == TheoremId::LiYau || (theorem == TheoremId::GlobalHarnack && bounds.rho1 == 0.0);
    match theorem {
        TheoremId::BackwardGradient | TheoremId::ForwardGradient => {
            hypotheses.push(numeric("scal-lower", -bounds.rho1, measured.scal_min, true));
            if theorem == TheoremId::BackwardGradient {
                hypotheses.push(numeric("ricci-lower", -bounds.rho2, measured.ricci_min, true));
            }
            hypotheses.push(numeric("scal-gradient", bounds.rho3, measured.scal_gradient_max, false));
        }
        _ if nonnegative_branch => {
            hypotheses.push(numeric("ricci-nonnegative", 0.0, measured.ricci_min, true));
            hypotheses.push(numeric("ricci-upper", bounds.rho2, measured.ricci_max, false));
        }
        _ => {
            hypotheses.push(numeric("ricci-lower", -bounds.rho1, measured.ricci_min, true));
            hypotheses.push(numeric("ricci-upper", bounds.rho2, measured.ricci_max, false));
        }
    }
    let direction_ok = match theorem {
        TheoremId::BackwardGradient => matches!(traj.direction, FlowDirection::Backward | FlowDirection::Frozen),
        _ => matches!(traj.direction, FlowDirection::Forward | FlowDirection::Frozen),
    };
    hypotheses.push(categorical("flow-direction", direction_ok, format!("{:?}", traj.direction).to_lowercase()));
    let coupling_ok = match theorem {
        TheoremId::BackwardGradient => traj.coupling == HeatCoupling::ConjugateHeat,
        TheoremId::ForwardGradient => traj.coupling != HeatCoupling::None,
        _ => traj.coupling == HeatCoupling::Heat,
    };
    let coupling = match traj.coupling {
        HeatCoupling::None => "none",
        HeatCoupling::Heat => "heat",
        HeatCoupling::ConjugateHeat => "conjugate-heat",
    };
    hypotheses.push(categorical("heat-coupling", coupling_ok, coupling.into()));

    let (alpha, p, q) = (to_f64(params.alpha), to_f64(params.p), to_f64(params.q));
    let t_final = to_f64(traj.final_time());
    let branch = match theorem {
        TheoremId::GlobalHarnack if nonnegative_branch => Some("nonnegative-ricci".to_string()),
        TheoremId::GlobalHarnack => Some("two-sided".to_string()),
        _ => None,
    };
    let evaluate = |t: f64, u: f64, g: f64, r: f64| -> (f64, f64) {
        match theorem {
            TheoremId::BackwardGradient => (g, rhs::backward_gradient(t, &bounds, radius, &constants, a, u)),
            TheoremId::ForwardGradient => {
                (g, rhs::forward_gradient(t, bounds.rho1, bounds.rho3, radius, &constants, a, u))
            }
            TheoremId::LocalHarnack => {
                (g - alpha * r, rhs::local_harnack(t, &bounds, radius, alpha, p, q, constants.c4, n))
            }
            TheoremId::GlobalHarnack if nonnegative_branch => {
                (g - alpha * r, rhs::global_harnack_nonnegative(t, bounds.rho2, alpha, p, q, n))
            }
            TheoremId::GlobalHarnack => (g - alpha * r, rhs::global_harnack(t, bounds.rho1, bounds.rho2, alpha, p, q, n)),
            TheoremId::LiYau => (g - r, rhs::li_yau(t, bounds.rho2, n)),
            TheoremId::GradientBound => (t * g * u * u, rhs::gradient_bound(constants.cn, a, bounds.rho1, t_final)),
            TheoremId::HarnackBound => (g - r, rhs::harnack_bound(t, &bounds, alpha, p, constants.cn, n)),
        }
    };

    let mut points = Vec::new();
    let mut margin_by_time = Vec::new();
    let mut alt_min = f64::INFINITY;
    let mut alt_count = 0usize;
    for s in &samples {
        let t = to_f64(traj.times[s.k]);
        let mut min_margin = f64::INFINITY;
        let mut max_lhs = f64::NEG_INFINITY;
        for (j, &node) in s.nodes.iter().enumerate() {
            let u = to_f64(values[s.k][node]);
            let (lhs, rhs_v) = evaluate(t, u, s.grad_log_sq[j], s.log_rate[j]);
            if !lhs.is_finite() || !rhs_v.is_finite() {
                return Err(EstimateError::NonFinite { what: if lhs.is_finite() { "rhs" } else { "lhs" }, time: t, node });
            }
            min_margin = min_margin.min(rhs_v - lhs);
            max_lhs = max_lhs.max(lhs);
            if theorem == TheoremId::BackwardGradient {
                let alt = rhs::backward_gradient_variant(t, &bounds, radius, &constants, a, u) - lhs;
                alt_min = alt_min.min(alt);
                alt_count += usize::from(-alt > VIOLATION_TOL);
            }
            points.push(PointRecord { t, node, lhs, rhs: rhs_v });
        }
        margin_by_time.push([t, min_margin, max_lhs]);
    }

    let worst = *points
        .iter()
        .min_by(|x, y| x.margin().total_cmp(&y.margin()))
        .expect("admissible set is nonempty");
    let mut margins: Vec<f64> = points.iter().map(PointRecord::margin).collect();
    margins.sort_by(f64::total_cmp);
    let rank = |f: f64| margins[((margins.len() - 1) as f64 * f).round() as usize];
    let mut violations: Vec<PointRecord> = points.iter().copied().filter(|p| -p.margin() > VIOLATION_TOL).collect();
    let violation_count = violations.len();
    violations.sort_by(|x, y| x.margin().total_cmp(&y.margin()));
    violations.truncate(MAX_LISTED);

    let status = if hypotheses.iter().any(|h| !h.satisfied) {
        EstimateStatus::HypothesisViolated
    } else if violation_count > 0 {
        EstimateStatus::Violated
    } else {
        EstimateStatus::Holds
    };
    Ok(EstimateReport {
        theorem,
        status,
        branch,
        constants,
        alpha,
        p,
        q,
        radius,
        center: center_label(params.center),
        a,
        bounds,
        bounds_source,
        measured,
        hypotheses,
        admissible_points: points.len(),
        max_lhs: points.iter().map(|p| p.lhs).fold(f64::NEG_INFINITY, f64::max),
        min_rhs: points.iter().map(|p| p.rhs).fold(f64::INFINITY, f64::min),
        min_margin: worst.margin(),
        max_violation: -worst.margin(),
        worst,
        margin_quantiles: [rank(0.0), rank(0.05), rank(0.5), rank(0.95), rank(1.0)],
        violation_count,
        violations,
        margin_by_time,
        alternate: (theorem == TheoremId::BackwardGradient).then(|| Alternate {
            label: "rho3 + sqrt(rho3)".into(),
            min_margin: alt_min,
            violation_count: alt_count,
        }),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::build_cutoff;
    use crate::flow::{solve_heat, FlowConfig};
    use crate::metric::{build_scenario_metric, LeafMetric, ScalarField, ScenarioParams};

    fn torus(n: usize) -> LeafMetric<f64> {
        build_scenario_metric("flat-torus", &ScenarioParams { resolution: n, ..Default::default() }).unwrap()
    }

    fn cert() -> CutoffCertificate {
        CutoffCertificate { c1: 6.1, c2: 100.0, samples: 0, safety_factor: 1.05 }
    }

    fn exact_mode(n: usize, steps: usize) -> FlowTrajectory<f64> {
        let m = torus(n);
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
        let heat = times
            .iter()
            .map(|t| ScalarField::from_fn(m.shared_grid(), |[x, _]| 2.0 + (-t).exp() * x.sin()).unwrap())
            .collect();
        FlowTrajectory::from_samples(FlowDirection::Frozen, times.clone(), vec![m; times.len()], Some(heat)).unwrap()
    }

    #[test]
    fn classical_li_yau_holds_on_the_flat_torus() {
        let traj = exact_mode(32, 40);
        let r = verify(&traj, TheoremId::LiYau, &EstimateParams::li_yau(), &cert()).unwrap();
        assert_eq!(r.status, EstimateStatus::Holds);
        assert_eq!(r.bounds.rho2, 0.0);
        assert!(r.min_margin > 0.0);
        assert_eq!(r.admissible_points, 40 * 32 * 32);
    }

    #[test]
    fn constant_data_has_zero_lhs() {
        let m = torus(8);
        let u0 = ScalarField::constant(m.shared_grid(), 2.0).unwrap();
        let cfg = FlowConfig { t_end: 0.2, dt: 0.05, ..Default::default() };
        let traj = solve_heat(&m, &cfg, &u0).unwrap();
        let r = verify(&traj, TheoremId::LiYau, &EstimateParams::li_yau(), &cert()).unwrap();
        for p in &r.points {
            assert_eq!(p.lhs, 0.0);
            assert_eq!(p.margin(), 2.0 / (2.0 * p.t));
        }
    }

    #[test]
    fn corrupted_node_is_reported() {
        let mut traj = exact_mode(16, 40);
        let node = traj.metrics[0].grid().index(5, 7);
        let k = 20;
        let heat = traj.heat.as_mut().unwrap();
        let mut v = heat[k].values().to_vec();
        v[node] *= 1.1;
        heat[k] = ScalarField::new(heat[k].shared_grid(), v).unwrap();
        let r = verify(&traj, TheoremId::LiYau, &EstimateParams::li_yau(), &cert()).unwrap();
        assert_eq!(r.status, EstimateStatus::Violated);
        assert!(r.violations.iter().any(|p| p.node == node));
        assert_eq!(r.worst.node, node);
    }

    #[test]
    fn supplied_bounds_below_the_measured_curvature_gate_the_status() {
        let p = ScenarioParams { resolution: 16, layout: crate::metric::SphereLayout::Axisymmetric, ..Default::default() };
        let m = build_scenario_metric::<f64>("round-sphere", &p).unwrap();
        let u0 = ScalarField::from_fn(m.shared_grid(), |[th, _]| 2.0 + th.cos()).unwrap();
        let cfg = FlowConfig { direction: FlowDirection::Frozen, t_end: 0.1, dt: 1e-3, sample_every: 10, ..Default::default() };
        let traj = solve_heat(&m, &cfg, &u0).unwrap();
        let params = EstimateParams { bounds: Some(CurvatureBounds { rho1: 0.0, rho2: 0.5, rho3: 0.0 }), ..EstimateParams::li_yau() };
        let r = verify(&traj, TheoremId::LiYau, &params, &cert()).unwrap();
        assert_eq!(r.status, EstimateStatus::HypothesisViolated);
        let failed: Vec<_> = r.failed_hypotheses().map(|h| h.name.as_str()).collect();
        assert_eq!(failed, ["ricci-upper"]);
        assert!((r.measured.ricci_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cube_restricts_the_admissible_set() {
        let traj = exact_mode(16, 4);
        let params = EstimateParams { radius: Some(0.5), center: DistanceCenter::Node(0), ..EstimateParams::li_yau() };
        let r = verify(&traj, TheoremId::ForwardGradient, &params, &build_cutoff()).unwrap();
        // nodes within distance 1 of node 0 on a 16×16 grid of spacing 2π/16
        let per_sample = r.admissible_points / 4;
        assert!(per_sample > 1 && per_sample < 16 * 16);
        assert_eq!(r.constants.c3, r.constants.c1.max(r.constants.c2));
    }
}
