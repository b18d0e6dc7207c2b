use nullflow::config::{
    BoundsSection, EstimateSection, FaultSection, FlowSection, HeatSection, InitialData, Layout, ScenarioSection,
};
use nullflow::{parse_config, RunConfig};
use nullflow_core::flow::{DtController, FlowDirection, HeatCoupling};
use nullflow_core::TheoremId;
use proptest::prelude::*;
use proptest::sample::{select, subsequence};

fn scenario() -> impl Strategy<Value = (ScenarioSection, InitialData)> {
    (
        select(vec!["round-sphere", "flat-torus", "torus-bump"]),
        0.1f64..5.0,
        0.5f64..20.0,
        -0.9f64..0.9,
        8usize..200,
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(name, radius, side, amplitude, resolution, axisym, random)| {
            let initial = match (name, random) {
                ("round-sphere", false) => InitialData::TwoPlusCosTheta,
                ("round-sphere", true) => InitialData::Constant,
                (_, false) => InitialData::TwoPlusSinX,
                (_, true) => InitialData::RandomSmooth,
            };
            let layout = if axisym { Layout::Axisymmetric } else { Layout::Spherical };
            (ScenarioSection { name: name.into(), radius, side, amplitude, resolution, layout }, initial)
        })
}

fn flow() -> impl Strategy<Value = FlowSection> {
    (
        select(vec![FlowDirection::Forward, FlowDirection::Backward, FlowDirection::Frozen]),
        0.01f64..10.0,
        1e-6f64..1e-2,
        any::<bool>(),
        proptest::option::of(1e-12f64..1e-3),
        select(vec![HeatCoupling::Heat, HeatCoupling::ConjugateHeat]),
        1usize..1000,
    )
        .prop_map(|(direction, t_end, dt, adaptive, eps_sing, coupling, sample_every)| FlowSection {
            direction,
            t_end,
            dt,
            controller: if adaptive { DtController::CflAdaptive } else { DtController::Fixed },
            eps_sing,
            coupling,
            sample_every,
        })
}

fn estimate() -> impl Strategy<Value = EstimateSection> {
    (
        1.0f64..4.0,
        1.05f64..10.0,
        proptest::option::of(0.1f64..3.0),
        proptest::option::of(0usize..50),
        proptest::option::of(1.0f64..10.0),
        proptest::option::of((0.0f64..2.0, 0.0f64..2.0, 0.0f64..2.0)),
    )
        .prop_map(|(alpha, stretch, radius, center_node, a, bounds)| {
            let p = alpha * (1.0 + stretch);
            // exact in the sense of 1/p + 1/q = 1/alpha to rounding
            let q = 1.0 / (1.0 / alpha - 1.0 / p);
            EstimateSection {
                alpha,
                p,
                q,
                radius,
                center_node,
                a,
                bounds: bounds.map(|(rho1, rho2, rho3)| BoundsSection { rho1, rho2, rho3 }),
            }
        })
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        any::<u64>(),
        subsequence(TheoremId::ALL.to_vec(), 0..=7),
        scenario(),
        flow(),
        0.1f64..5.0,
        estimate(),
        proptest::option::of((0usize..10, 0usize..100, 0.5f64..2.0)),
    )
        .prop_map(|(seed, theorems, (scenario, initial), flow, value, mut estimate, fault)| {
            if scenario.name == "round-sphere" && scenario.layout == Layout::Axisymmetric {
                estimate.center_node = None;
            }
            RunConfig {
                seed,
                out: None,
                theorems,
                scenario,
                flow,
                heat: HeatSection { initial, value },
                estimate,
                fault: fault.map(|(sample, node, factor)| FaultSection { sample, node, factor }),
            }
        })
        .prop_filter("valid", |c| c.validate().is_ok())
}

proptest! {
    #[test]
    fn rendered_configs_parse_back(cfg in config()) {
        let text = cfg.render();
        let (back, unknown) = parse_config(&text, true).unwrap();
        prop_assert!(unknown.is_empty());
        prop_assert_eq!(back, cfg);
    }
}
