mod common;

use common::*;
use netobs_core::analysis::{
    fluid_impact, hyperbola_reference, impact_vs_uncertainty_sweep, linear_fit, scaling_sweep, EvalMode, FluidPolicy,
    SweepGrid, SweepOptions,
};
use netobs_core::sim::{measure_impact, SimOptions};
use netobs_core::{BitRate, Duration, LinkSpec};

fn secs(s: f64) -> Duration {
    Duration::from_secs(s).unwrap()
}

fn periods() -> SweepGrid {
    SweepGrid::Periods([0.00333, 0.1, 1.0, 10.0].iter().map(|s| secs(*s)).collect())
}

fn wide_link() -> LinkSpec {
    LinkSpec::overprovisioned(BitRate::from_mbps(10.0).unwrap()).unwrap()
}

#[test]
fn sweep_points_lie_on_or_above_hyperbola() {
    let f = flow(1.0, 360);
    let r = impact_vs_uncertainty_sweep(
        "ccm",
        ccm(1.0),
        &f,
        wide_link(),
        &periods(),
        secs(100.0),
        0,
        &SweepOptions::default(),
    )
    .unwrap();
    let dm: Vec<f64> = r.points.iter().map(|p| p.record.delta_m.value()).collect();
    let curve = hyperbola_reference(ccm(1.0).observer_factor(), 1.0, &dm).unwrap();
    for (p, (_, bound)) in r.points.iter().zip(curve) {
        assert!(
            p.record.delta_p.value.bps() >= bound - p.quantum,
            "{} < {}",
            p.record.delta_p.value.bps(),
            bound
        );
        assert!((p.record.ratio() - 1.0).abs() <= 0.01);
    }
    assert!(r.all_hold());
}

#[test]
fn in_band_ratio_sweep_is_an_equality() {
    let f = flow(1.0, 360);
    let grid = SweepGrid::SamplingRatios(vec![1, 10, 100]);
    let r = impact_vs_uncertainty_sweep(
        "ioam",
        ioam(1),
        &f,
        wide_link(),
        &grid,
        secs(100.0),
        0,
        &SweepOptions::default(),
    )
    .unwrap();
    let expected = [222_222.2, 22_222.2, 2_222.2];
    for (p, e) in r.points.iter().zip(expected) {
        assert!((p.record.delta_p.value.bps() - e).abs() <= p.quantum + 0.1);
        assert!((p.record.ratio() - 1.0).abs() <= 0.01);
    }
}

#[test]
fn packet_and_fluid_modes_agree_per_flow() {
    let f = flow(1.0, 360);
    let counts = [1, 3, 10, 30];
    let run = |fluid| {
        let opts = SweepOptions {
            fluid,
            ..SweepOptions::default()
        };
        scaling_sweep("ccm", ccm(0.1), &counts, &f, secs(20.0), 0, &opts).unwrap()
    };
    let packet = run(FluidPolicy::Never);
    let fluid = run(FluidPolicy::Always);
    for (p, q) in packet.points.iter().zip(&fluid.points) {
        assert_eq!((p.mode, q.mode), (EvalMode::Packet, EvalMode::Fluid));
        let diff = (p.record.delta_p.value.bps() - q.record.delta_p.value.bps()).abs();
        assert!(diff <= p.quantum, "N={} diff {diff} > {}", p.flows, p.quantum);
    }
}

#[test]
fn aggregate_impact_is_affine_in_flow_count() {
    let f = flow(1.0, 360);
    for tau in [0.00333, 0.1, 1.0, 10.0] {
        let m = ccm(tau);
        let r = scaling_sweep(
            "ccm",
            m,
            &[1, 10, 100, 1000],
            &f,
            secs(100.0),
            0,
            &SweepOptions::default(),
        )
        .unwrap();
        let pts: Vec<(f64, f64)> = r
            .points
            .iter()
            .map(|p| (p.value, p.record.delta_p.value.bps()))
            .collect();
        let fit = linear_fit(&pts).unwrap();
        let slope = 808.0 / tau;
        assert!((fit.slope / slope - 1.0).abs() <= 0.01, "tau={tau} slope {}", fit.slope);
        assert!(
            fit.intercept.abs() <= r.points[0].quantum,
            "tau={tau} intercept {}",
            fit.intercept
        );
    }
}

#[test]
fn twin_impact_matches_fluid_impact_in_both_link_modes() {
    let f = flow(1.0, 360);
    for link in [
        LinkSpec::saturable(BitRate::from_mbps(1.0).unwrap()).unwrap(),
        LinkSpec::overprovisioned(BitRate::from_mbps(1.0).unwrap()).unwrap(),
    ] {
        for s in [1, 10, 100] {
            let sc = single(&f, link, ioam(s));
            let twin = measure_impact(&sc, secs(100.0), 0, &SimOptions::default()).unwrap();
            let fl = fluid_impact(&sc);
            assert_eq!(
                twin.impact.kind,
                fl.kind,
                "s={s} overprovisioned={}",
                link.is_overprovisioned()
            );
            assert!((twin.impact.value.bps() - fl.value.bps()).abs() <= quantum(&sc, secs(100.0)));
        }
    }
}
