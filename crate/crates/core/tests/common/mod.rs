#![allow(dead_code)]

use netobs_core::methods::{preset, InBandTelemetry, MeasurementMethod, CCM_101, GNMI_204, IOAM_3HOP};
use netobs_core::{validate_scenario, BitRate, Duration, FlowSpec, LinkSpec, MethodBinding, Scenario};
use proptest::prelude::*;

pub const PERIODS_MS: [f64; 3] = [3.33, 100.0, 1000.0];
pub const RATIOS: [u32; 3] = [1, 10, 100];

pub fn ccm(period: f64) -> MeasurementMethod {
    preset(CCM_101)
        .unwrap()
        .method
        .with_period(Duration::from_secs(period).unwrap())
}

pub fn gnmi(period: f64) -> MeasurementMethod {
    preset(GNMI_204)
        .unwrap()
        .method
        .with_period(Duration::from_secs(period).unwrap())
}

pub fn ioam(s: u32) -> MeasurementMethod {
    let t: InBandTelemetry = *preset(IOAM_3HOP).unwrap().method.in_band_params().unwrap();
    MeasurementMethod::InBand(t.with_sampling_ratio(s).unwrap())
}

pub fn flow(mbps: f64, octets: u64) -> FlowSpec {
    FlowSpec::new("f0", BitRate::from_mbps(mbps).unwrap(), octets * 8).unwrap()
}

pub fn single(flow: &FlowSpec, link: LinkSpec, method: MeasurementMethod) -> Scenario {
    validate_scenario(vec![flow.clone()], link, vec![MethodBinding::new("m", method, "f0")]).unwrap()
}

/// One flow with one method, as drawn by the randomized suites.
#[derive(Debug, Clone)]
pub struct Case {
    pub scenario: Scenario,
    pub duration: Duration,
}

/// Rates 0.1–10 Mbps, capacities 0.5–20 Mbps, every method class, both link modes.
pub fn arb_case() -> impl Strategy<Value = Case> {
    (
        0.1f64..10.0,
        0.5f64..20.0,
        any::<bool>(),
        256u64..=1500,
        0usize..3,
        0usize..3,
    )
        .prop_map(|(rate, cap, over, octets, class, knob)| {
            let f = flow(rate, octets);
            let method = match class {
                0 => ccm(PERIODS_MS[knob] / 1e3),
                1 => gnmi(PERIODS_MS[knob] / 1e3),
                _ => ioam(RATIOS[knob]),
            };
            let tau = method.effective_period(&f).secs();
            let duration = Duration::from_secs((10.0 * tau).max(10.0)).unwrap();
            let link = LinkSpec::new(BitRate::from_mbps(cap).unwrap(), over).unwrap();
            Case {
                scenario: single(&f, link, method),
                duration,
            }
        })
}

/// One maximum packet over the horizon.
pub fn quantum(scenario: &Scenario, duration: Duration) -> f64 {
    scenario.max_packet_bits() as f64 / duration.secs()
}
