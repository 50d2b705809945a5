//! Deterministic packet-level simulation of constant-bit-rate flows and their
//! measurement overhead over one link.
//!
//! Every source is strictly periodic: flow packets every `L / R`, probe and
//! export packets every configured period, all starting at t = 0. The k-th
//! emission of a source happens at `k × spacing` (computed, not accumulated).
//! In-band telemetry enlarges every s-th packet of its flow, starting with the
//! first. Admission is a token bucket with tail drop, or unconditional on an
//! overprovisioned link.

mod detect;
mod event;
mod link;
mod oracle;
mod report;
mod twin;

pub use detect::{detection_trials, run_detection, DetectionOptions, DetectionReport};
pub use event::{Event, EventKind, EventQueue};
pub use link::TokenBucket;
pub use oracle::{fluid_oracle, FluidRates};
pub use report::{Counters, SimReport};
pub use twin::{impact_from_deltas, measure_impact, RateDeltas, TwinImpact};

use tracing::warn;

use crate::error::{Error, Result};
use crate::methods::MeasurementMethod;
use crate::scenario::{FlowSpec, Scenario};
use crate::units::Duration;

/// Link admission parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Token bucket depth expressed as time at link capacity.
    pub accounting_window: Duration,
    /// Explicit bucket depth in bits; overrides `accounting_window`.
    pub burst_bits: Option<u64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            accounting_window: Duration::from_secs(1.0).expect("positive"),
            burst_bits: None,
        }
    }
}

#[derive(Debug, Clone)]
struct InBandTap {
    method: usize,
    ratio: u64,
    bits: u64,
}

#[derive(Debug, Clone)]
enum SourceKind {
    Data {
        flow: usize,
        bits: u64,
        taps: Vec<InBandTap>,
    },
    Periodic {
        method: usize,
        bits: u64,
        export: bool,
    },
}

#[derive(Debug, Clone)]
struct Source {
    kind: SourceKind,
    spacing: f64,
    count: u64,
}

impl Source {
    fn time(&self, index: u64) -> f64 {
        index as f64 * self.spacing
    }

    fn event_kind(&self) -> EventKind {
        match self.kind {
            SourceKind::Data { flow, .. } => EventKind::DataPacket { flow },
            SourceKind::Periodic {
                method, export: false, ..
            } => EventKind::ProbePacket { method },
            SourceKind::Periodic {
                method, export: true, ..
            } => EventKind::ExportPacket { method },
        }
    }

    /// Largest packet this source emits.
    fn max_bits(&self) -> u64 {
        match &self.kind {
            SourceKind::Data { bits, taps, .. } => bits + taps.iter().map(|t| t.bits).sum::<u64>(),
            SourceKind::Periodic { bits, .. } => *bits,
        }
    }

    fn size(&self, index: u64) -> u64 {
        match &self.kind {
            SourceKind::Data { bits, taps, .. } => {
                bits + taps
                    .iter()
                    .filter(|t| index % t.ratio == 0)
                    .map(|t| t.bits)
                    .sum::<u64>()
            }
            SourceKind::Periodic { bits, .. } => *bits,
        }
    }
}

/// Number of emissions `k ≥ 0` with `k × spacing < horizon`.
pub(crate) fn emissions_before(spacing: f64, horizon: f64) -> u64 {
    let mut n = (horizon / spacing).ceil().max(0.0) as u64;
    while n > 0 && (n - 1) as f64 * spacing >= horizon {
        n -= 1;
    }
    while (n as f64) * spacing < horizon {
        n += 1;
    }
    n
}

fn build_sources(scenario: &Scenario, horizon: f64) -> Vec<Source> {
    let methods = scenario.methods();
    let mut sources = Vec::with_capacity(scenario.flows().len() + methods.len());
    for (fi, flow) in scenario.flows().iter().enumerate() {
        let taps = scenario
            .methods_on(fi)
            .filter_map(|(mi, m)| {
                m.method.in_band_params().map(|t| InBandTap {
                    method: mi,
                    ratio: u64::from(t.sampling_ratio()),
                    bits: t.message().bits(),
                })
            })
            .collect();
        let spacing = flow.emission_interval().secs();
        sources.push(Source {
            kind: SourceKind::Data {
                flow: fi,
                bits: flow.packet_bits(),
                taps,
            },
            spacing,
            count: emissions_before(spacing, horizon),
        });
    }
    for (mi, m) in methods.iter().enumerate() {
        let (bits, period, export) = match m.method {
            MeasurementMethod::ActiveProbe { message, period } => (message.bits(), period, false),
            MeasurementMethod::PassiveExport { message, period } => (message.bits(), period, true),
            MeasurementMethod::InBand(_) => continue,
        };
        sources.push(Source {
            kind: SourceKind::Periodic {
                method: mi,
                bits,
                export,
            },
            spacing: period.secs(),
            count: emissions_before(period.secs(), horizon),
        });
    }
    sources
}

/// Packet events a run of `scenario` over `duration` would process.
pub fn estimated_events(scenario: &Scenario, duration: Duration) -> u64 {
    let horizon = duration.secs();
    let flows: u64 = scenario
        .flows()
        .iter()
        .map(|f| emissions_before(f.emission_interval().secs(), horizon))
        .sum();
    let periodic: u64 = scenario
        .methods()
        .iter()
        .filter_map(|m| m.method.period())
        .map(|p| emissions_before(p.secs(), horizon))
        .sum();
    flows.saturating_add(periodic)
}

/// Rejects horizons shorter than one measurement period and warns below ten.
pub(crate) fn check_horizon(scenario: &Scenario, duration: Duration) -> Result<()> {
    scenario
        .methods()
        .iter()
        .try_for_each(|m| check_method_horizon(&m.id.to_string(), &m.method, scenario.flow_of(m), duration))
}

pub(crate) fn check_horizon_for(method: &MeasurementMethod, flow: &FlowSpec, duration: Duration) -> Result<()> {
    check_method_horizon("sweep point", method, flow, duration)
}

fn check_method_horizon(label: &str, method: &MeasurementMethod, flow: &FlowSpec, duration: Duration) -> Result<()> {
    let period = method.effective_period(flow);
    if period.secs() > duration.secs() {
        return Err(Error::PeriodExceedsHorizon {
            what: format!("method `{label}`"),
            period: period.secs(),
            horizon: duration.secs(),
        });
    }
    if period.secs() * 10.0 > duration.secs() {
        warn!(
            method = label,
            period = period.secs(),
            horizon = duration.secs(),
            "horizon covers fewer than 10 measurement periods"
        );
    }
    Ok(())
}

struct Accounts {
    flows: Vec<Counters>,
    methods: Vec<Counters>,
    events: u64,
}

impl Accounts {
    fn new(scenario: &Scenario) -> Self {
        Accounts {
            flows: vec![Counters::default(); scenario.flows().len()],
            methods: vec![Counters::default(); scenario.methods().len()],
            events: 0,
        }
    }

    fn record(&mut self, source: &Source, index: u64, admitted: bool) {
        self.events += 1;
        match &source.kind {
            SourceKind::Data { flow, bits, taps } => {
                self.flows[*flow].record(*bits, admitted);
                for t in taps.iter().filter(|t| index % t.ratio == 0) {
                    self.methods[t.method].record(t.bits, admitted);
                }
            }
            SourceKind::Periodic { method, bits, .. } => self.methods[*method].record(*bits, admitted),
        }
    }

    fn into_report(self, scenario: &Scenario, duration: Duration, seed: u64) -> SimReport {
        let mut overhead = Counters::default();
        for c in &self.methods {
            overhead += *c;
        }
        SimReport {
            per_flow: scenario
                .flows()
                .iter()
                .map(|f| f.id().clone())
                .zip(self.flows)
                .collect(),
            per_method: scenario
                .methods()
                .iter()
                .map(|m| m.id.clone())
                .zip(self.methods)
                .collect(),
            overhead,
            duration,
            seed,
            events: self.events,
        }
    }
}

/// Runs `scenario` for `duration` seconds.
///
/// The result depends only on the arguments. Packet schedules are fixed, so
/// `seed` is carried into the report for provenance but does not alter a run.
pub fn run_sim(scenario: &Scenario, duration: Duration, seed: u64, options: &SimOptions) -> Result<SimReport> {
    check_horizon(scenario, duration)?;
    let horizon = duration.secs();
    let sources = build_sources(scenario, horizon);
    let mut acc = Accounts::new(scenario);

    if scenario.link().is_overprovisioned() {
        // Everything is admitted, so sources do not interact.
        for src in &sources {
            for k in 0..src.count {
                acc.record(src, k, true);
            }
        }
        return Ok(acc.into_report(scenario, duration, seed));
    }

    let capacity = scenario.link().capacity().bps();
    let initial: u64 = sources.iter().map(Source::max_bits).sum();
    let burst = match options.burst_bits {
        Some(b) => b as f64,
        None => (capacity * options.accounting_window.secs()).max(initial as f64),
    };
    let mut bucket = TokenBucket::new(capacity, burst, initial as f64);

    let mut queue = EventQueue::new();
    for (i, src) in sources.iter().enumerate() {
        if src.count > 0 {
            queue.push(0.0, src.event_kind(), src.size(0), i, 0);
        }
    }
    queue.push(horizon, EventKind::SimEnd, 0, usize::MAX, 0);

    while let Some(ev) = queue.pop() {
        if ev.kind == EventKind::SimEnd {
            break;
        }
        let src = &sources[ev.source];
        let admitted = bucket.admit(ev.time, ev.size);
        acc.record(src, ev.index, admitted);
        let next = ev.index + 1;
        if next < src.count {
            queue.push(src.time(next), src.event_kind(), src.size(next), ev.source, next);
        }
    }
    Ok(acc.into_report(scenario, duration, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{preset, CCM_101, IOAM_3HOP};
    use crate::scenario::{validate_scenario, FlowSpec, LinkSpec, MethodBinding};
    use crate::units::BitRate;

    fn mbps(x: f64) -> BitRate {
        BitRate::from_mbps(x).unwrap()
    }

    fn secs(s: f64) -> Duration {
        Duration::from_secs(s).unwrap()
    }

    fn ioam_scenario(over: bool) -> Scenario {
        let flow = FlowSpec::new("f0", mbps(1.0), 2880).unwrap();
        let link = LinkSpec::new(mbps(1.0), over).unwrap();
        let m = MethodBinding::new("m0", preset(IOAM_3HOP).unwrap().method, "f0");
        validate_scenario(vec![flow], link, vec![m]).unwrap()
    }

    #[test]
    fn emission_counts() {
        assert_eq!(emissions_before(1.0, 10.0), 10);
        assert_eq!(emissions_before(3.0, 10.0), 4);
        assert_eq!(emissions_before(0.1, 1.0), 10);
        assert_eq!(emissions_before(10.0, 100.0), 10);
        assert_eq!(emissions_before(2.0, 1.0), 1);
    }

    #[test]
    fn saturated_ioam_loses_the_overhead() {
        let s = ioam_scenario(false);
        let r = run_sim(&s, secs(100.0), 0, &SimOptions::default()).unwrap();
        assert!(r.is_conserved());
        // fluid: max(0, R(1+f) - C) with f = 640/2880
        let fluid = 1e6 * (1.0 + 640.0 / 2880.0) - 1e6;
        let quantum = 3520.0 / 100.0;
        assert!(
            (r.loss_rate().bps() - fluid).abs() <= quantum,
            "{}",
            r.loss_rate().bps()
        );
    }

    #[test]
    fn overprovisioned_ioam_delivers_everything() {
        let s = ioam_scenario(true);
        let r = run_sim(&s, secs(100.0), 0, &SimOptions::default()).unwrap();
        assert_eq!(r.total().dropped, 0);
        let fluid = 1e6 * (1.0 + 640.0 / 2880.0);
        assert!((r.delivered_rate().bps() - fluid).abs() <= 3520.0 / 100.0);
    }

    #[test]
    fn unobserved_flow_under_capacity_is_lossless() {
        let flow = FlowSpec::new("f0", mbps(1.0), 2880).unwrap();
        for cap in [1.0, 1.5, 10.0] {
            let s = validate_scenario(vec![flow.clone()], LinkSpec::saturable(mbps(cap)).unwrap(), vec![]).unwrap();
            let r = run_sim(&s, secs(50.0), 3, &SimOptions::default()).unwrap();
            assert_eq!(r.total().dropped, 0);
            assert_eq!(r.total().delivered, r.total().offered);
        }
    }

    #[test]
    fn horizon_shorter_than_period_is_an_error() {
        let flow = FlowSpec::new("f0", mbps(1.0), 2880).unwrap();
        let ccm = preset(CCM_101).unwrap().method.with_period(secs(10.0));
        let s = validate_scenario(
            vec![flow],
            LinkSpec::saturable(mbps(2.0)).unwrap(),
            vec![MethodBinding::new("m0", ccm, "f0")],
        )
        .unwrap();
        assert!(matches!(
            run_sim(&s, secs(5.0), 0, &SimOptions::default()),
            Err(Error::PeriodExceedsHorizon { .. })
        ));
    }

    #[test]
    fn runs_are_deterministic() {
        let s = ioam_scenario(false);
        let a = run_sim(&s, secs(20.0), 7, &SimOptions::default()).unwrap();
        let b = run_sim(&s, secs(20.0), 7, &SimOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn estimated_events_matches_processed() {
        let flow = FlowSpec::new("f0", mbps(1.0), 2880).unwrap();
        let ccm = preset(CCM_101).unwrap().method.with_period(secs(0.1));
        let s = validate_scenario(
            vec![flow],
            LinkSpec::saturable(mbps(1.0)).unwrap(),
            vec![MethodBinding::new("m0", ccm, "f0")],
        )
        .unwrap();
        let r = run_sim(&s, secs(10.0), 0, &SimOptions::default()).unwrap();
        assert_eq!(r.events, estimated_events(&s, secs(10.0)));
    }
}
