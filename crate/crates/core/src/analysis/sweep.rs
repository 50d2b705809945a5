use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::methods::MeasurementMethod;
use crate::metric::{Impact, Uncertainty};
use crate::scenario::{validate_scenario, FlowSpec, LinkSpec, MethodBinding, Scenario};
use crate::sim::{estimated_events, fluid_oracle, impact_from_deltas, measure_impact, SimOptions};
use crate::units::{BitRate, Duration, OverheadBits};

use super::relation::{check_relation, RelationRecord};

/// Packet events above which a sweep point falls back to the fluid model.
pub const DEFAULT_EVENT_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Measurement period τ in seconds.
    Period,
    SamplingRatio,
    FlowCount,
    /// Per-flow user rate in bits per second.
    DataRate,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Period => "tau",
            SweepVariable::SamplingRatio => "s",
            SweepVariable::FlowCount => "N",
            SweepVariable::DataRate => "rate",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Packet,
    Fluid,
}

impl EvalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::Packet => "packet",
            EvalMode::Fluid => "fluid",
        }
    }
}

/// When sweep points use the fluid model instead of packet simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluidPolicy {
    /// Fluid only above the event cap.
    #[default]
    Auto,
    Always,
    /// Never; points above the cap are an error.
    Never,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub sim: SimOptions,
    /// Relative tolerance for the relation check. `None` uses one packet
    /// quantum relative to the expected impact.
    pub tolerance: Option<f64>,
    /// Observer factor to check against instead of the method's own.
    pub claimed_hbar: Option<OverheadBits>,
    pub event_cap: u64,
    pub fluid: FluidPolicy,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            sim: SimOptions::default(),
            tolerance: None,
            claimed_hbar: None,
            event_cap: DEFAULT_EVENT_CAP,
            fluid: FluidPolicy::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepGrid {
    Periods(Vec<Duration>),
    SamplingRatios(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// Value of the swept variable.
    pub value: f64,
    pub record: RelationRecord,
    /// Analytic overhead rate of all methods at this point.
    pub overhead_rate: BitRate,
    /// Resolution of a measured rate: one largest packet over the horizon,
    /// times the number of flows.
    pub quantum: f64,
    pub flows: u64,
    pub mode: EvalMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub method: String,
    pub variable: SweepVariable,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn all_hold(&self) -> bool {
        self.points.iter().all(|p| p.record.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(|p| !p.record.holds)
    }
}

fn check_increasing(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Twin-run impact under the fluid model.
pub fn fluid_impact(scenario: &Scenario) -> Impact {
    let obs = fluid_oracle(scenario);
    let base = fluid_oracle(&scenario.unobserved());
    impact_from_deltas(
        obs.delivered.bps() - base.delivered.bps(),
        obs.dropped.bps() - base.dropped.bps(),
    )
}

struct PointInput<'a> {
    value: f64,
    scenario: Scenario,
    per_flow_events: u64,
    flows: u64,
    /// Representative flow and method for the uncertainty.
    flow: &'a FlowSpec,
    method: MeasurementMethod,
}

fn evaluate(input: PointInput<'_>, duration: Duration, seed: u64, opts: &SweepOptions) -> Result<SweepPoint> {
    let PointInput {
        value,
        scenario,
        per_flow_events,
        flows,
        flow,
        method,
    } = input;
    let events = per_flow_events.saturating_mul(flows);
    let mode = match opts.fluid {
        FluidPolicy::Always => EvalMode::Fluid,
        FluidPolicy::Auto if events > opts.event_cap => EvalMode::Fluid,
        FluidPolicy::Never if events > opts.event_cap => {
            return Err(Error::ScaleCapExceeded {
                events,
                cap: opts.event_cap,
            })
        }
        _ => EvalMode::Packet,
    };
    crate::sim::check_horizon_for(&method, flow, duration)?;
    let impact = match mode {
        EvalMode::Packet => measure_impact(&scenario, duration, seed, &opts.sim)?.impact,
        EvalMode::Fluid => fluid_impact(&scenario),
    };
    let overhead_rate: BitRate = scenario
        .methods()
        .iter()
        .map(|m| m.method.overhead_rate(scenario.flow_of(m)))
        .sum();
    let quantum = flows as f64 * scenario.max_packet_bits() as f64 / duration.secs();
    let hbar = opts.claimed_hbar.unwrap_or(method.observer_factor()) * flows;
    let tolerance = opts.tolerance.unwrap_or_else(|| {
        if overhead_rate.is_zero() {
            0.0
        } else {
            quantum / overhead_rate.bps()
        }
    });
    let delta_m: Uncertainty = method.detection_uncertainty(flow);
    Ok(SweepPoint {
        value,
        record: check_relation(delta_m, impact, hbar, tolerance),
        overhead_rate,
        quantum,
        flows,
        mode,
    })
}

fn single(flow: &FlowSpec, link: LinkSpec, name: &str, method: MeasurementMethod) -> Result<Scenario> {
    validate_scenario(
        vec![flow.clone()],
        link,
        vec![MethodBinding::new(name, method, flow.id().as_str())],
    )
}

/// Impact against uncertainty for one method over a grid of periods (periodic
/// classes) or sampling ratios (in-band), one twin run per point.
#[allow(clippy::too_many_arguments)]
pub fn impact_vs_uncertainty_sweep(
    name: &str,
    method: MeasurementMethod,
    flow: &FlowSpec,
    link: LinkSpec,
    grid: &SweepGrid,
    duration: Duration,
    seed: u64,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let (variable, variants): (_, Vec<(f64, MeasurementMethod)>) = match (grid, method) {
        (SweepGrid::Periods(_), MeasurementMethod::InBand(_)) => {
            return Err(Error::InvalidGrid(
                "in-band methods sweep sampling ratios, not periods".into(),
            ))
        }
        (SweepGrid::SamplingRatios(_), m) if m.in_band_params().is_none() => {
            return Err(Error::InvalidGrid(
                "periodic methods sweep periods, not sampling ratios".into(),
            ))
        }
        (SweepGrid::Periods(periods), m) => (
            SweepVariable::Period,
            periods.iter().map(|p| (p.secs(), m.with_period(*p))).collect(),
        ),
        (SweepGrid::SamplingRatios(ratios), MeasurementMethod::InBand(t)) => (
            SweepVariable::SamplingRatio,
            ratios
                .iter()
                .map(|s| Ok((f64::from(*s), MeasurementMethod::InBand(t.with_sampling_ratio(*s)?))))
                .collect::<Result<_>>()?,
        ),
        _ => unreachable!(),
    };
    check_increasing(&variants.iter().map(|v| v.0).collect::<Vec<_>>())?;

    let points = variants
        .into_par_iter()
        .map(|(value, m)| {
            let scenario = single(flow, link, name, m)?;
            let per_flow_events = estimated_events(&scenario, duration);
            evaluate(
                PointInput {
                    value,
                    scenario,
                    per_flow_events,
                    flows: 1,
                    flow,
                    method: m,
                },
                duration,
                seed,
                opts,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        method: name.to_string(),
        variable,
        points,
    })
}

fn replicate(flow: &FlowSpec, name: &str, method: MeasurementMethod, n: u64) -> Result<Scenario> {
    let flows: Vec<_> = (0..n).map(|i| flow.with_id(format!("f{i}"))).collect();
    let methods: Vec<_> = (0..n)
        .map(|i| MethodBinding::new(format!("{name}-{i}"), method, format!("f{i}")))
        .collect();
    let per_flow = flow.user_rate() + method.overhead_rate(flow);
    let capacity = BitRate::new(per_flow.bps() * n as f64)?;
    validate_scenario(flows, LinkSpec::overprovisioned(capacity)?, methods)
}

/// Aggregate impact of `n` independently monitored flows for each `n` in
/// `counts`, on an overprovisioned link. The bound at each point is `n · ħ`.
pub fn scaling_sweep(
    name: &str,
    method: MeasurementMethod,
    counts: &[u64],
    flow: &FlowSpec,
    duration: Duration,
    seed: u64,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    check_increasing(&counts.iter().map(|n| *n as f64).collect::<Vec<_>>())?;
    if counts[0] == 0 {
        return Err(Error::InvalidGrid("flow counts start at 1".into()));
    }
    let per_flow_events = estimated_events(&replicate(flow, name, method, 1)?, duration);
    let points = counts
        .par_iter()
        .map(|&n| {
            evaluate(
                PointInput {
                    value: n as f64,
                    scenario: replicate(flow, name, method, n)?,
                    per_flow_events,
                    flows: n,
                    flow,
                    method,
                },
                duration,
                seed,
                opts,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        method: name.to_string(),
        variable: SweepVariable::FlowCount,
        points,
    })
}

/// Impact of one monitored flow as its user rate grows, on an overprovisioned
/// link. Mostly useful for in-band methods, whose overhead scales with rate.
#[allow(clippy::too_many_arguments)]
pub fn rate_scaling_sweep(
    name: &str,
    method: MeasurementMethod,
    rates: &[BitRate],
    packet_bits: u64,
    duration: Duration,
    seed: u64,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    check_increasing(&rates.iter().map(|r| r.bps()).collect::<Vec<_>>())?;
    let flows = rates
        .iter()
        .map(|r| FlowSpec::new("f0", *r, packet_bits))
        .collect::<Result<Vec<_>>>()?;
    let points = flows
        .par_iter()
        .map(|flow| {
            let cap = BitRate::new(flow.user_rate().bps() + method.overhead_rate(flow).bps())?;
            let scenario = single(flow, LinkSpec::overprovisioned(cap)?, name, method)?;
            let per_flow_events = estimated_events(&scenario, duration);
            evaluate(
                PointInput {
                    value: flow.user_rate().bps(),
                    scenario,
                    per_flow_events,
                    flows: 1,
                    flow,
                    method,
                },
                duration,
                seed,
                opts,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        method: name.to_string(),
        variable: SweepVariable::DataRate,
        points,
    })
}
