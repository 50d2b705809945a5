use std::collections::BTreeMap;

use crate::error::Result;
use crate::metric::{Impact, ImpactKind};
use crate::scenario::{FlowId, Scenario};
use crate::units::{BitRate, Duration};

use super::{run_sim, SimOptions, SimReport};

/// Paired runs of a scenario with and without its measurement methods.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinImpact {
    pub observed: SimReport,
    pub baseline: SimReport,
    /// Change in delivered wire rate (bps), per flow including the overhead
    /// of methods bound to it.
    pub per_flow: BTreeMap<FlowId, RateDeltas>,
    pub data_rate_delta: f64,
    pub loss_rate_delta: f64,
    pub impact: Impact,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateDeltas {
    pub data_rate: f64,
    pub loss_rate: f64,
}

/// Combines rate deltas into one impact.
///
/// Overhead bits end up either delivered (raising the data rate) or dropped
/// (raising the loss rate). A link in between saturation regimes splits them,
/// so the impact sums the non-negative parts and takes its kind from the
/// larger one.
pub fn impact_from_deltas(data_rate_delta: f64, loss_rate_delta: f64) -> Impact {
    let d = data_rate_delta.max(0.0);
    let l = loss_rate_delta.max(0.0);
    let kind = if l > d {
        ImpactKind::LossRate
    } else {
        ImpactKind::DataRate
    };
    Impact::new(kind, BitRate::new(d + l).expect("finite non-negative"))
}

/// Measures the impact of every method in `scenario` by comparing it with its
/// unobserved twin under the same horizon and seed.
pub fn measure_impact(scenario: &Scenario, duration: Duration, seed: u64, options: &SimOptions) -> Result<TwinImpact> {
    let observed = run_sim(scenario, duration, seed, options)?;
    let baseline = run_sim(&scenario.unobserved(), duration, seed, options)?;
    let secs = duration.secs();

    let mut per_flow = BTreeMap::new();
    for (fi, flow) in scenario.flows().iter().enumerate() {
        let mut obs = observed.per_flow[flow.id()];
        for (_, m) in scenario.methods_on(fi) {
            obs += observed.per_method[&m.id];
        }
        let base = baseline.per_flow[flow.id()];
        per_flow.insert(
            flow.id().clone(),
            RateDeltas {
                data_rate: (obs.delivered as f64 - base.delivered as f64) / secs,
                loss_rate: (obs.dropped as f64 - base.dropped as f64) / secs,
            },
        );
    }
    let data_rate_delta = per_flow.values().map(|d| d.data_rate).sum::<f64>();
    let loss_rate_delta = per_flow.values().map(|d| d.loss_rate).sum::<f64>();
    Ok(TwinImpact {
        impact: impact_from_deltas(data_rate_delta, loss_rate_delta),
        observed,
        baseline,
        per_flow,
        data_rate_delta,
        loss_rate_delta,
    })
}
