use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::methods::MeasurementMethod;
use crate::scenario::{MethodId, Scenario};
use crate::units::Duration;

use super::{emissions_before, EventKind, EventQueue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOptions {
    /// Missing-arrival timeout in periods. 1 declares the failure at the
    /// first expected arrival that does not show up.
    pub timeout_multiplier: f64,
}

impl Default for DetectionOptions {
    fn default() -> Self {
        DetectionOptions {
            timeout_multiplier: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionReport {
    pub failure_time: f64,
    pub detection_time: f64,
    pub latency: f64,
    /// Effective measurement period of the detecting method.
    pub period: f64,
}

/// Arrival schedule of the packets a method's monitor listens for.
struct Carrier {
    spacing: f64,
    count: u64,
    kind: EventKind,
    period: f64,
}

impl Carrier {
    fn for_method(scenario: &Scenario, id: &MethodId, horizon: f64) -> Result<Carrier> {
        let (index, binding) = scenario
            .methods()
            .iter()
            .enumerate()
            .find(|(_, m)| &m.id == id)
            .ok_or_else(|| Error::UnknownMethod(id.to_string()))?;
        let flow = scenario.flow_of(binding);
        let period = binding.method.effective_period(flow).secs();
        let (spacing, kind) = match binding.method {
            MeasurementMethod::ActiveProbe { period, .. } => (period.secs(), EventKind::ProbePacket { method: index }),
            MeasurementMethod::PassiveExport { period, .. } => {
                (period.secs(), EventKind::ExportPacket { method: index })
            }
            // Sampled packets are every s-th packet of the flow.
            MeasurementMethod::InBand(_) => (period, EventKind::DataPacket { flow: index }),
        };
        let count = emissions_before(spacing, horizon);
        if count == 0 {
            return Err(Error::NoCarrierPackets(id.to_string()));
        }
        Ok(Carrier {
            spacing,
            count,
            kind,
            period,
        })
    }

    fn time(&self, index: f64) -> f64 {
        index * self.spacing
    }
}

/// Simulates a path failure at `failure_time` and reports when the monitor of
/// method `id` notices it.
///
/// Carrier packets stop arriving once the failure starts; a carrier scheduled
/// at the failure instant still arrives. Detection happens `timeout_multiplier`
/// periods after the last arrival.
pub fn run_detection(
    scenario: &Scenario,
    id: &MethodId,
    failure_time: f64,
    horizon: Duration,
    options: &DetectionOptions,
) -> Result<DetectionReport> {
    let horizon = horizon.secs();
    if !(0.0..horizon).contains(&failure_time) {
        return Err(Error::FailureOutsideHorizon { failure_time, horizon });
    }
    let carrier = Carrier::for_method(scenario, id, horizon)?;

    let mut queue = EventQueue::new();
    queue.push(0.0, carrier.kind, 0, 0, 0);
    queue.push(failure_time, EventKind::FailureStart, 0, 1, 0);
    let mut last_arrival = None;
    while let Some(ev) = queue.pop() {
        if ev.kind == EventKind::FailureStart {
            break;
        }
        last_arrival = Some(ev.index);
        let next = ev.index + 1;
        if next < carrier.count {
            queue.push(carrier.time(next as f64), carrier.kind, 0, 0, next);
        }
    }
    let last = last_arrival.ok_or_else(|| Error::NoCarrierPackets(id.to_string()))?;
    let detection_time = carrier.time(last as f64 + options.timeout_multiplier);
    if detection_time >= horizon {
        return Err(Error::PeriodExceedsHorizon {
            what: format!("no arrival of `{id}` left to miss after t={failure_time}s"),
            period: carrier.period,
            horizon,
        });
    }
    Ok(DetectionReport {
        failure_time,
        detection_time,
        latency: detection_time - failure_time,
        period: carrier.period,
    })
}

/// Runs `trials` detections at failure times drawn uniformly from the part of
/// the horizon where a detection can still complete.
pub fn detection_trials(
    scenario: &Scenario,
    id: &MethodId,
    horizon: Duration,
    trials: usize,
    seed: u64,
    options: &DetectionOptions,
) -> Result<Vec<DetectionReport>> {
    let carrier = Carrier::for_method(scenario, id, horizon.secs())?;
    let reserve = options.timeout_multiplier.ceil().max(1.0);
    let latest = carrier.time(carrier.count as f64 - reserve);
    if latest <= 0.0 {
        return Err(Error::PeriodExceedsHorizon {
            what: format!("detection window of `{id}`"),
            period: carrier.period,
            horizon: horizon.secs(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| run_detection(scenario, id, rng.gen_range(0.0..latest), horizon, options))
        .collect()
}
