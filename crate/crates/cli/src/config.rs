//! Experiment configuration files (TOML).
//!
//! ```toml
//! experiment = "sweep"        # simulate | sweep | detect | scale | ovu
//! duration = "100s"
//! seed = 0                    # optional, default 0
//! output = "sweep.csv"        # optional
//! tolerance = 0.01            # optional relative tolerance
//!
//! [link]
//! capacity = "1Mbps"
//! overprovisioned = true
//!
//! [[flow]]
//! id = "f0"
//! rate = "1Mbps"
//! packet_size = "360B"
//!
//! [[method]]
//! id = "ccm"
//! flow = "f0"
//! preset = "ccm-101"          # or class = "active_probe" + message + period
//!
//! [sweep]
//! method = "ccm"
//! periods = "3.33ms,100ms,1s,10s"
//! ```
//!
//! Quantities need unit suffixes; see [`crate::units`]. Exactly one
//! experiment section matching `experiment` may be present.

use std::fmt;
use std::path::PathBuf;

use netobs_core::methods::{preset, MeasurementMethod};
use netobs_core::scenario::{validate_scenario, FlowSpec, LinkSpec, MethodBinding, Scenario};
use netobs_core::{BitRate, Duration, OverheadBits};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{
    parse_bits, parse_duration, parse_list, parse_overhead, parse_rate, render_bits, render_duration, render_rate,
    UnitError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),
    #[error("`{key}`: {source}")]
    Unit { key: String, source: UnitError },
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("missing field `{0}`")]
    Missing(String),
}

fn unit_err(key: impl Into<String>) -> impl FnOnce(UnitError) -> ConfigError {
    let key = key.into();
    move |source| ConfigError::Unit { key, source }
}

fn invalid(key: impl Into<String>, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    Simulate,
    Sweep,
    Detect,
    Scale,
    Ovu,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Detect => "detect",
            ExperimentKind::Scale => "scale",
            ExperimentKind::Ovu => "ovu",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// ---- on-disk representation ----

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentKind,
    duration: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    link: RawLink,
    #[serde(rename = "flow", default)]
    flows: Vec<RawFlow>,
    #[serde(rename = "method", default, skip_serializing_if = "Vec::is_empty")]
    methods: Vec<RawMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep: Option<RawSweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<RawScale>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detect: Option<RawDetect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ovu: Option<RawOvu>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    capacity: String,
    #[serde(default)]
    overprovisioned: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlow {
    id: String,
    rate: String,
    packet_size: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMethod {
    id: String,
    flow: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sampling_ratio: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hops: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    encap: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    per_hop: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    periods: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sampling_ratios: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hbar_override: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScale {
    method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flows: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rates: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    event_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hbar_override: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetect {
    method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    failure_time: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timeout_multiplier: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOvu {
    method: String,
    rates: String,
}

// ---- validated representation ----

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub id: String,
    pub rate: BitRate,
    pub packet_bits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodSource {
    Preset {
        name: String,
        period: Option<Duration>,
        sampling_ratio: Option<u32>,
    },
    Explicit(MeasurementMethod),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub id: String,
    pub flow: String,
    pub source: MethodSource,
}

impl MethodConfig {
    pub fn method(&self) -> MeasurementMethod {
        match &self.source {
            MethodSource::Explicit(m) => *m,
            MethodSource::Preset {
                name,
                period,
                sampling_ratio,
            } => {
                let mut m = preset(name).expect("validated preset name").method;
                if let Some(p) = period {
                    m = m.with_period(*p);
                }
                if let (Some(s), MeasurementMethod::InBand(t)) = (sampling_ratio, m) {
                    m = MeasurementMethod::InBand(t.with_sampling_ratio(*s).expect("validated ratio"));
                }
                m
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Periods(Vec<Duration>),
    SamplingRatios(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScaleAxis {
    Flows(Vec<u64>),
    Rates(Vec<BitRate>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Simulate,
    Sweep {
        method: String,
        axis: SweepAxis,
        hbar_override: Option<OverheadBits>,
    },
    Scale {
        method: String,
        axis: ScaleAxis,
        period: Option<Duration>,
        event_cap: Option<u64>,
        hbar_override: Option<OverheadBits>,
    },
    Detect {
        method: String,
        failure_time: Option<f64>,
        trials: Option<usize>,
        timeout_multiplier: Option<f64>,
    },
    Ovu {
        method: String,
        rates: Vec<BitRate>,
    },
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::Simulate => ExperimentKind::Simulate,
            Experiment::Sweep { .. } => ExperimentKind::Sweep,
            Experiment::Scale { .. } => ExperimentKind::Scale,
            Experiment::Detect { .. } => ExperimentKind::Detect,
            Experiment::Ovu { .. } => ExperimentKind::Ovu,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    pub duration: Duration,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub tolerance: Option<f64>,
    pub link: LinkSpec,
    pub flows: Vec<FlowConfig>,
    pub methods: Vec<MethodConfig>,
}

impl ScenarioConfig {
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let flows = self
            .flows
            .iter()
            .map(|f| FlowSpec::new(f.id.as_str(), f.rate, f.packet_bits))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid("flow", e))?;
        let methods = self
            .methods
            .iter()
            .map(|m| MethodBinding::new(m.id.as_str(), m.method(), m.flow.as_str()))
            .collect();
        validate_scenario(flows, self.link, methods).map_err(|e| invalid("scenario", e))
    }

    pub fn method(&self, id: &str) -> Option<&MethodConfig> {
        self.methods.iter().find(|m| m.id == id)
    }

    pub fn flow_of(&self, method: &MethodConfig) -> Option<&FlowConfig> {
        self.flows.iter().find(|f| f.id == method.flow)
    }
}

fn parse_method(raw: RawMethod, index: usize) -> Result<MethodConfig, ConfigError> {
    let key = |field: &str| format!("method[{index}].{field}");
    let period = raw
        .period
        .as_deref()
        .map(parse_duration)
        .transpose()
        .map_err(unit_err(key("period")))?;

    let source = match (&raw.preset, &raw.class) {
        (Some(_), Some(_)) => return Err(invalid(key("class"), "give either `preset` or `class`, not both")),
        (None, None) => return Err(ConfigError::Missing(key("preset"))),
        (Some(name), None) => {
            let p = preset(name).ok_or_else(|| invalid(key("preset"), format!("unknown preset `{name}`")))?;
            for (field, set) in [
                ("message", raw.message.is_some()),
                ("hops", raw.hops.is_some()),
                ("encap", raw.encap.is_some()),
                ("per_hop", raw.per_hop.is_some()),
            ] {
                if set {
                    return Err(invalid(key(field), "not allowed with `preset`"));
                }
            }
            let in_band = p.method.in_band_params().is_some();
            if in_band && period.is_some() {
                return Err(invalid(key("period"), "in-band presets are sampled, not periodic"));
            }
            if !in_band && raw.sampling_ratio.is_some() {
                return Err(invalid(key("sampling_ratio"), "only in-band presets are sampled"));
            }
            if raw.sampling_ratio == Some(0) {
                return Err(invalid(key("sampling_ratio"), "must be >= 1"));
            }
            MethodSource::Preset {
                name: name.clone(),
                period,
                sampling_ratio: raw.sampling_ratio,
            }
        }
        (None, Some(class)) => {
            let message = || -> Result<OverheadBits, ConfigError> {
                let text = raw
                    .message
                    .as_deref()
                    .ok_or_else(|| ConfigError::Missing(key("message")))?;
                parse_overhead(text).map_err(unit_err(key("message")))
            };
            let method = match class.as_str() {
                "active_probe" | "passive_export" => {
                    let period = period.ok_or_else(|| ConfigError::Missing(key("period")))?;
                    for (field, set) in [
                        ("sampling_ratio", raw.sampling_ratio.is_some()),
                        ("hops", raw.hops.is_some()),
                        ("encap", raw.encap.is_some()),
                        ("per_hop", raw.per_hop.is_some()),
                    ] {
                        if set {
                            return Err(invalid(key(field), format!("not a field of class `{class}`")));
                        }
                    }
                    if class == "active_probe" {
                        MeasurementMethod::active_probe(message()?, period)
                    } else {
                        MeasurementMethod::passive_export(message()?, period)
                    }
                }
                "in_band" => {
                    if raw.message.is_some() {
                        return Err(invalid(key("message"), "derived from encap and per_hop for in_band"));
                    }
                    if period.is_some() {
                        return Err(invalid(key("period"), "not a field of class `in_band`"));
                    }
                    let need = |field: &str, v: Option<&String>| -> Result<OverheadBits, ConfigError> {
                        let text = v.ok_or_else(|| ConfigError::Missing(key(field)))?;
                        parse_overhead(text).map_err(unit_err(key(field)))
                    };
                    MeasurementMethod::in_band(
                        raw.sampling_ratio
                            .ok_or_else(|| ConfigError::Missing(key("sampling_ratio")))?,
                        raw.hops.ok_or_else(|| ConfigError::Missing(key("hops")))?,
                        need("encap", raw.encap.as_ref())?,
                        need("per_hop", raw.per_hop.as_ref())?,
                    )
                    .map_err(|e| invalid(key("class"), e))?
                }
                other => {
                    return Err(invalid(
                        key("class"),
                        format!("unknown class `{other}` (active_probe, passive_export, in_band)"),
                    ))
                }
            };
            MethodSource::Explicit(method)
        }
    };
    Ok(MethodConfig {
        id: raw.id,
        flow: raw.flow,
        source,
    })
}

fn parse_experiment(raw: &mut RawConfig) -> Result<Experiment, ConfigError> {
    let present: Vec<&str> = [
        ("sweep", raw.sweep.is_some()),
        ("scale", raw.scale.is_some()),
        ("detect", raw.detect.is_some()),
        ("ovu", raw.ovu.is_some()),
    ]
    .into_iter()
    .filter_map(|(k, set)| set.then_some(k))
    .collect();
    let kind = raw.experiment;
    if let Some(extra) = present.iter().find(|k| **k != kind.as_str()) {
        return Err(invalid(
            *extra,
            format!("section does not belong to experiment `{kind}`"),
        ));
    }
    let hbar = |key: &str, v: Option<String>| v.as_deref().map(parse_overhead).transpose().map_err(unit_err(key));
    Ok(match kind {
        ExperimentKind::Simulate => Experiment::Simulate,
        ExperimentKind::Sweep => {
            let s = raw.sweep.take().ok_or_else(|| ConfigError::Missing("sweep".into()))?;
            let axis = match (s.periods, s.sampling_ratios) {
                (Some(p), None) => {
                    SweepAxis::Periods(parse_list(&p, parse_duration).map_err(unit_err("sweep.periods"))?)
                }
                (None, Some(r)) => SweepAxis::SamplingRatios(r),
                (None, None) => return Err(ConfigError::Missing("sweep.periods".into())),
                (Some(_), Some(_)) => {
                    return Err(invalid(
                        "sweep.sampling_ratios",
                        "give either `periods` or `sampling_ratios`",
                    ))
                }
            };
            Experiment::Sweep {
                method: s.method,
                axis,
                hbar_override: hbar("sweep.hbar_override", s.hbar_override)?,
            }
        }
        ExperimentKind::Scale => {
            let s = raw.scale.take().ok_or_else(|| ConfigError::Missing("scale".into()))?;
            let axis = match (s.flows, s.rates) {
                (Some(n), None) => ScaleAxis::Flows(n),
                (None, Some(r)) => ScaleAxis::Rates(parse_list(&r, parse_rate).map_err(unit_err("scale.rates"))?),
                (None, None) => return Err(ConfigError::Missing("scale.flows".into())),
                (Some(_), Some(_)) => return Err(invalid("scale.rates", "give either `flows` or `rates`")),
            };
            Experiment::Scale {
                method: s.method,
                axis,
                period: s
                    .period
                    .as_deref()
                    .map(parse_duration)
                    .transpose()
                    .map_err(unit_err("scale.period"))?,
                event_cap: s.event_cap,
                hbar_override: hbar("scale.hbar_override", s.hbar_override)?,
            }
        }
        ExperimentKind::Detect => {
            let d = raw.detect.take().ok_or_else(|| ConfigError::Missing("detect".into()))?;
            if d.failure_time.is_some() == d.trials.is_some() {
                return Err(invalid(
                    "detect.trials",
                    "give exactly one of `failure_time` or `trials`",
                ));
            }
            if let Some(m) = d.timeout_multiplier {
                if !(m.is_finite() && m > 0.0) {
                    return Err(invalid("detect.timeout_multiplier", "must be positive"));
                }
            }
            Experiment::Detect {
                method: d.method,
                failure_time: d
                    .failure_time
                    .as_deref()
                    .map(parse_duration)
                    .transpose()
                    .map_err(unit_err("detect.failure_time"))?
                    .map(Duration::secs),
                trials: d.trials,
                timeout_multiplier: d.timeout_multiplier,
            }
        }
        ExperimentKind::Ovu => {
            let o = raw.ovu.take().ok_or_else(|| ConfigError::Missing("ovu".into()))?;
            Experiment::Ovu {
                method: o.method,
                rates: parse_list(&o.rates, parse_rate).map_err(unit_err("ovu.rates"))?,
            }
        }
    })
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.message().to_string()))?;
    let experiment = parse_experiment(&mut raw)?;
    let duration = parse_duration(&raw.duration).map_err(unit_err("duration"))?;
    if let Some(t) = raw.tolerance {
        if !(t.is_finite() && (0.0..1.0).contains(&t)) {
            return Err(invalid("tolerance", "must be in [0, 1)"));
        }
    }
    let capacity = parse_rate(&raw.link.capacity).map_err(unit_err("link.capacity"))?;
    let link = LinkSpec::new(capacity, raw.link.overprovisioned).map_err(|e| invalid("link.capacity", e))?;

    let flows = raw
        .flows
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            Ok(FlowConfig {
                rate: parse_rate(&f.rate).map_err(unit_err(format!("flow[{i}].rate")))?,
                packet_bits: parse_bits(&f.packet_size).map_err(unit_err(format!("flow[{i}].packet_size")))?,
                id: f.id,
            })
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let methods = raw
        .methods
        .into_iter()
        .enumerate()
        .map(|(i, m)| parse_method(m, i))
        .collect::<Result<Vec<_>, _>>()?;

    let config = ScenarioConfig {
        experiment,
        duration,
        seed: raw.seed.unwrap_or(0),
        output: raw.output,
        tolerance: raw.tolerance,
        link,
        flows,
        methods,
    };
    config.scenario()?;
    let referenced = match &config.experiment {
        Experiment::Simulate => None,
        Experiment::Sweep { method, .. }
        | Experiment::Scale { method, .. }
        | Experiment::Detect { method, .. }
        | Experiment::Ovu { method, .. } => Some(method),
    };
    if let Some(id) = referenced {
        if config.method(id).is_none() {
            return Err(invalid(
                format!("{}.method", config.experiment.kind()),
                format!("unknown method `{id}`"),
            ));
        }
    }
    Ok(config)
}

fn render_method(m: &MethodConfig) -> RawMethod {
    let mut raw = RawMethod {
        id: m.id.clone(),
        flow: m.flow.clone(),
        ..RawMethod::default()
    };
    match &m.source {
        MethodSource::Preset {
            name,
            period,
            sampling_ratio,
        } => {
            raw.preset = Some(name.clone());
            raw.period = period.map(render_duration);
            raw.sampling_ratio = *sampling_ratio;
        }
        MethodSource::Explicit(method) => {
            raw.class = Some(method.class().as_str().to_string());
            match method {
                MeasurementMethod::ActiveProbe { message, period }
                | MeasurementMethod::PassiveExport { message, period } => {
                    raw.message = Some(render_bits(message.bits()));
                    raw.period = Some(render_duration(*period));
                }
                MeasurementMethod::InBand(t) => {
                    raw.sampling_ratio = Some(t.sampling_ratio());
                    raw.hops = Some(t.hops());
                    raw.encap = Some(render_bits(t.encap().bits()));
                    raw.per_hop = Some(render_bits(t.per_hop().bits()));
                }
            }
        }
    }
    raw
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

/// Renders a config back to TOML; `parse_config(&render(c)) == c`.
pub fn render(config: &ScenarioConfig) -> String {
    let mut raw = RawConfig {
        experiment: config.experiment.kind(),
        duration: render_duration(config.duration),
        seed: Some(config.seed),
        output: config.output.clone(),
        tolerance: config.tolerance,
        link: RawLink {
            capacity: render_rate(config.link.capacity()),
            overprovisioned: config.link.is_overprovisioned(),
        },
        flows: config
            .flows
            .iter()
            .map(|f| RawFlow {
                id: f.id.clone(),
                rate: render_rate(f.rate),
                packet_size: render_bits(f.packet_bits),
            })
            .collect(),
        methods: config.methods.iter().map(render_method).collect(),
        ..RawConfig::default()
    };
    let hbar = |h: &Option<OverheadBits>| h.map(|h| render_bits(h.bits()));
    match &config.experiment {
        Experiment::Simulate => {}
        Experiment::Sweep {
            method,
            axis,
            hbar_override,
        } => {
            let (periods, sampling_ratios) = match axis {
                SweepAxis::Periods(p) => (Some(join(p, |d| render_duration(*d))), None),
                SweepAxis::SamplingRatios(r) => (None, Some(r.clone())),
            };
            raw.sweep = Some(RawSweep {
                method: method.clone(),
                periods,
                sampling_ratios,
                hbar_override: hbar(hbar_override),
            });
        }
        Experiment::Scale {
            method,
            axis,
            period,
            event_cap,
            hbar_override,
        } => {
            let (flows, rates) = match axis {
                ScaleAxis::Flows(n) => (Some(n.clone()), None),
                ScaleAxis::Rates(r) => (None, Some(join(r, |r| render_rate(*r)))),
            };
            raw.scale = Some(RawScale {
                method: method.clone(),
                flows,
                rates,
                period: period.map(render_duration),
                event_cap: *event_cap,
                hbar_override: hbar(hbar_override),
            });
        }
        Experiment::Detect {
            method,
            failure_time,
            trials,
            timeout_multiplier,
        } => {
            raw.detect = Some(RawDetect {
                method: method.clone(),
                failure_time: failure_time.map(|t| format!("{t}s")),
                trials: *trials,
                timeout_multiplier: *timeout_multiplier,
            });
        }
        Experiment::Ovu { method, rates } => {
            raw.ovu = Some(RawOvu {
                method: method.clone(),
                rates: join(rates, |r| render_rate(*r)),
            });
        }
    }
    toml::to_string(&raw).expect("config serialises")
}
