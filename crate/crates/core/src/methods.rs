//! The three measurement classes and their overhead arithmetic.
//!
//! Every method emits a fixed number of overhead bits once per measurement
//! period. That per-period overhead is the method's observer factor, and the
//! overhead rate is the observer factor spread over the period.

use std::fmt;

use crate::error::{Error, Result};
use crate::metric::Uncertainty;
use crate::scenario::FlowSpec;
use crate::units::{BitRate, Duration, OverheadBits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodClass {
    /// Local observation with periodic export (management overhead).
    PassiveExport,
    /// Periodic synthetic probes on the data path.
    ActiveProbe,
    /// Telemetry piggybacked on sampled user packets.
    InBand,
}

impl MethodClass {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodClass::PassiveExport => "passive_export",
            MethodClass::ActiveProbe => "active_probe",
            MethodClass::InBand => "in_band",
        }
    }
}

impl fmt::Display for MethodClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// In-band telemetry parameters. One of every `sampling_ratio` data packets
/// is enlarged by `encap + hops × per_hop` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InBandTelemetry {
    sampling_ratio: u32,
    hops: u32,
    encap: OverheadBits,
    per_hop: OverheadBits,
    message: OverheadBits,
}

impl InBandTelemetry {
    pub fn new(sampling_ratio: u32, hops: u32, encap: OverheadBits, per_hop: OverheadBits) -> Result<Self> {
        if sampling_ratio == 0 {
            return Err(Error::InvalidMethod("sampling ratio must be >= 1".into()));
        }
        if hops == 0 {
            return Err(Error::InvalidMethod("hop count must be >= 1".into()));
        }
        let message = encap.checked_add(per_hop.checked_mul(u64::from(hops))?)?;
        Ok(InBandTelemetry {
            sampling_ratio,
            hops,
            encap,
            per_hop,
            message,
        })
    }

    pub fn sampling_ratio(&self) -> u32 {
        self.sampling_ratio
    }

    pub fn hops(&self) -> u32 {
        self.hops
    }

    pub fn encap(&self) -> OverheadBits {
        self.encap
    }

    pub fn per_hop(&self) -> OverheadBits {
        self.per_hop
    }

    /// Bits added to each sampled packet.
    pub fn message(&self) -> OverheadBits {
        self.message
    }

    pub fn with_sampling_ratio(self, sampling_ratio: u32) -> Result<Self> {
        Self::new(sampling_ratio, self.hops, self.encap, self.per_hop)
    }
}

/// One measurement process, parameterised by class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementMethod {
    PassiveExport { message: OverheadBits, period: Duration },
    ActiveProbe { message: OverheadBits, period: Duration },
    InBand(InBandTelemetry),
}

impl MeasurementMethod {
    pub fn passive_export(message: OverheadBits, period: Duration) -> Self {
        MeasurementMethod::PassiveExport { message, period }
    }

    pub fn active_probe(message: OverheadBits, period: Duration) -> Self {
        MeasurementMethod::ActiveProbe { message, period }
    }

    pub fn in_band(sampling_ratio: u32, hops: u32, encap: OverheadBits, per_hop: OverheadBits) -> Result<Self> {
        InBandTelemetry::new(sampling_ratio, hops, encap, per_hop).map(MeasurementMethod::InBand)
    }

    pub fn class(&self) -> MethodClass {
        match self {
            MeasurementMethod::PassiveExport { .. } => MethodClass::PassiveExport,
            MeasurementMethod::ActiveProbe { .. } => MethodClass::ActiveProbe,
            MeasurementMethod::InBand(_) => MethodClass::InBand,
        }
    }

    /// Overhead bits per measurement event.
    pub fn message_bits(&self) -> OverheadBits {
        match self {
            MeasurementMethod::PassiveExport { message, .. } | MeasurementMethod::ActiveProbe { message, .. } => {
                *message
            }
            MeasurementMethod::InBand(t) => t.message(),
        }
    }

    /// Configured period for the periodic classes; `None` for in-band.
    pub fn period(&self) -> Option<Duration> {
        match self {
            MeasurementMethod::PassiveExport { period, .. } | MeasurementMethod::ActiveProbe { period, .. } => {
                Some(*period)
            }
            MeasurementMethod::InBand(_) => None,
        }
    }

    pub fn in_band_params(&self) -> Option<&InBandTelemetry> {
        match self {
            MeasurementMethod::InBand(t) => Some(t),
            _ => None,
        }
    }

    /// Same method with a different period. In-band methods have no
    /// configurable period and are returned unchanged.
    pub fn with_period(self, new_period: Duration) -> Self {
        match self {
            MeasurementMethod::PassiveExport { message, .. } => MeasurementMethod::PassiveExport {
                message,
                period: new_period,
            },
            MeasurementMethod::ActiveProbe { message, .. } => MeasurementMethod::ActiveProbe {
                message,
                period: new_period,
            },
            m @ MeasurementMethod::InBand(_) => m,
        }
    }

    /// The observer factor ħ: overhead bits per measurement period.
    pub fn observer_factor(&self) -> OverheadBits {
        self.message_bits()
    }

    /// Measurement period τ. For in-band telemetry this is the mean spacing of
    /// sampled packets, `s × L / R`.
    pub fn effective_period(&self, flow: &FlowSpec) -> Duration {
        match self {
            MeasurementMethod::PassiveExport { period, .. } | MeasurementMethod::ActiveProbe { period, .. } => *period,
            MeasurementMethod::InBand(t) => {
                let secs = f64::from(t.sampling_ratio()) * flow.packet_bits() as f64 / flow.user_rate().bps();
                Duration::from_secs(secs).expect("validated flow has positive emission interval")
            }
        }
    }

    /// Overhead rate Ov = ħ / τ.
    pub fn overhead_rate(&self, flow: &FlowSpec) -> BitRate {
        match self {
            MeasurementMethod::InBand(t) => {
                let bps = t.message().bits() as f64 * flow.user_rate().bps()
                    / (f64::from(t.sampling_ratio()) * flow.packet_bits() as f64);
                BitRate::new(bps).expect("finite non-negative")
            }
            _ => self.observer_factor().per(self.effective_period(flow)),
        }
    }

    /// Uncertainty of a metric with the given slope (metric units per second)
    /// when measured by this method.
    pub fn uncertainty_of(&self, metric: &str, metric_slope: f64, flow: &FlowSpec) -> Uncertainty {
        Uncertainty::new(metric, metric_slope, self.effective_period(flow))
    }

    /// Detection-time uncertainty (slope 1).
    pub fn detection_uncertainty(&self, flow: &FlowSpec) -> Uncertainty {
        Uncertainty::detection_time(self.effective_period(flow))
    }
}

/// A named method configuration with fixed protocol constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub method: MeasurementMethod,
    /// Named octet components of the in-band encapsulation, if any.
    pub encap_octets: &'static [(&'static str, u64)],
}

pub const CCM_101: &str = "ccm-101";
pub const GNMI_204: &str = "gnmi-204";
pub const IOAM_3HOP: &str = "ioam-3hop";

/// IPv6 tunnel header added by the encapsulating node.
pub const IOAM_IPV6_TUNNEL_OCTETS: u64 = 44;
/// IPv6 option header carrying the IOAM option.
pub const IOAM_OPTION_HEADER_OCTETS: u64 = 4;
/// IOAM trace option header.
pub const IOAM_HEADER_OCTETS: u64 = 8;
/// Trace data pushed by each hop.
pub const IOAM_PER_HOP_OCTETS: u64 = 8;
pub const IOAM_HOPS: u32 = 3;
pub const CCM_OCTETS: u64 = 101;
pub const GNMI_EXPORT_OCTETS: u64 = 204;

fn one_second() -> Duration {
    Duration::from_secs(1.0).expect("positive")
}

/// Built-in presets. Periodic presets default to a 1 s period and in-band to
/// sampling every packet; sweeps override both.
pub fn presets() -> Vec<Preset> {
    vec![
        Preset {
            name: CCM_101,
            summary: "Ethernet OAM continuity check message, 101-byte frame",
            method: MeasurementMethod::active_probe(OverheadBits::from_octets(CCM_OCTETS), one_second()),
            encap_octets: &[],
        },
        Preset {
            name: GNMI_204,
            summary: "gNMI periodic telemetry export, 204-byte message",
            method: MeasurementMethod::passive_export(OverheadBits::from_octets(GNMI_EXPORT_OCTETS), one_second()),
            encap_octets: &[],
        },
        Preset {
            name: IOAM_3HOP,
            summary: "IOAM over IPv6 encapsulation, three hops",
            method: MeasurementMethod::in_band(
                1,
                IOAM_HOPS,
                OverheadBits::from_octets(IOAM_IPV6_TUNNEL_OCTETS + IOAM_OPTION_HEADER_OCTETS + IOAM_HEADER_OCTETS),
                OverheadBits::from_octets(IOAM_PER_HOP_OCTETS),
            )
            .expect("valid preset"),
            encap_octets: &[
                ("ipv6-tunnel", IOAM_IPV6_TUNNEL_OCTETS),
                ("ipv6-option", IOAM_OPTION_HEADER_OCTETS),
                ("ioam-header", IOAM_HEADER_OCTETS),
            ],
        },
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}
