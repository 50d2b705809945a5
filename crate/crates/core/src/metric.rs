use std::fmt;

use crate::units::{BitRate, Duration};

/// Uncertainty of a periodically measured metric.
///
/// For a sensitive metric the uncertainty grows linearly with the period:
/// `value = slope × period`. Detection time has slope 1 (a failure is seen at
/// most one period after it happens).
#[derive(Debug, Clone, PartialEq)]
pub struct Uncertainty {
    metric: String,
    value: f64,
    period: Duration,
    slope: f64,
}

impl Uncertainty {
    pub const DETECTION_TIME: &'static str = "detection_time";

    /// Panics if `slope` is negative or not finite.
    pub fn new(metric: impl Into<String>, slope: f64, period: Duration) -> Self {
        assert!(
            slope.is_finite() && slope >= 0.0,
            "metric slope must be finite and non-negative, got {slope}"
        );
        Uncertainty {
            metric: metric.into(),
            value: slope * period.secs(),
            period,
            slope,
        }
    }

    pub fn detection_time(period: Duration) -> Self {
        Self::new(Self::DETECTION_TIME, 1.0, period)
    }

    pub fn metric(&self) -> &str {
        &self.metric
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn period(&self) -> Duration {
        self.period
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImpactKind {
    /// Extra delivered traffic (overprovisioned path).
    DataRate,
    /// Extra dropped traffic (saturated path).
    LossRate,
}

impl fmt::Display for ImpactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImpactKind::DataRate => "data_rate",
            ImpactKind::LossRate => "loss_rate",
        })
    }
}

/// Effect of a measurement on a rate metric of the measured traffic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impact {
    pub kind: ImpactKind,
    pub value: BitRate,
}

impl Impact {
    pub fn new(kind: ImpactKind, value: BitRate) -> Self {
        Impact { kind, value }
    }
}
