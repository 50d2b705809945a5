//! Unit-suffixed quantities in config files: `1Mbps`, `100ms`, `360B`.
//!
//! A bare number is always rejected. Sizes use `B` for octets and `b` for
//! bits; rates are decimal (`kbps` = 10³ bps).

use netobs_core::{BitRate, Duration, OverheadBits};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnitError {
    #[error("`{0}` has no unit suffix")]
    MissingUnit(String),
    #[error("`{value}`: unknown unit `{unit}` (expected one of {expected})")]
    UnknownUnit {
        value: String,
        unit: String,
        expected: &'static str,
    },
    #[error("`{0}` is not a number")]
    BadNumber(String),
    #[error("`{0}` is negative")]
    Negative(String),
    #[error("`{0}` is out of range")]
    OutOfRange(String),
}

fn split(text: &str) -> Result<(f64, &str), UnitError> {
    let text = text.trim();
    let unit_start = text
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_ascii_alphabetic())
        .last()
        .map(|(i, _)| i)
        .ok_or_else(|| UnitError::MissingUnit(text.to_string()))?;
    let (num, unit) = text.split_at(unit_start);
    let num = num.trim();
    if num.is_empty() {
        return Err(UnitError::BadNumber(text.to_string()));
    }
    let value: f64 = num.parse().map_err(|_| UnitError::BadNumber(text.to_string()))?;
    if !value.is_finite() {
        return Err(UnitError::OutOfRange(text.to_string()));
    }
    if value < 0.0 || (value == 0.0 && num.starts_with('-')) {
        return Err(UnitError::Negative(text.to_string()));
    }
    Ok((value, unit))
}

const RATE_UNITS: &str = "bps, kbps, Mbps, Gbps, Tbps";
const TIME_UNITS: &str = "ns, us, ms, s";
const SIZE_UNITS: &str = "b, bit, bits, B, byte, bytes";

pub fn parse_rate(text: &str) -> Result<BitRate, UnitError> {
    let (v, unit) = split(text)?;
    let scale = match unit {
        "bps" => 1.0,
        "kbps" | "Kbps" => 1e3,
        "Mbps" => 1e6,
        "Gbps" => 1e9,
        "Tbps" => 1e12,
        _ => {
            return Err(UnitError::UnknownUnit {
                value: text.to_string(),
                unit: unit.to_string(),
                expected: RATE_UNITS,
            })
        }
    };
    BitRate::new(v * scale).map_err(|_| UnitError::OutOfRange(text.to_string()))
}

pub fn parse_duration(text: &str) -> Result<Duration, UnitError> {
    let (v, unit) = split(text)?;
    let scale = match unit {
        "ns" => 1e-9,
        "us" => 1e-6,
        "ms" => 1e-3,
        "s" => 1.0,
        _ => {
            return Err(UnitError::UnknownUnit {
                value: text.to_string(),
                unit: unit.to_string(),
                expected: TIME_UNITS,
            })
        }
    };
    // Seconds are taken verbatim so rendered configs round-trip exactly.
    let secs = if scale == 1.0 { v } else { v * scale };
    Duration::from_secs(secs).map_err(|_| UnitError::OutOfRange(text.to_string()))
}

/// A size in bits. Octet inputs are multiplied by 8; fractional bits are rejected.
pub fn parse_bits(text: &str) -> Result<u64, UnitError> {
    let (v, unit) = split(text)?;
    let bits = match unit {
        "b" | "bit" | "bits" => v,
        "B" | "byte" | "bytes" => v * 8.0,
        _ => {
            return Err(UnitError::UnknownUnit {
                value: text.to_string(),
                unit: unit.to_string(),
                expected: SIZE_UNITS,
            })
        }
    };
    if bits.fract() != 0.0 || bits > u64::MAX as f64 {
        return Err(UnitError::OutOfRange(text.to_string()));
    }
    Ok(bits as u64)
}

pub fn parse_overhead(text: &str) -> Result<OverheadBits, UnitError> {
    parse_bits(text).map(OverheadBits::from_bits)
}

/// Comma-separated list, e.g. `"3.33ms,100ms,1s"`.
pub fn parse_list<T>(text: &str, item: impl Fn(&str) -> Result<T, UnitError>) -> Result<Vec<T>, UnitError> {
    text.split(',').map(|s| item(s.trim())).collect()
}

pub fn render_rate(r: BitRate) -> String {
    format!("{}bps", r.bps())
}

pub fn render_duration(d: Duration) -> String {
    format!("{}s", d.secs())
}

pub fn render_bits(bits: u64) -> String {
    format!("{bits}b")
}
