//! Unit-carrying scalars. Everything is bits, bits per second and seconds
//! internally; octet inputs are converted at construction.

use std::fmt;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// A non-negative data rate in bits per second.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct BitRate(f64);

impl BitRate {
    pub const ZERO: BitRate = BitRate(0.0);

    pub fn new(bps: f64) -> Result<Self> {
        if bps.is_finite() && bps >= 0.0 {
            Ok(BitRate(bps))
        } else {
            Err(Error::InvalidRate(bps))
        }
    }

    pub fn from_kbps(kbps: f64) -> Result<Self> {
        Self::new(kbps * 1e3)
    }

    pub fn from_mbps(mbps: f64) -> Result<Self> {
        Self::new(mbps * 1e6)
    }

    pub fn from_gbps(gbps: f64) -> Result<Self> {
        Self::new(gbps * 1e9)
    }

    pub fn bps(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    /// Subtraction that refuses to go below zero instead of clamping.
    pub fn checked_sub(self, rhs: BitRate) -> Result<BitRate> {
        let v = self.0 - rhs.0;
        if v < 0.0 {
            Err(Error::NegativeRate {
                lhs: self.0,
                rhs: rhs.0,
            })
        } else {
            Ok(BitRate(v))
        }
    }

    /// Bits carried over `period` at this rate.
    pub fn bits_over(self, period: Duration) -> f64 {
        self.0 * period.secs()
    }
}

impl Add for BitRate {
    type Output = BitRate;

    fn add(self, rhs: BitRate) -> BitRate {
        BitRate(self.0 + rhs.0)
    }
}

impl std::iter::Sum for BitRate {
    fn sum<I: Iterator<Item = BitRate>>(iter: I) -> BitRate {
        iter.fold(BitRate::ZERO, Add::add)
    }
}

impl fmt::Display for BitRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}bps", self.0)
    }
}

/// A strictly positive span of time in seconds.
///
/// Used for measurement periods, simulation horizons and packet spacing.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Duration(f64);

impl Duration {
    pub fn from_secs(secs: f64) -> Result<Self> {
        if secs.is_finite() && secs > 0.0 {
            Ok(Duration(secs))
        } else {
            Err(Error::InvalidDuration(secs))
        }
    }

    pub fn from_millis(ms: f64) -> Result<Self> {
        Self::from_secs(ms * 1e-3)
    }

    pub fn secs(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.0)
    }
}

/// A whole number of overhead bits. Overhead always arrives in whole octets,
/// so the usual constructor is [`OverheadBits::from_octets`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OverheadBits(u64);

impl OverheadBits {
    pub const ZERO: OverheadBits = OverheadBits(0);

    pub const fn from_octets(octets: u64) -> Self {
        OverheadBits(octets * 8)
    }

    pub const fn from_bits(bits: u64) -> Self {
        OverheadBits(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// Whole octets, if the count is octet aligned.
    pub fn octets(self) -> Option<u64> {
        (self.0 % 8 == 0).then_some(self.0 / 8)
    }

    pub fn checked_add(self, rhs: OverheadBits) -> Result<Self> {
        self.0
            .checked_add(rhs.0)
            .map(OverheadBits)
            .ok_or(Error::OverheadOverflow)
    }

    pub fn checked_mul(self, n: u64) -> Result<Self> {
        self.0.checked_mul(n).map(OverheadBits).ok_or(Error::OverheadOverflow)
    }

    pub fn checked_sub(self, rhs: OverheadBits) -> Option<Self> {
        self.0.checked_sub(rhs.0).map(OverheadBits)
    }

    /// Average rate when these bits are emitted once per `period`.
    pub fn per(self, period: Duration) -> BitRate {
        BitRate(self.0 as f64 / period.secs())
    }
}

impl Add for OverheadBits {
    type Output = OverheadBits;

    /// Panics on overflow; use [`OverheadBits::checked_add`] for untrusted input.
    fn add(self, rhs: OverheadBits) -> OverheadBits {
        self.checked_add(rhs).expect("overhead bit count overflow")
    }
}

impl Mul<u64> for OverheadBits {
    type Output = OverheadBits;

    fn mul(self, n: u64) -> OverheadBits {
        self.checked_mul(n).expect("overhead bit count overflow")
    }
}

impl fmt::Display for OverheadBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rates_reject_negative_and_nan() {
        assert!(BitRate::new(-1.0).is_err());
        assert!(BitRate::new(f64::NAN).is_err());
        assert!(BitRate::new(f64::INFINITY).is_err());
        assert_eq!(BitRate::new(0.0).unwrap(), BitRate::ZERO);
        assert_eq!(BitRate::from_mbps(1.0).unwrap().bps(), 1e6);
    }

    #[test]
    fn rate_subtraction_errors_instead_of_clamping() {
        let a = BitRate::from_mbps(1.0).unwrap();
        let b = BitRate::from_mbps(2.0).unwrap();
        assert_eq!(b.checked_sub(a).unwrap().bps(), 1e6);
        assert!(matches!(a.checked_sub(b), Err(Error::NegativeRate { .. })));
    }

    #[test]
    fn durations_must_be_positive() {
        assert!(Duration::from_secs(0.0).is_err());
        assert!(Duration::from_secs(-0.1).is_err());
        assert!(Duration::from_secs(f64::NAN).is_err());
        assert_eq!(Duration::from_millis(100.0).unwrap().secs(), 0.1);
    }

    #[test]
    fn octets_convert_to_bits() {
        assert_eq!(OverheadBits::from_octets(101).bits(), 808);
        assert_eq!(OverheadBits::from_octets(204).bits(), 1632);
        assert_eq!(OverheadBits::from_octets(80).octets(), Some(80));
        assert_eq!(OverheadBits::from_bits(3).octets(), None);
    }

    #[test]
    fn overhead_rate_per_period() {
        let r = OverheadBits::from_octets(101).per(Duration::from_secs(1.0).unwrap());
        assert_eq!(r.bps(), 808.0);
    }

    proptest! {
        #[test]
        fn overhead_arithmetic_never_goes_negative(a in 0u64..1 << 40, b in 0u64..1 << 40) {
            let x = OverheadBits::from_bits(a);
            let y = OverheadBits::from_bits(b);
            match x.checked_sub(y) {
                Some(d) => prop_assert_eq!(d.bits() + b, a),
                None => prop_assert!(a < b),
            }
            prop_assert_eq!((x + y).bits(), a + b);
        }

        #[test]
        fn rate_addition_stays_valid(a in 0.0f64..1e12, b in 0.0f64..1e12) {
            let s = BitRate::new(a).unwrap() + BitRate::new(b).unwrap();
            prop_assert!(BitRate::new(s.bps()).is_ok());
        }
    }
}
