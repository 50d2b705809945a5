use std::collections::BTreeMap;
use std::ops::AddAssign;

use crate::scenario::{FlowId, MethodId};
use crate::units::{BitRate, Duration};

/// Offered, delivered and dropped bit counts for one traffic category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    pub offered: u64,
    pub delivered: u64,
    pub dropped: u64,
}

impl Counters {
    pub fn record(&mut self, bits: u64, admitted: bool) {
        self.offered += bits;
        if admitted {
            self.delivered += bits;
        } else {
            self.dropped += bits;
        }
    }

    pub fn is_conserved(&self) -> bool {
        self.offered == self.delivered + self.dropped
    }
}

impl AddAssign for Counters {
    fn add_assign(&mut self, rhs: Counters) {
        self.offered += rhs.offered;
        self.delivered += rhs.delivered;
        self.dropped += rhs.dropped;
    }
}

/// Accounting of one simulation run.
///
/// Flow counters hold user bits only. Overhead bits (probe and export packets,
/// and the bits in-band telemetry adds to sampled packets) are accounted per
/// method and in the `overhead` aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub per_flow: BTreeMap<FlowId, Counters>,
    pub per_method: BTreeMap<MethodId, Counters>,
    pub overhead: Counters,
    pub duration: Duration,
    pub seed: u64,
    pub events: u64,
}

impl SimReport {
    /// User and overhead bits together.
    pub fn total(&self) -> Counters {
        let mut t = self.overhead;
        for c in self.per_flow.values() {
            t += *c;
        }
        t
    }

    pub fn user(&self) -> Counters {
        let mut t = Counters::default();
        for c in self.per_flow.values() {
            t += *c;
        }
        t
    }

    fn rate(&self, bits: u64) -> BitRate {
        BitRate::new(bits as f64 / self.duration.secs()).expect("non-negative")
    }

    pub fn offered_rate(&self) -> BitRate {
        self.rate(self.total().offered)
    }

    /// Delivered wire bits per second, overhead included.
    pub fn delivered_rate(&self) -> BitRate {
        self.rate(self.total().delivered)
    }

    /// Dropped wire bits per second, overhead included.
    pub fn loss_rate(&self) -> BitRate {
        self.rate(self.total().dropped)
    }

    /// Offered overhead bits per second.
    pub fn overhead_rate(&self) -> BitRate {
        self.rate(self.overhead.offered)
    }

    pub fn is_conserved(&self) -> bool {
        self.overhead.is_conserved()
            && self.per_flow.values().all(Counters::is_conserved)
            && self.per_method.values().all(Counters::is_conserved)
            && self.total().is_conserved()
    }
}
