use crate::scenario::Scenario;
use crate::units::BitRate;

/// Closed-form long-run rates for a scenario, treating traffic as a fluid.
///
/// With user rate `R`, overhead `Ov` and capacity `C`: delivered is
/// `min(R + Ov, C)` and dropped is `max(0, R + Ov - C)`; an overprovisioned
/// link has `C = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidRates {
    pub user: BitRate,
    pub overhead: BitRate,
    pub offered: BitRate,
    pub delivered: BitRate,
    pub dropped: BitRate,
}

pub fn fluid_oracle(scenario: &Scenario) -> FluidRates {
    let user: BitRate = scenario.flows().iter().map(|f| f.user_rate()).sum();
    let overhead: BitRate = scenario
        .methods()
        .iter()
        .map(|m| m.method.overhead_rate(scenario.flow_of(m)))
        .sum();
    let offered = user + overhead;
    let (delivered, dropped) = if scenario.link().is_overprovisioned() {
        (offered, BitRate::ZERO)
    } else {
        let cap = scenario.link().capacity();
        match offered.checked_sub(cap) {
            Ok(excess) => (cap, excess),
            Err(_) => (offered, BitRate::ZERO),
        }
    };
    FluidRates {
        user,
        overhead,
        offered,
        delivered,
        dropped,
    }
}
