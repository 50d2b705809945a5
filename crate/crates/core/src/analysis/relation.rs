use crate::metric::{Impact, Uncertainty};
use crate::units::OverheadBits;

/// One `(ΔM, ΔP, ħ)` triple and whether `ΔM · ΔP ≥ C_ΔM · ħ` holds.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationRecord {
    pub delta_m: Uncertainty,
    pub delta_p: Impact,
    pub hbar: OverheadBits,
    /// `ΔM · ΔP` in metric units × bits/s.
    pub product: f64,
    /// `C_ΔM · ħ`; plain bits for detection time.
    pub bound: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub holds: bool,
    /// Zero metric slope with a non-zero observer factor: the bound collapses
    /// to zero and the check says nothing.
    pub degenerate: bool,
}

impl RelationRecord {
    /// `product / bound`; infinite or NaN when the bound is zero.
    pub fn ratio(&self) -> f64 {
        self.product / self.bound
    }

    /// Impact on the reference hyperbola at this record's uncertainty.
    pub fn impact_bound(&self) -> f64 {
        self.bound / self.delta_m.value()
    }
}

/// Checks the relation with a relative `tolerance` on the bound.
pub fn check_relation(delta_m: Uncertainty, delta_p: Impact, hbar: OverheadBits, tolerance: f64) -> RelationRecord {
    let product = delta_m.value() * delta_p.value.bps();
    let bound = delta_m.slope() * hbar.bits() as f64;
    let holds = product >= bound * (1.0 - tolerance);
    let degenerate = delta_m.slope() == 0.0 && hbar.bits() > 0;
    RelationRecord {
        slack: product - bound,
        delta_m,
        delta_p,
        hbar,
        product,
        bound,
        tolerance,
        holds,
        degenerate,
    }
}
