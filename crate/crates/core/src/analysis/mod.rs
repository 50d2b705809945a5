//! Uncertainty-relation checks and the experiment sweeps built on them.

mod curves;
mod regression;
mod relation;
mod sweep;

pub use curves::{hyperbola_reference, observed_loss_onset, observed_vs_unobserved_curve, OvuRow};
pub use regression::{linear_fit, weighted_linear_fit, LinearFit};
pub use relation::{check_relation, RelationRecord};
pub use sweep::{
    fluid_impact, impact_vs_uncertainty_sweep, rate_scaling_sweep, scaling_sweep, EvalMode, FluidPolicy, SweepGrid,
    SweepOptions, SweepPoint, SweepResult, SweepVariable, DEFAULT_EVENT_CAP,
};
