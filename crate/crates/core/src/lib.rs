//! Measurement-overhead modelling for network telemetry.
//!
//! The crate covers three measurement classes (passive export, active probing
//! and in-band telemetry), a deterministic packet-level simulator for a single
//! capacity-limited link, a closed-form fluid model used as an oracle, and the
//! analysis layer that checks the uncertainty/impact tradeoff
//! `ΔM · ΔP ≥ ħ` against simulated twin runs.

pub mod analysis;
pub mod error;
pub mod methods;
pub mod metric;
pub mod scenario;
pub mod sim;
pub mod units;

pub use error::{Error, Result};
pub use methods::{InBandTelemetry, MeasurementMethod, MethodClass};
pub use metric::{Impact, ImpactKind, Uncertainty};
pub use scenario::{validate_scenario, FlowId, FlowSpec, LinkSpec, MethodBinding, MethodId, Scenario};
pub use units::{BitRate, Duration, OverheadBits};
