use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid bit rate {0}: must be finite and non-negative")]
    InvalidRate(f64),
    #[error("negative bit rate: {lhs} - {rhs}")]
    NegativeRate { lhs: f64, rhs: f64 },
    #[error("invalid duration {0}: must be finite and positive")]
    InvalidDuration(f64),
    #[error("overhead bit count overflow")]
    OverheadOverflow,

    #[error("no flows")]
    NoFlows,
    #[error("duplicate flow id `{0}`")]
    DuplicateFlowId(String),
    #[error("duplicate method id `{0}`")]
    DuplicateMethodId(String),
    #[error("flow `{0}` has zero rate")]
    ZeroRate(String),
    #[error("flow `{0}` has zero packet size")]
    ZeroPacketSize(String),
    #[error("link has zero capacity")]
    ZeroCapacity,
    #[error("method `{method}` references unknown flow `{flow}`")]
    UnknownFlow { method: String, flow: String },
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("invalid method: {0}")]
    InvalidMethod(String),

    #[error("period exceeds horizon: {period}s > {horizon}s ({what})")]
    PeriodExceedsHorizon { what: String, period: f64, horizon: f64 },
    #[error("failure time {failure_time}s outside horizon [0, {horizon}s)")]
    FailureOutsideHorizon { failure_time: f64, horizon: f64 },
    #[error("no carrier packets for method `{0}`")]
    NoCarrierPackets(String),
    #[error("scale cap exceeded: {events} events > cap {cap} (use fluid mode)")]
    ScaleCapExceeded { events: u64, cap: u64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
