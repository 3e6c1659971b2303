use thiserror::Error;

/// A single reason a [`PollingSpec`](crate::model::PollingSpec) was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("station {station}: regime law has no atoms")]
    EmptyLaw { station: usize },
    #[error("station {station}: atom weights must be positive and sum to 1 (sum = {sum})")]
    BadWeights { station: usize, sum: f64 },
    #[error("station {station}, atom {atom}: feedback probabilities out of range")]
    GammaOutOfRange { station: usize, atom: usize },
    #[error("station {station}, atom {atom}: gamma has length {got}, expected {expected}")]
    GammaLength { station: usize, atom: usize, got: usize, expected: usize },
    #[error("station {station}, atom {atom}: ellipticity fails (mu = {mu}, lambda = {lambda})")]
    ConditionE { station: usize, atom: usize, mu: f64, lambda: f64 },
    #[error("station {station}: arrival rate must be positive and finite (got {lambda})")]
    BadArrivalRate { station: usize, lambda: f64 },
    #[error("expected {expected} regime laws, got {got}")]
    LawCount { expected: usize, got: usize },
    #[error("expected {expected} arrival rates, got {got}")]
    RateCount { expected: usize, got: usize },
    #[error("system needs d >= 1")]
    NoStations,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {}", join(.0))]
    Validation(Vec<Violation>),
    #[error("division by nonpositive drain rate {0}")]
    DivisionByNonpositive(f64),
    #[error("nonpositive drain rate {0} in fluid model")]
    NonpositiveDrain(f64),
    #[error("regime feedback vector has length {got}, expected {expected}")]
    RegimeShape { got: usize, expected: usize },
    #[error("power iteration did not converge (best estimate {estimate})")]
    NoConvergence { estimate: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("insufficient tail: {0}")]
    InsufficientTail(String),
    #[error("fluid model diverged from a branch of the drift enumeration")]
    DivergedFluid,
    #[error("product norm collapsed to zero")]
    DegenerateNorm,
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
