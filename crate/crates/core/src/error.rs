use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pilots cannot be orthogonal: {users} users but pilot length {pilot_len}")]
    PilotsNotOrthogonal { users: usize, pilot_len: usize },

    #[error("empty data phase: coherence length {coherence_len} must exceed pilot length {pilot_len}")]
    EmptyDataPhase {
        coherence_len: usize,
        pilot_len: usize,
    },

    #[error("{antennas} BS antennas cannot resolve {required} uplink sources")]
    TooFewAntennas { antennas: usize, required: usize },

    #[error("`{field}` must be strictly positive, got {value}")]
    NonPositive { field: String, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error(
        "Hermitian eigensolver did not converge (dim {dim}, ‖G‖_F = {frobenius:e}, max asymmetry {asymmetry:e})"
    )]
    EigenNoConvergence {
        dim: usize,
        frobenius: f64,
        asymmetry: f64,
    },

    #[error("zero-norm vector in {0}")]
    ZeroVector(&'static str),

    #[error("need at least {needed} trials, got {got}")]
    TooFewTrials { needed: usize, got: usize },

    #[error("artificial-noise power split phi must lie in (0, 1], got {0}")]
    InvalidPhi(f64),

    #[error("no artificial-noise null space: {users} users on {antennas} antennas")]
    NoNullSpace { users: usize, antennas: usize },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
