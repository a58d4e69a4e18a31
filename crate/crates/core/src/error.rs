use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("degree variance is zero on one side of the edge pairs; assortativity is undefined")]
    DegenerateDegrees,

    #[error("invalid generator config: {0}")]
    InvalidConfig(String),

    #[error("degree sequence infeasible: n*k_in = {required} exceeds n*(n-1) = {capacity}")]
    InfeasibleSequence { required: u64, capacity: u64 },

    #[error("stub mismatch: out-stubs {out_stubs} != in-stubs {in_stubs}")]
    StubMismatch { out_stubs: u64, in_stubs: u64 },

    #[error("self-loop elimination gave up after {attempts} swap attempts")]
    MatchingStuck { attempts: u64 },

    #[error("rewiring did not reach target r={target} within {steps} steps (best r={best_r})")]
    TargetUnreachable { target: f64, best_r: f64, steps: u64 },

    #[error("threshold level count must be >= 2, got {0}")]
    InvalidLevels(usize),

    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),

    #[error("node {0} has no in-neighbors")]
    NoInNeighbors(usize),

    #[error("opinion state is empty")]
    EmptyState,

    #[error("no input rows")]
    EmptyInput,

    #[error("duplicate record id {id:?} on line {line}")]
    DuplicateId { id: String, line: usize },

    #[error("malformed record on line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("power-law fit needs at least 3 distinct positive degrees, got {0}")]
    InsufficientSupport(usize),

    #[error("need at least {needed} polarity records, got {got}")]
    TooFewRecords { needed: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
