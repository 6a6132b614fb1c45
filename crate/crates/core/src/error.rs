use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected (n={expected_n}, d={expected_d}), got (n={got_n}, d={got_d})")]
    DimensionMismatch {
        expected_n: usize,
        expected_d: usize,
        got_n: usize,
        got_d: usize,
    },

    #[error("batch element {index}: {source}")]
    BatchElement {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("particles {first} and {second} coincide within tolerance")]
    CollidingInput { first: usize, second: usize },

    #[error("no projection separates all particles by more than {tolerance:e}")]
    NoneFound { tolerance: f64 },

    #[error("exhaustive orbit check over {n}! permutations is infeasible (limit n <= {limit})")]
    OrbitCheckInfeasible { n: usize, limit: usize },

    #[error("configuration has no coinciding particle pair")]
    NoCollision,

    #[error("feature dimension m={m} is smaller than n*d={nd}; full column rank is impossible")]
    SpecTooSmall { m: usize, nd: usize },

    #[error("ridge system is ill-conditioned (estimate {estimate:e} > {limit:e}); increase the ridge strength")]
    IllConditioned { estimate: f64, limit: f64 },

    #[error("target evaluated outside its domain: {0}")]
    DomainViolation(String),

    #[error("epsilon must be positive, got {0}")]
    NonpositiveEps(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
