use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} must lie in [0, 1], got {value}")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("{name} must be at least 1")]
    ZeroCount { name: &'static str },

    #[error("attenuation length must be positive, got {0}")]
    NonPositiveAttenuation(f64),

    #[error("node spacing must be non-negative, got {0}")]
    NegativeDistance(f64),

    #[error("register capacity is {max} sites, requested {requested}")]
    CapacityExceeded { requested: usize, max: usize },

    #[error("site index {site} out of range for register of {num_sites} sites")]
    SiteOutOfRange { site: usize, num_sites: usize },

    #[error("sites must be distinct, got {0} twice")]
    DuplicateSite(usize),

    #[error("bitstring length {got} does not match register size {expected}")]
    BitstringLength { got: usize, expected: usize },

    #[error("bitstring may only contain '0' and '1', got {0:?}")]
    BadBitstring(char),

    #[error("state is not normalized: |psi|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("forced measurement outcome has probability {prob:.3e}")]
    ImpossibleOutcome { prob: f64 },

    #[error("measurement outcome is not deterministic (p0 = {p0:.6}, p1 = {p1:.6})")]
    AmbiguousOutcome { p0: f64, p1: f64 },

    #[error("loss pattern length {got} does not match code size {expected}")]
    PatternShape { got: usize, expected: usize },

    #[error("loss pattern violates the recovery condition; failure is heralded")]
    HeraldedFailure,

    #[error("invalid photon assignment: {0}")]
    InvalidAssignment(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("exact enumeration limited to {max} qubits, got {got}")]
    EnumerationTooLarge { got: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
