use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Pauli index {0} out of range 0..=3")]
    PauliIndex(usize),

    #[error("operator is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("operator dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("kron chain needs at least one factor")]
    EmptyKron,

    #[error("kept sites {keep:?} are not a subset of 0..{n_sites}")]
    NotSubset { keep: Vec<usize>, n_sites: usize },

    #[error("inverse temperature must be finite and positive, got {0}")]
    InvalidBeta(f64),

    #[error("beta = {beta} lies outside the open window ({lo}, {hi})")]
    OutsideWindow { beta: f64, lo: f64, hi: f64 },

    #[error("no sign change of the polynomial on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("several preimages in the domain for ratio {ratio}: {roots:?}")]
    AmbiguousBranch { ratio: f64, roots: Vec<f64> },

    #[error("point ({x}, {y}) is outside the domain x > y >= 0")]
    OutsideDomain { x: f64, y: f64 },

    #[error("trajectory not classified after {steps} steps")]
    MaxStepsExceeded { steps: usize },

    #[error("period must be at least 2, got {0}")]
    InvalidPeriod(usize),

    #[error("volume of {sites} sites exceeds the cap of {cap}")]
    VolumeTooLarge { sites: usize, cap: usize },

    #[error("site {0} is not part of the gate program")]
    UnindexedSite(String),

    #[error("two-site gate needs distinct sites, got {0} twice")]
    CoincidentSites(String),

    #[error("observable acts on {0}, outside the evaluated volume")]
    SupportOutsideVolume(String),

    #[error("field ({h0}, {h1}) is not positive definite (need h0 > |h1|)")]
    NonPositiveField { h0: f64, h1: f64 },

    #[error("invalid boundary condition: {0}")]
    InvalidBoundary(String),
}
