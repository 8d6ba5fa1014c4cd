use thiserror::Error;

/// Errors shared across the engine.
#[derive(Debug, Error)]
pub enum MoyalError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not antisymmetric: max |A + A^T| entry = {defect:e}")]
    NotAntisymmetric { defect: f64 },

    #[error("singular or rank-deficient matrix in {context}")]
    RankDeficient { context: &'static str },

    #[error("frequency {0:?} is not on the dual lattice (tolerance {1:e})")]
    OffLattice(Vec<f64>, f64),

    #[error("shift {0:?} is not commensurate with the sample lattice")]
    OffGrid(Vec<f64>),

    #[error("grid specs differ: {0}")]
    SpecMismatch(String),

    #[error("operation unsupported on this representation: {0}")]
    UnsupportedRepresentation(&'static str),

    #[error("carrier dimension {dim} exceeds cap {cap}")]
    CarrierTooLarge { dim: usize, cap: usize },

    #[error("plateau radius {radius} does not fit in box of half-width {half_width}")]
    PlateauTooLarge { radius: f64, half_width: f64 },

    #[error("power iteration did not converge after {iterations} iterations; best bracket [{lower:e}, {upper:e}]")]
    NoConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("matrix is not a Lorentz transformation: |L^T eta L - eta| = {defect:e}")]
    NotLorentz { defect: f64 },

    #[error("element is not in the stabilizer of sigma0: |h sigma0 h^T - sigma0| = {defect:e}")]
    NotInStabilizer { defect: f64 },

    #[error("covector is not in ker sigma: |sigma_sharp xi| = {defect:e}")]
    NotInKernel { defect: f64 },

    #[error("metric does not have Lorentzian signature (1, n-1)")]
    WrongSignature,

    #[error("unknown base point id {0}")]
    UnknownPoint(String),

    #[error("empty subset of base points")]
    EmptySubset,

    #[error("section fiber kinds are incompatible: {0}")]
    KindMismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, MoyalError>;
