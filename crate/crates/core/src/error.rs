use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero polynomial has no roots")]
    ZeroPolynomial,

    #[error("no Jordan chain extension: system inconsistent (residual {residual:.3e})")]
    Inconsistent { residual: f64 },

    #[error("{which} is not symmetric (defect {defect:.3e})")]
    Asymmetric { which: &'static str, defect: f64 },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("verification failed: {what} (residual {residual:.3e}, tolerance {tolerance:.1e})")]
    Verification {
        what: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("chain has vanishing top pairing |A_(M-1)| = {value:.3e}")]
    ImpossibleNormalization { value: f64 },

    #[error("quadratic form on the top vectors at {omega} vanishes identically")]
    QuadraticFormVanishes { omega: Complex64 },

    #[error("no conjugate partner within tolerance for eigenvalue {omega}")]
    PairingFailure { omega: Complex64 },

    #[error("numerical convergence failure: {0}")]
    Convergence(String),

    #[error("frequency {omega} lies on the pole {pole}")]
    AtPole { omega: Complex64, pole: Complex64 },

    #[error("perturbation is non-generic (|xi| = {xi_abs:.3e}); use the non-generic path")]
    NonGeneric { xi_abs: f64 },

    #[error("perturbation is generic (|xi| = {xi_abs:.3e}); non-generic analysis does not apply")]
    Generic { xi_abs: f64 },

    #[error("higher-order non-genericity: both xi and xi' vanish; diagonalize numerically")]
    HigherOrderNonGeneric,

    #[error("expected exactly one nontrivial Jordan block, found {0}")]
    NotSingleBlock(usize),

    #[error("system has no eigenvalue near {0}")]
    NotCritical(Complex64),

    #[error("eigenvalue matching is ambiguous: shift {shift:.3e} exceeds half the gap {gap:.3e}")]
    AmbiguousMatching { shift: f64, gap: f64 },

    #[error("perturbed system is still non-diagonalizable at epsilon = {0:e}")]
    StillDefective(f64),

    #[error("no real solution: {0}")]
    NoRealSolution(String),

    #[error("unknown catalog entry '{0}'")]
    UnknownCatalog(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
