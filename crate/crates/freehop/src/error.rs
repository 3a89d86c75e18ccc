//! Crate-wide error type.
//!
//! Numerical routines in this crate fail for structural reasons (dimension
//! mismatches, non-Hermitian inputs), for domain reasons (transform arguments
//! outside the interval where the transform is defined), or because an
//! iterative solver ran out of budget. Each gets its own variant so callers
//! can distinguish "your input is wrong" from "the solver gave up".

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value that must be finite (input entry, transform result, integrand
    /// evaluation) came out NaN or infinite.
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    /// A spectral atom carries a weight outside (0, 1].
    #[error("spectral atom weight {weight} outside (0, 1]")]
    AtomWeight { weight: f64 },

    /// A spectral atom eigenvalue is more negative than the round-off floor.
    #[error("spectral atom eigenvalue {value} below the clamping floor {floor}")]
    AtomEigenvalue { value: f64, floor: f64 },

    /// Atom weights of a spectral distribution do not sum to one.
    #[error("atom weights sum to {sum}, expected 1 within {tol}")]
    WeightSum { sum: f64, tol: f64 },

    /// A spectral distribution needs at least one atom.
    #[error("spectral distribution needs at least one atom")]
    EmptySpectrum,

    /// The moment series psi(s) is only evaluated on s < 0.
    #[error("psi transform requires s < 0, got s = {s}")]
    PsiDomain { s: f64 },

    /// psi_inverse / s_transform targets must lie strictly inside
    /// (-positive_mass, 0).
    #[error("inverse psi target z = {z} outside (-{mass}, 0)")]
    PsiInverseDomain { z: f64, mass: f64 },

    /// A factor of a chained transform composition failed; `index` is the
    /// hop whose spectrum raised the inner error.
    #[error("transform composition factor {index}: {source}")]
    CompositionFactor {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// An iterative routine exhausted its iteration budget.
    #[error("{context}: no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    /// A bracketing root finder found no sign change over its search interval.
    #[error("{context}: no sign change on the bracket [{lo:e}, {hi:e}]")]
    NoBracket { context: String, lo: f64, hi: f64 },

    /// A fixed-point equation references a spectrum with no mass on positive
    /// eigenvalues, which makes the system degenerate.
    #[error("spectrum {index} carries no mass on positive eigenvalues")]
    ZeroMassSpectrum { index: usize },

    /// Matrix dimensions do not line up.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: String,
        got: String,
    },

    /// A matrix that must be Hermitian is not, beyond tolerance.
    #[error("matrix in {context} is not Hermitian within {tol:e}")]
    NotHermitian { context: String, tol: f64 },

    /// A matrix that must be positive semidefinite has a genuinely negative
    /// eigenvalue.
    #[error("matrix in {context} has eigenvalue {value} below the PSD floor")]
    NotPsd { context: String, value: f64 },

    /// Catch-all for invalid scalar arguments (negative noise level, empty
    /// grids, zero power allocations, ...).
    #[error("{0}")]
    InvalidInput(String),

    /// Experiment configuration problems (missing fields, inconsistent
    /// dimensions, unknown keys surface here via serde).
    #[error("configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    ///
    /// 2 = configuration / input error, 3 = solver non-convergence,
    /// 4 = i/o or serialization failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            Error::NoConvergence { .. } | Error::NoBracket { .. } => 3,
            Error::Io(_) | Error::Json(_) => 4,
            _ => 2,
        }
    }
}
