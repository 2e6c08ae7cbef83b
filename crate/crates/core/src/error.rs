use thiserror::Error;

use crate::deformation::Family;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("even-power family needs a > 0 for a confining well, got a = {a}")]
    NonConfining { a: f64 },
    #[error("operation expects the {expected:?} family, got {found:?}")]
    InvalidFamily { expected: Family, found: Family },
    #[error("r^-6 (even) or r^-4 (inverse) coefficient vanishes; the closed form does not apply")]
    DegenerateDeformation,
    #[error("attractive singular term d = {d} makes the spectrum unbounded below (fall to the center)")]
    SingularAttraction { d: f64 },
    #[error("solvability residual {residual:e} exceeds tolerance {tolerance:e}")]
    ConstraintViolated { residual: f64, tolerance: f64 },
    #[error("no parameter value satisfies the truncation conditions in the searched range")]
    NoConsistentParameter,
    #[error("polynomial degree {0} is not supported (1..=3)")]
    UnsupportedDegree(usize),
    #[error("no Newton seed converged to a real solution (best residual {best_residual:e})")]
    NoRealSolution { best_residual: f64 },
    #[error("nu = 0 with theta != 0; the expanded omega^2 form divides by nu")]
    DivisionByZeroNu,
    #[error("quadratic for B has complex roots (discriminant {discriminant:e})")]
    ComplexRoots { discriminant: f64 },
    #[error("eigenvalue did not converge: coarse grid {coarse}, fine grid {fine}")]
    NotConverged { coarse: f64, fine: f64 },
    #[error("no bound state below zero in the search window")]
    NoBoundState,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),
}

impl Error {
    /// Stable kebab-case code for status columns.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonConfining { .. } => "non-confining",
            Error::InvalidFamily { .. } => "invalid-family",
            Error::DegenerateDeformation => "degenerate-deformation",
            Error::SingularAttraction { .. } => "singular-attraction",
            Error::ConstraintViolated { .. } => "constraint-violated",
            Error::NoConsistentParameter => "no-consistent-parameter",
            Error::UnsupportedDegree(_) => "unsupported-degree",
            Error::NoRealSolution { .. } => "no-real-solution",
            Error::DivisionByZeroNu => "division-by-zero-nu",
            Error::ComplexRoots { .. } => "complex-roots",
            Error::NotConverged { .. } => "not-converged",
            Error::NoBoundState => "no-bound-state",
            Error::InvalidGrid(_) => "invalid-grid",
            Error::InvalidInput(_) => "invalid-input",
            Error::OracleUnavailable(_) => "oracle-unavailable",
        }
    }
}
