use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Doubling the Gauss–Hermite point count moved an overlap integral by
    /// more than the convergence tolerance.
    #[error("quadrature unconverged: {points} -> {points2} points changed the result by {delta:e}")]
    QuadratureUnconverged {
        points: usize,
        points2: usize,
        delta: f64,
    },

    /// The calibrated (12,01,11) overlap is too far from its reference value,
    /// which signals a broken mode-function convention.
    #[error("calibration mismatch: calibrated (12,01,11) overlap is {got}, expected {expected} +/- {tol}")]
    CalibrationMismatch { got: f64, expected: f64, tol: f64 },

    #[error("symmetric eigensolver did not converge")]
    EigenNotConverged,

    #[error("unknown mode index {0} (valid: 1..=5 within the matrix's mode list)")]
    UnknownMode(usize),

    #[error("conditioning block is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("symplectic eigenvalues do not pair: |{0} - {1}| exceeds tolerance")]
    PairingFailure(f64, f64),

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
