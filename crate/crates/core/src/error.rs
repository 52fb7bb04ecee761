use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),

    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("leakage {leakage:.3e} exceeds threshold {threshold:.3e}")]
    Leakage { leakage: f64, threshold: f64 },

    #[error("integration unstable: {0}")]
    Unstable(String),

    #[error("scheme is not matched to the atom couplings: {0}")]
    Unmatched(String),

    #[error("resonance condition violated: {0}")]
    Resonance(String),

    #[error("argument outside grid bound: |beta| = {modulus} > {bound}")]
    OutOfGrid { modulus: f64, bound: f64 },

    #[error("dimension budget exceeded: {0}")]
    Budget(String),
}

impl Error {
    /// Errors raised by a numerical contract (truncation, integration) rather
    /// than by invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Leakage { .. } | Error::Unstable(_) | Error::CutoffTooSmall(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
