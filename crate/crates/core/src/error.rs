use thiserror::Error;

/// Errors surfaced by the numerical machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not converge: {panels} panels, error {achieved:.3e} > {required:.3e} on [{lo}, {hi}]")]
    NonConvergence {
        panels: usize,
        achieved: f64,
        required: f64,
        lo: f64,
        hi: f64,
    },

    #[error("decay hint {rate} violated: |g({at})| = {value:.3e} exceeds the sampled tail envelope")]
    InvalidDecayHint { rate: f64, at: f64, value: f64 },

    #[error("argument lies on the closed negative real axis: {0}")]
    NegativeAxis(num_complex::Complex<f64>),

    #[error("divergent Stieltjes representation: piece [{lo}, inf) with exponent {exponent} and order {alpha}")]
    DivergentRepresentation { lo: f64, exponent: f64, alpha: f64 },

    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("order alpha = {0} outside the admissible range {1}")]
    InvalidOrder(f64, &'static str),

    #[error("dimension mismatch: generator has {expected}, vector has {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("generator is not injective (eigenvalue 0) but the function has mass at tau = 0")]
    NonInjective,

    #[error("singular solve: I + (t/n)A is not invertible")]
    SingularSolve,

    #[error("probe eigenvalue {0} is not on the spectrum list")]
    MissingProbeEigenvalue(num_complex::Complex<f64>),

    #[error("operator-side evaluation supports representation orders 1 and 2, got {0}")]
    UnsupportedOperatorOrder(f64),

    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
