//! Numerical laboratory for convergence rates of the backward-Euler
//! (Post-Widder) approximation `(I + (t/n)A)^{-n}` of a bounded
//! C0-semigroup `e^{-tA}`.
//!
//! The crate evaluates the approximation error on concrete generator models,
//! computes the Stieltjes-function error envelopes and Laplace-domain kernel
//! bounds by quadrature, and checks every quantitative constant of the
//! underlying estimates (`12`, `8M`, `3t^2/(2n)`, `t/sqrt(n)`,
//! `(1 - 1/sqrt(2))/2`) at desk scale.

// `!(x > 0.0)` guards reject NaN along with the out-of-range values;
// `x <= 0.0` would let NaN through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernel;
pub mod operator;
pub mod quadrature;
pub mod scalar;
pub mod stieltjes;

pub use error::{Error, Result};
pub use quadrature::QuadratureSpec;

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
