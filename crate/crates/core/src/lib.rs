//! Function parameters of O-regular variation and the Hilbert scales they
//! index: RO certificates and Matuszewska indices, the `phi <-> psi`
//! transforms between Hörmander and interpolation parameters, diagonal
//! models of interpolation between Sobolev spaces, discrete Hörmander and
//! quotient norms, and the slowly varying parameter that is not an
//! interpolation parameter.
//!
//! Asymptotic quantities are computed in log-log coordinates
//! (`x = log t`, `y = log phi`), so arguments up to `exp(1e6)` are fine.

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod grid;
pub mod logdomain;
pub mod param;
pub mod spectral;
pub mod xlab;

pub use error::{Error, Result};
pub use param::ParamExpr;
