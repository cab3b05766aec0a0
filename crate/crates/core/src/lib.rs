//! Sharp constants of the Hardy-Sobolev inequality with iterated-logarithm
//! weights, and the numerics that certify them: singular-weight radial
//! quadrature, coordinate changes between the ball and the half-line
//! frames, truncated Rayleigh-quotient minimization and concentrating
//! bubble sweeps.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod cli;
pub mod constants;
pub mod error;
pub mod radial;
pub mod special_fn;
pub mod variational;

pub use error::{Error, Result};
pub use special_fn::Dimension;
