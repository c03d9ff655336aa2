//! Numerical spectral theory for full-line CMV operators.
//!
//! Build the five-diagonal unitary from a sequence of Verblunsky
//! coefficients, split it at a site by setting one coefficient to 1,
//! and compare the two: Green's functions, half-line m-functions and their
//! boundary values, Weyl solutions, and the 2×2 scattering matrix of the
//! coupled/decoupled pair together with the reflectionless test.
//!
//! Every infinite object is realized through exactly unitary finite
//! truncations (edge decoupling) whose size grows until the requested
//! quantity stops changing.

// NaN-rejecting comparisons are written as `!(x > 0)` on purpose.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod cli;
pub mod coefficients;
pub mod dynamics;
pub mod error;
pub mod operator;
pub mod oracle;
pub mod plot;
pub mod resolvent;
pub mod scattering;
pub mod weyl;

pub use coefficients::{CoefficientSequence, Generator};
pub use error::{CmvError, Result};
pub use operator::{BandedUnitary, DefectOperator, Window};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Library version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
