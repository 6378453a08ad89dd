//! Mixed-precision FGMRES laboratory.
//!
//! Every arithmetic kernel runs in a [`precision::Format`] chosen at call
//! time: IEEE half/single/double, a 14-bit "four decimal digit" format and a
//! double-double quad format used both as a working format and as the
//! oracle for error measurements.

pub mod densela;
pub mod diagnostics;
pub mod error;
pub mod fgmres;
pub mod precision;
pub mod problems;

pub use error::{Error, Result};
