//! Joint probabilistic and geometric shaping of 4D constellations for
//! nonlinear fiber links.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod air;
pub mod channel;
pub mod constellation;
pub mod error;
pub mod experiment;
pub mod numeric;
pub mod optimizer;

pub use error::{Error, Result};
