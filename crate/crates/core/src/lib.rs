//! Quantum time-of-arrival operators for polynomial potentials.

pub mod classical;
pub mod error;
pub mod expectation;
pub mod format;
pub mod kernel;
pub mod moyal;
pub mod quartic;
pub mod series;
pub mod specfun;

pub use error::{Error, Result};
