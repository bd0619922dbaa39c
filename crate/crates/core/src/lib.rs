//! Random walks killed at square-root boundaries.

pub mod cli;
pub mod error;
pub mod harmonic;
pub mod exponent;
pub mod mc;
pub mod quadrature;
pub mod report;
pub mod walk;
pub mod special_fn;

pub use error::{Error, Result};
