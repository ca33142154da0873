//! Sharp lower bounds for the first nonzero Neumann eigenvalue of the
//! Finsler-Laplacian, and numerical machinery to check them on discretized
//! Minkowski measure spaces.

pub mod config;
pub mod domain;
pub mod eigensolver;
pub mod error;
pub mod harness;
pub mod model1d;
pub mod norms;

pub use error::{Error, Result};
