//! Exact multi-Gieseker stability computations on low-dimensional projective
//! manifolds: multi-Hilbert polynomials, walls and chambers, uniform
//! stability segments and the σ → η → ζ refinement producing flip schedules.

#![allow(clippy::result_large_err)]

pub mod chow;
pub mod error;
pub mod exact;
pub mod io;
pub mod plan;
pub mod segments;
pub mod sheaves;
pub mod stability;
pub mod walls;

pub use error::{Error, Result};
