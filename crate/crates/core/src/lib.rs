//! Finite-volume wave propagation in coupled poroelastic and fluid media on
//! mapped hexahedral grids.

pub mod error;
pub mod grid;
pub mod harness;
pub mod limiter;
pub mod materials;
pub mod planewave;
pub mod riemann;
pub mod solver;
pub mod state;
pub mod system;

pub use error::{Error, Result};
