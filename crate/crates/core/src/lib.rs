//! Simulated annealing driven by a second-order Langevin sampler, with an
//! optional polyharmonic-spline surrogate of the cost.

pub mod annealing;
pub mod bench;
pub mod config;
pub mod constraints;
pub mod error;
pub mod io;
pub mod isde;
pub mod objectives;
pub mod surrogate;
pub mod vector;

pub use error::{Error, Result};
