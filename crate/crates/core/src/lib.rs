//! Simulation, exact moments and statistical verification for the random
//! graph grown by sampling uniformly, without replacement, from a pool of
//! virtual vertices and edges.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod model;
pub mod moments;
pub mod numeric;
pub mod verify;

pub use error::{Error, Result};
