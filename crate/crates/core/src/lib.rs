//! Simulation and verification toolkit for minimum-weight paths on the
//! complete graph `K_n` with independent exponential edge weights.

pub mod combinat;
pub mod error;
pub mod experiments;
pub mod predicates;
pub mod runner;
pub mod sptsim;
pub mod stats;
pub mod theory;
pub mod weights;

pub use error::{Error, Result};
