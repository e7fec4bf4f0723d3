//! Gait recovery for a hexapod with one failed leg: permutation encoding of
//! leg-sequence gaits, duty-cycle leg kinematics, a planar locomotion
//! surrogate, discrete metaheuristic search over gait indices, and the
//! enumeration and convergence experiments built on them.

pub mod config;
pub mod encoding;
pub mod error;
pub mod experiments;
pub mod kinematics;
pub mod optimizers;
pub mod output;
pub mod sim;
pub mod stability;

pub use error::{Error, Result};
