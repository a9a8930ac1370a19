//! Simulation and analysis of standard quantum process tomography for
//! two-qubit gates under Markovian decoherence.

pub mod analysis;
pub mod bases;
pub mod channels;
pub mod cli;
pub mod decoherence;
pub mod error;
pub mod linalg;

pub use error::{Error, Result};
