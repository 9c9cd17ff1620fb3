//! Two atoms resonantly coupled, with unequal strengths, to one cavity
//! mode: closed-form and propagated reduced dynamics, entanglement and
//! Bell-violation measures, global-maximum analysis over the evolution,
//! and entanglement/mixedness frontiers.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod frontier;
pub mod measures;
pub mod qcore;

pub use error::{Error, Result};
