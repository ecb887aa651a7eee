//! Entanglement-assisted transmission of one bit over a single use of a noisy
//! classical channel.
//!
//! The crate evaluates the butterfly channel three ways: the best unassisted
//! deterministic code (certified by exhaustive search), the CHSH-assisted
//! protocol (exact Born-rule evaluation and trial-by-trial simulation), and a
//! Popescu-Rohrlich box. Supporting modules improve measurement settings by
//! seesaw iteration and reconstruct two-qubit states from simulated
//! tomography counts.

pub mod channel;
pub mod classical;
pub mod error;
pub mod exec;
pub mod montecarlo;
pub mod optimizer;
pub mod protocol;
pub mod qmath;
pub mod rng;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
pub use exec::Exec;
