//! Simulation and estimation toolkit for end-to-end noise tomography of
//! star-shaped qubit networks.
//!
//! The crate models tree networks whose edges are mixed-unitary channels,
//! distributes probe states to the end-nodes with per-node circuits, samples
//! end-node measurements, and runs the estimators that recover the
//! per-channel parameters together with the Fisher-information machinery
//! certifying their efficiency.

pub mod channels;
pub mod dense;
pub mod distribution;
pub mod error;
pub mod estimators;
pub mod fisher;
pub mod labels;
pub mod linalg;
pub mod measurement;
pub mod topology;

pub use error::{Error, Result};
