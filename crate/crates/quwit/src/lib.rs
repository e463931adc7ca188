//! Simulation toolkit for dephasing-based coherence witnesses on qudits.
//!
//! The crate is organised around the lab workflow it models:
//!
//! - [`qudit`]: states, unitaries, projectors, dephasing, Born probabilities.
//! - [`witness`]: the two witness families (blind-measurement and generic
//!   channel), control runs, and optimal configurations in any dimension.
//! - [`reck`]: decomposition of a unitary into two-level rotations plus a
//!   phase layer.
//! - [`layout`]: translation of a decomposition into a polarization/path
//!   element list (wave-plate sets, beam displacers, quartz dephasers).
//! - [`noise`]: finite-count Monte Carlo with detector-efficiency correction
//!   and significance estimates.

pub mod error;
pub mod layout;
pub mod linalg;
pub mod noise;
pub mod qudit;
pub mod reck;
pub mod witness;

pub use error::{Error, Result};
