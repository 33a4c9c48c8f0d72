//! Radial Allen–Cahn isoperimetric problem.
//!
//! Builds the optimal one-dimensional transition profile of a double-well
//! potential, minimizes the Allen–Cahn energy `σ∫|∇u|² + σ⁻¹∫W(u)` among radial
//! fields with prescribed `∫V(u)`, and probes the stability of the minimizers.

pub mod ansatz;
pub mod config;
pub mod error;
pub mod experiment;
pub mod minimizer;
pub mod numerics;
pub mod potentials;
pub mod profile;
pub mod radial;
pub mod sampling;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};
