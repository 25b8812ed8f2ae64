//! Simulation toolkit for nuclear spin singlet-state preparation with
//! spin-lock induced crossing (SLIC) and M2S pulse trains.
//!
//! * [`spin`]: operators, Hamiltonians, density-matrix propagation.
//! * [`sequence`]: pulse-sequence model, SLIC/M2S builders and executor.
//! * [`rate`]: damped-Rabi transfer model for efficiency comparisons.
//! * [`experiments`]: dip, duration and storage-time scans.
//! * [`fitting`]: Lorentzian, sin⁴ and exponential least-squares fits.

pub mod config;
pub mod curve;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod io;
pub mod rate;
pub mod relaxation;
pub mod sequence;
pub mod spin;

pub use error::{Error, Result};
pub use relaxation::RelaxationParams;
