//! Pseudo-spectral construction of analytic two-fluid vortex sheets and
//! Muskat interfaces by fixed-point iteration around the flat state.
//!
//! Every numerical kernel is generic over the scalar type ([`Real`]); the
//! `f64` aliases below are what the solver and the CLI use.

pub mod cli_io;
pub mod error;
pub mod evolution;
pub mod fixed_point;
pub mod muskat;
pub mod nonlinear;
pub mod scalar;
pub mod singular;
pub mod spectral;

#[cfg(test)]
mod test_util;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = spectral::FrequencyGrid<f64>;
pub type Field = spectral::SpectralField<f64>;
pub type TimeField = spectral::SpaceTimeField<f64>;
pub type Params = spectral::PhysParams<f64>;
