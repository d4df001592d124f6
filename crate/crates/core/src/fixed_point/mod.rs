//! Picard iteration around the flat state for the vortex sheet, with an
//! independent residual check and a Runge–Kutta cross-check.

pub mod config;
pub mod oracle;
pub mod picard;
pub mod residual;


pub use config::{InitialProfile, SolverConfig, SolverMode, AMPLITUDE_GUARD};
pub use oracle::oracle_rk4_vortex;
pub use picard::{balpha_envelope_check, linear_solution, picard_solve, IterationRecord, PicardProblem, SolutionBundle};
pub use residual::residual_check;
