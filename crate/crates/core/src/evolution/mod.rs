//! Linear propagation around the flat state and Duhamel assembly of the
//! nonlinear forcing.

pub mod assemble;
pub mod duhamel;
pub(crate) mod linalg;
pub mod propagator;

#[cfg(test)]
mod tests;

pub use assemble::{
    assemble_aneg, assemble_apos, bv_consistency, low_mode_growth_bound, AssemblyOptions, AssemblyResult,
};
pub use duhamel::{duhamel_minus, duhamel_plus, split_frequency, DuhamelMode, PropagatorTable};
pub use propagator::{
    a_hat, cutoff_chi, cutoff_chi_derivative, matrix_exp_a, semigroup_apply, Branch, TimeGrid,
};
