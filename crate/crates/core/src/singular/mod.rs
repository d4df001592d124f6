//! Singular integral operators on the periodic line: the `T_j` family, its
//! commutator variant `T̃_j`, the bounded operators `R_k` and the Biot–Savart
//! velocity of a graph-shaped sheet.

mod bounds;
mod kernel;
mod operators;

pub use bounds::{rk_bound_check, tj_difference_bound_check, tj_norm_bound_check, BoundCheck, BOUND_SLACK};
pub use kernel::{cot_derivative_poly, hilbert_kernel_complex, hilbert_kernel_increment, PeriodizedKernel};
pub use operators::{
    biot_savart, rk_apply, tilde_tj_apply, tj_apply, tj_family, OperatorBackend, OperatorOptions, CANCELLATION_LIMIT, DEFAULT_J_MAX,
};

#[cfg(test)]
mod tests;
