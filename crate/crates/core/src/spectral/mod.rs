//! Discrete torus representation, Fourier multipliers and the Wiener-algebra norms.

pub mod field;
pub mod fit;
pub mod grid;
pub mod params;
pub mod spacetime;

pub use field::{
    analyze, apply_multiplier, b0_norm, brho_norm, collocation_product, multiplier_symbol, pointwise_product,
    synthesize, Multiplier, SpectralField,
};
pub use fit::{analyticity_fit, analyticity_fit_band, AMPLITUDE_FLOOR};
pub use grid::{make_grid, FrequencyGrid};
pub use params::{eigenvalues, m_radicand, symbol_m, PhysParams};
pub use spacetime::{balpha_norm, dominating_measure, weighted_modulus, DominatingMeasure, SpaceTimeField};
