//! Porous-medium interface (Muskat) in perturbative form about the flat state:
//! `∂_t f_x + (Δρ/2) Λ f_x = ∂_x N(f)`.

mod nonlinearity;
mod oracle;
mod solver;

#[cfg(test)]
mod tests;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_point::{InitialProfile, AMPLITUDE_GUARD};
use crate::scalar::{lit, Real};

pub use nonlinearity::muskat_nonlinearity;
pub use oracle::oracle_rk4_muskat;
pub use solver::{muskat_linear_solution, muskat_picard_solve, muskat_residual, MuskatProblem};

/// Evaluation route for `N(f)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuskatBackend {
    /// Trapezoid rule on the bounded periodized kernel.
    ClosedForm,
    /// `Σ_n (-1)ⁿ T̃_{2n}(f_x) f_x`.
    Series,
}

impl MuskatBackend {
    /// The other route, used to check a solution independently.
    pub fn other(self) -> Self {
        match self {
            MuskatBackend::ClosedForm => MuskatBackend::Series,
            MuskatBackend::Series => MuskatBackend::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuskatConfig<T: Real> {
    /// `ρ_- - ρ_+`, positive in the stable regime.
    pub density_gap: T,
    pub n_modes: usize,
    pub period_scale: T,
    pub t_max: T,
    pub steps: usize,
    /// Initial slope `f_{0x}`.
    pub profile: InitialProfile,
    pub amplitude: T,
    pub alpha: T,
    pub backend: MuskatBackend,
    pub picard_tol: T,
    pub series_tol: f64,
    pub max_iterations: usize,
}

impl<T: Real> MuskatConfig<T> {
    pub fn new(density_gap: T, n_modes: usize, period_scale: T, t_max: T, steps: usize) -> Self {
        let half = density_gap / lit(2.0);
        Self {
            density_gap,
            n_modes,
            period_scale,
            t_max,
            steps,
            profile: InitialProfile::SingleMode { k: 1 },
            amplitude: lit(0.01),
            alpha: (half * lit(0.5)).min(lit(0.25)),
            backend: MuskatBackend::ClosedForm,
            picard_tol: lit(1e-10),
            series_tol: 1e-12,
            max_iterations: 50,
        }
    }

    /// Decay rate `Δρ/2` of the linear semigroup per unit frequency.
    pub fn rate(&self) -> T {
        self.density_gap / lit(2.0)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.density_gap > T::zero()) {
            out.push(format!("density_gap must be positive (stable regime), got {}", self.density_gap));
        }
        if !(self.alpha > T::zero() && self.alpha < self.rate()) {
            out.push(format!("alpha must lie in (0, density_gap/2), got {}", self.alpha));
        }
        if !(self.amplitude >= T::zero() && self.amplitude <= lit(AMPLITUDE_GUARD)) {
            out.push(format!("amplitude must lie in [0, {AMPLITUDE_GUARD}], got {}", self.amplitude));
        }
        if !(self.t_max > T::zero()) {
            out.push(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.steps < 4 {
            out.push(format!("steps must be at least 4, got {}", self.steps));
        }
        if self.max_iterations == 0 {
            out.push("max_iterations must be positive".into());
        }
        if !(self.picard_tol > T::zero()) {
            out.push("picard tolerance must be positive".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }
}
