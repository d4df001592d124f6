use crate::error::Result;
use crate::scalar::{from_usize, lit, Real};
use crate::singular::operators::{rk_apply, tj_apply, OperatorBackend, OperatorOptions};
use crate::spectral::{brho_norm, SpectralField};

/// Relative quadrature slack allowed when comparing the two sides.
pub const BOUND_SLACK: f64 = 1e-6;

/// Both sides of a weighted-ℓ¹ operator inequality, aggregated by total mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck<T> {
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> BoundCheck<T> {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (T::one() + lit(BOUND_SLACK)) + T::min_positive_value()
    }
}

/// `Σ e^{ρ|ξ|} |ℱ(T_j u)|` against `(1 + 2j) ‖e^{ρ|ξ|} ŷ_x‖ʲ ‖e^{ρ|ξ|} û‖`.
pub fn tj_norm_bound_check<T: Real>(
    y_x: &SpectralField<T>,
    u: &SpectralField<T>,
    j: usize,
    rho: T,
    backend: OperatorBackend,
) -> Result<BoundCheck<T>> {
    let out = tj_apply(y_x, u, j, backend, OperatorOptions::default())?;
    let lhs = brho_norm(&out, rho);
    let rhs = from_usize::<T>(1 + 2 * j) * brho_norm(y_x, rho).powi(j as i32) * brho_norm(u, rho);
    Ok(BoundCheck { lhs, rhs })
}

/// Difference estimate for `T_j(y_{1x}) u_1 - T_j(y_{2x}) u_2`.
///
/// Each `u_i` is read as `c_i + ω_i` with constant `|c_i| ≤ 1`; `μ` dominates
/// `|ŷ_{ix}|` and `|ω̂_i|` mode by mode, `ν = |ŷ_{1x} - ŷ_{2x}| + |û_1 - û_2|`.
/// The right side is `c(j) (‖μ‖^{j-1} + ‖μ‖ʲ) ‖ν‖` with `c(j) = 2j² + 3j + 1`.
pub fn tj_difference_bound_check<T: Real>(
    y1x: &SpectralField<T>,
    y2x: &SpectralField<T>,
    u1: &SpectralField<T>,
    u2: &SpectralField<T>,
    j: usize,
    rho: T,
    backend: OperatorBackend,
) -> Result<BoundCheck<T>> {
    y1x.same_grid(y2x)?;
    y1x.same_grid(u1)?;
    y1x.same_grid(u2)?;
    for u in [u1, u2] {
        let c = u.mean().norm();
        if c > T::one() + lit(1e-12) {
            return Err(crate::Error::InvalidParameter(format!("constant part {c} exceeds 1")));
        }
    }
    let opts = OperatorOptions::default();
    let a = tj_apply(y1x, u1, j, backend, opts)?;
    let b = tj_apply(y2x, u2, j, backend, opts)?;
    let lhs = brho_norm(&(&a - &b), rho);

    let g = y1x.grid();
    let mut mu = T::zero();
    let mut nu = T::zero();
    for i in 0..g.n_modes() {
        let w = (rho * g.xi(i).abs()).exp();
        let om1 = if i == 0 { T::zero() } else { u1.coeffs()[i].norm() };
        let om2 = if i == 0 { T::zero() } else { u2.coeffs()[i].norm() };
        let m = y1x.coeffs()[i].norm().max(y2x.coeffs()[i].norm()).max(om1).max(om2);
        mu = mu + w * m;
        let d = (y1x.coeffs()[i] - y2x.coeffs()[i]).norm() + (u1.coeffs()[i] - u2.coeffs()[i]).norm();
        nu = nu + w * d;
    }
    let cj = from_usize::<T>(2 * j * j + 3 * j + 1);
    let low = if j == 0 { T::zero() } else { mu.powi(j as i32 - 1) };
    let rhs = cj * (low + mu.powi(j as i32)) * nu;
    Ok(BoundCheck { lhs, rhs })
}

/// `Σ e^{ρ|ξ|} |ℱ(R_k Ω)|` against `2 Π ‖e^{ρ|ξ|} ŷ_{ix}‖ · ‖e^{-ρ|ξ|} Ω̂‖`.
pub fn rk_bound_check<T: Real>(y_list: &[SpectralField<T>], omega: &SpectralField<T>, rho: T) -> Result<BoundCheck<T>> {
    let out = rk_apply(y_list, omega)?;
    let lhs = brho_norm(&out, rho);
    let mut rhs = lit::<T>(2.0) * brho_norm(omega, -rho);
    for y in y_list {
        rhs = rhs * brho_norm(y, rho);
    }
    Ok(BoundCheck { lhs, rhs })
}
