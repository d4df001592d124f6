use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{cplx, from_usize, lit, to_f64, Real};
use crate::singular::{hilbert_kernel_increment, tilde_tj_apply, OperatorBackend, OperatorOptions};
use crate::spectral::{analyze, apply_multiplier, b0_norm, Multiplier, SpectralField};

use super::MuskatBackend;

/// Highest `T̃_j` order the series may reach.
const SERIES_MAX_ORDER: usize = 64;

/// `N(f) = -(Δρ/2π) ∫ (f_x(x) - f_x(x'))/(x - x') · p²/(1 + p²) dx'`,
/// `p = (f(x) - f(x'))/(x - x')`, with `f` the mean-zero antiderivative of `f_x`.
pub fn muskat_nonlinearity<T: Real>(
    f_x: &SpectralField<T>,
    density_gap: T,
    backend: MuskatBackend,
    series_tol: f64,
) -> Result<SpectralField<T>> {
    match backend {
        MuskatBackend::ClosedForm => Ok(closed_form(f_x, density_gap)),
        MuskatBackend::Series => series(f_x, density_gap, series_tol),
    }
}

/// Image sum of the kernel: `Δf_x [K_1(z) - Re K_1(z - iΔf)]`, bounded on the diagonal
/// with limit `f_xx f_x²/(1 + f_x²)`.
fn closed_form<T: Real>(f_x: &SpectralField<T>, density_gap: T) -> SpectralField<T> {
    let g = f_x.grid();
    let n = g.n_modes();
    let h = g.spacing();
    let scale = g.period_scale();
    let f = f_x.antiderivative().values();
    let fx = f_x.values();
    let fxx = apply_multiplier(f_x, Multiplier::Dx, None).expect("no parameters needed").values();
    let w = -density_gap * h / (lit::<T>(2.0) * T::PI());
    let out: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p2 = fx[i] * fx[i];
            let mut acc = fxx[i] * p2 / (T::one() + p2);
            for l in 0..n {
                if l == i {
                    continue;
                }
                let z = from_usize::<T>((i + n - l) % n) * h;
                let inc = hilbert_kernel_increment(z, cplx(T::zero(), f[l] - f[i]), scale);
                acc = acc - (fx[i] - fx[l]) * inc.re;
            }
            acc * w
        })
        .collect();
    analyze(g, &out).expect("grid-sized samples")
}

/// `p²/(1+p²) = Σ_{n≥1} (-1)^{n+1} p^{2n}` gives `N = (Δρ/2) Σ_n (-1)ⁿ T̃_{2n}(f_x) f_x`.
fn series<T: Real>(f_x: &SpectralField<T>, density_gap: T, tol: f64) -> Result<SpectralField<T>> {
    let m = to_f64(b0_norm(f_x));
    if m >= 1.0 {
        return Err(Error::SeriesDivergence { norm: m });
    }
    let half = density_gap / lit(2.0);
    let opts = OperatorOptions { j_max: SERIES_MAX_ORDER };
    let mut sum = SpectralField::zeros(f_x.grid());
    let mut j = 2;
    loop {
        // ‖T̃_j(f_x) u‖_{B_0} ≤ 2(1 + 2j) ‖f_x‖ʲ ‖u‖
        let bound = to_f64(half) * 2.0 * (1.0 + 2.0 * j as f64) * m.powi(j as i32 + 1);
        if bound < tol {
            return Ok(sum);
        }
        if j > SERIES_MAX_ORDER {
            return Err(Error::SeriesDivergence { norm: m });
        }
        let term = tilde_tj_apply(f_x, f_x, j, OperatorBackend::Quadrature, opts)?;
        let s = if (j / 2) % 2 == 0 { half } else { -half };
        sum = sum.axpy(s, &term)?;
        j += 2;
    }
}
