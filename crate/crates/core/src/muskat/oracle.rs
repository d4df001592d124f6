use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{cplx, from_usize, lit, to_f64, Real};
use crate::singular::hilbert_kernel_complex;
use crate::spectral::{analyze, apply_multiplier, Multiplier, SpaceTimeField, SpectralField};

use super::MuskatConfig;

/// Largest `dt · (Δρ/2) · ξ_max` accepted; classical RK4 is stable on `[-2.78, 0]`.
const STABILITY_LIMIT: f64 = 2.5;

/// `∂_t f = (Δρ/2π) ∫ (f_x(x) - f_x(x')) Re K_1(x - x' - i(f(x) - f(x'))) dx'`
/// by the alternating-point rule.
fn rhs<T: Real>(f: &SpectralField<T>, density_gap: T) -> SpectralField<T> {
    let g = f.grid();
    let n = g.n_modes();
    let h = g.spacing();
    let scale = g.period_scale();
    let fv = f.values();
    let fx = apply_multiplier(f, Multiplier::Dx, None).expect("no parameters needed").values();
    let w = density_gap * lit::<T>(2.0) * h / (lit::<T>(2.0) * T::PI());
    let out: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = T::zero();
            for l in ((i + 1) % 2..n).step_by(2) {
                let z = from_usize::<T>((i + n - l) % n) * h;
                let k = hilbert_kernel_complex(cplx(z, fv[l] - fv[i]), scale);
                acc = acc + (fx[i] - fx[l]) * k.re;
            }
            acc * w
        })
        .collect();
    analyze(g, &out).expect("grid-sized samples")
}

/// Method-of-lines RK4 for the interface height `f` itself; returns `f` at `t = k·dt`.
pub fn oracle_rk4_muskat<T: Real>(
    f0: &SpectralField<T>,
    config: &MuskatConfig<T>,
    horizon: T,
    dt: T,
) -> Result<SpaceTimeField<T>> {
    if !(dt > T::zero()) || !(horizon > T::zero()) {
        return Err(Error::InvalidParameter("oracle needs positive dt and horizon".into()));
    }
    let g = f0.grid();
    let stiff = to_f64(dt * config.rate() * g.xi_max());
    if stiff > STABILITY_LIMIT {
        return Err(Error::Stability(format!(
            "dt = {} too large for explicit RK4: dt·(Δρ/2)·ξ_max = {stiff:.3} > {STABILITY_LIMIT}",
            to_f64(dt)
        )));
    }
    let steps = (horizon / dt).round().to_usize().unwrap_or(0).max(1);
    let rho = config.density_gap;
    let guard = lit::<T>(1e3) * (T::one() + f0.sup_norm());
    let two = lit::<T>(2.0);
    let mut f = f0.clone();
    let mut times = vec![T::zero()];
    let mut out = vec![f.clone()];
    for n in 1..=steps {
        let k1 = rhs(&f, rho);
        let k2 = rhs(&f.axpy(dt / two, &k1)?, rho);
        let k3 = rhs(&f.axpy(dt / two, &k2)?, rho);
        let k4 = rhs(&f.axpy(dt, &k3)?, rho);
        let incr = k1.map_modes(|i, _, c| {
            (c + (k2.coeffs()[i] + k3.coeffs()[i]) * two + k4.coeffs()[i]) * (dt / lit(6.0))
        });
        f = &f + &incr;
        let size = f.sup_norm();
        if !size.is_finite() || size > guard {
            return Err(Error::Stability(format!("RK4 trajectory left the guard at step {n}")));
        }
        times.push(dt * from_usize::<T>(n));
        out.push(f.clone());
    }
    SpaceTimeField::new(g, times, out)
}
