use rayon::prelude::*;

use crate::error::Result;
use crate::fixed_point::config::SolverConfig;
use crate::fixed_point::picard::SolutionBundle;
use crate::nonlinear::{evaluate, NonlinearBackend, SeriesOptions};
use crate::scalar::{cplx, lit, to_f64, Real};
use crate::singular::OperatorBackend;
use crate::spectral::{apply_multiplier, b0_norm, Multiplier, SpaceTimeField, SpectralField};
use crate::Error;

/// Fourth-order central difference `∂_t u(t_n)` on a uniform grid, `2 ≤ n ≤ M-2`.
pub(crate) fn ddt4<T: Real>(u: &SpaceTimeField<T>, n: usize, dt: T) -> SpectralField<T> {
    let c = |k: usize| u.slice(k);
    let w = lit::<T>(1.0) / (lit::<T>(12.0) * dt);
    c(n - 2).map_modes(|i, _, v| {
        (v - c(n - 1).coeffs()[i] * lit::<T>(8.0) + c(n + 1).coeffs()[i] * lit::<T>(8.0) - c(n + 2).coeffs()[i]) * w
    })
}

/// Nodes where [`ddt4`] applies and the trajectory is valid.
pub(crate) fn interior_nodes<T: Real>(times: &[T], valid_until: T) -> Vec<usize> {
    (2..times.len().saturating_sub(2)).filter(|&n| times[n] <= valid_until).collect()
}

/// The nonlinear terms for the check: series with quadrature operators when the
/// solve used the closed form and the series converges, otherwise the closed form.
fn check_backend(solve: NonlinearBackend) -> NonlinearBackend {
    match solve {
        NonlinearBackend::ClosedForm => NonlinearBackend::Series(OperatorBackend::Quadrature),
        NonlinearBackend::Series(_) => NonlinearBackend::ClosedForm,
    }
}

/// Largest `B_0` norm over interior nodes of the two residuals of
/// `∂_t y_x - Λω = N_1`, `∂_t ω + aH∂_t y_x - Λy_x - a∂_x ω + ag y_x = N_2`,
/// with `N_1 = F_x`, `N_2 = (G_1)_t + (G_2)_x` recomputed independently of the solve.
pub fn residual_check<T: Real>(bundle: &SolutionBundle<T>, config: &SolverConfig<T>) -> Result<f64> {
    let Some(omega) = &bundle.omega else {
        return Err(Error::InvalidParameter("vortex residual needs omega".into()));
    };
    let y = &bundle.y_x;
    let times = y.times();
    let dt = times[1] - times[0];
    let p = config.params;
    let opts = SeriesOptions { tol: config.series_tol, ..SeriesOptions::default() };
    let primary = check_backend(config.backend);
    let nodes = interior_nodes(times, bundle.valid_until);
    if nodes.is_empty() {
        return Ok(0.0);
    }
    // G_1 is needed two nodes beyond each interior node for its time derivative
    let lo = nodes[0] - 2;
    let hi = nodes[nodes.len() - 1] + 2;
    let evals = (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let (yn, wn) = (y.slice(n), omega.slice(n));
            match evaluate(yn, wn, p.atwood, primary, opts) {
                Err(Error::SeriesDivergence { .. }) => {
                    evaluate(yn, wn, p.atwood, NonlinearBackend::ClosedForm, opts)
                }
                r => r,
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let g1 = SpaceTimeField::new(
        y.grid(),
        times[lo..=hi].to_vec(),
        evals.iter().map(|e| e.g1.clone()).collect(),
    )?;
    let worst = nodes
        .par_iter()
        .map(|&n| -> Result<T> {
            let e = &evals[n - lo];
            let yt = ddt4(y, n, dt);
            let wt = ddt4(omega, n, dt);
            let g1t = ddt4(&g1, n - lo, dt);
            let (yn, wn) = (y.slice(n), omega.slice(n));
            let n1 = apply_multiplier(&e.f, Multiplier::Dx, None)?;
            let n2 = &g1t + &apply_multiplier(&e.g2, Multiplier::Dx, None)?;
            let r1 = &(&yt - &apply_multiplier(wn, Multiplier::Lambda, None)?) - &n1;
            let hyt = apply_multiplier(&yt, Multiplier::Hilbert, None)?;
            let lhs = wt.map_modes(|i, xi, c| {
                let ik = cplx(T::zero(), xi);
                c + hyt.coeffs()[i] * p.atwood - yn.coeffs()[i] * xi.abs() - ik * wn.coeffs()[i] * p.atwood
                    + yn.coeffs()[i] * p.atwood * p.gravity
            });
            let r2 = &lhs - &n2;
            Ok(b0_norm(&r1).max(b0_norm(&r2)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(T::zero(), T::max);
    Ok(to_f64(worst))
}
