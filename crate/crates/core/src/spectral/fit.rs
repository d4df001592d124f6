use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};
use crate::spectral::field::SpectralField;

/// Coefficients below this amplitude are treated as rounding noise.
pub const AMPLITUDE_FLOOR: f64 = 1e-14;

/// Estimated half-width `ρ̂` of the analyticity strip: least-squares slope of
/// `-log|c_k|` against `|ξ_k|` over the nonzero modes above the floor.
pub fn analyticity_fit<T: Real>(u: &SpectralField<T>) -> Result<T> {
    analyticity_fit_band(u, T::zero(), T::infinity())
}

/// As [`analyticity_fit`], restricted to `xi_lo ≤ |ξ| ≤ xi_hi`.
pub fn analyticity_fit_band<T: Real>(u: &SpectralField<T>, xi_lo: T, xi_hi: T) -> Result<T> {
    let g = u.grid();
    let floor = lit::<T>(AMPLITUDE_FLOOR);
    let pts: Vec<(T, T)> = (1..g.n_modes())
        .filter(|&i| !g.is_excluded(i))
        .filter_map(|i| {
            let xi = g.xi(i).abs();
            let a = u.coeffs()[i].norm();
            (a > floor && xi >= xi_lo && xi <= xi_hi).then(|| (xi, a.ln()))
        })
        .collect();
    let mut distinct: Vec<T> = pts.iter().map(|p| p.0).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if pts.len() < 4 || distinct.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} coefficients above the amplitude floor across {} frequencies",
            pts.len(),
            distinct.len()
        )));
    }
    let n = from_usize::<T>(pts.len());
    let mx = pts.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let my = pts.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let (sxy, sxx) = pts.iter().fold((T::zero(), T::zero()), |(sxy, sxx), p| {
        let dx = p.0 - mx;
        (sxy + dx * (p.1 - my), sxx + dx * dx)
    });
    Ok((-(sxy / sxx)).max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use crate::spectral::grid::make_grid;

    #[test]
    fn exact_exponential_decay() {
        let g = make_grid(64, 1.0f64).unwrap();
        let f = SpectralField::zeros(&g).map_modes(|_, xi, _| cplx((-0.3 * xi.abs()).exp(), 0.0));
        assert!((analyticity_fit(&f).unwrap() - 0.3).abs() < 1e-6);
    }

    #[test]
    fn single_mode_is_insufficient() {
        let g = make_grid(64, 1.0f64).unwrap();
        let f = SpectralField::from_cosines(&g, &[(3, 1.0, 0.0)]).unwrap();
        assert!(matches!(analyticity_fit(&f), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn band_restriction() {
        let g = make_grid(64, 2.0f64).unwrap();
        let f = SpectralField::zeros(&g).map_modes(|_, xi, _| {
            let r = if xi.abs() < 4.0 { 0.2 } else { 1.0 };
            cplx((-r * xi.abs()).exp(), 0.0)
        });
        let low = analyticity_fit_band(&f, 0.0, 3.9).unwrap();
        assert!((low - 0.2).abs() < 1e-9);
    }
}
