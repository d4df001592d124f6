use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cplx, czero, from_usize, lit, Real};
use crate::spectral::grid::FrequencyGrid;
use crate::spectral::params::{m_unchecked, PhysParams};

/// One time slice of a real periodic function, stored as Fourier coefficients
/// `u(x) = Σ_k c_k e^{iξ_k x}` in FFT slot order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T: Real> {
    grid: FrequencyGrid<T>,
    coeffs: Vec<Complex<T>>,
}

/// Named Fourier multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplier {
    /// `Λ`, symbol `|ξ|`.
    Lambda,
    /// Hilbert transform, symbol `-i sgn ξ`.
    Hilbert,
    /// `∂_x`, symbol `iξ`.
    Dx,
    /// `𝔐`, symbol `m(ξ)`.
    M,
    /// `𝔐⁻¹`, symbol `1/m(ξ)`.
    MInv,
    /// `Λ𝔐`, symbol `|ξ| m(ξ)`.
    LambdaM,
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(grid: &FrequencyGrid<T>) -> Self {
        Self { grid: grid.clone(), coeffs: vec![czero(); grid.n_modes()] }
    }

    /// Wraps coefficients given in slot order. The unmatched mode is cleared.
    pub fn from_coeffs(grid: &FrequencyGrid<T>, mut coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.n_modes() {
            return Err(Error::LengthMismatch { expected: grid.n_modes(), got: coeffs.len() });
        }
        coeffs[grid.n_modes() / 2] = czero();
        Ok(Self { grid: grid.clone(), coeffs })
    }

    /// Real field `Σ amp_k cos(k x / L + phase_k)` built from `(k, amp, phase)` triples, `k > 0`.
    pub fn from_cosines(grid: &FrequencyGrid<T>, modes: &[(i64, T, T)]) -> Result<Self> {
        let mut f = Self::zeros(grid);
        for &(k, amp, phase) in modes {
            if k <= 0 {
                return Err(Error::InvalidParameter(format!("cosine mode must be positive, got {k}")));
            }
            let (ip, im) = match (grid.slot(k), grid.slot(-k)) {
                (Some(p), Some(m)) if !grid.is_excluded(m) => (p, m),
                _ => return Err(Error::InvalidParameter(format!("mode {k} not resolved on grid"))),
            };
            let half = amp / lit(2.0);
            let c = Complex::from_polar(half, phase);
            f.coeffs[ip] = f.coeffs[ip] + c;
            f.coeffs[im] = f.coeffs[im] + c.conj();
        }
        Ok(f)
    }

    pub fn constant(grid: &FrequencyGrid<T>, value: T) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = cplx(value, T::zero());
        f
    }

    #[inline]
    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Coefficient of wavenumber `k` (zero when off-grid).
    pub fn coeff(&self, k: i64) -> Complex<T> {
        self.grid.slot(k).map_or_else(czero, |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, k: i64, value: Complex<T>) -> Result<()> {
        match self.grid.slot(k) {
            Some(i) if !self.grid.is_excluded(i) => {
                self.coeffs[i] = value;
                Ok(())
            }
            _ => Err(Error::InvalidParameter(format!("wavenumber {k} not available"))),
        }
    }

    /// Zero-mode (mean) coefficient.
    #[inline]
    pub fn mean(&self) -> Complex<T> {
        self.coeffs[0]
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Largest `|c_k - conj(c_{-k})|` over matched modes.
    pub fn hermitian_defect(&self) -> T {
        let n = self.grid.n_modes();
        (0..n)
            .filter(|&i| !self.grid.is_excluded(i))
            .map(|i| (self.coeffs[i] - self.coeffs[self.grid.mirror(i)].conj()).norm())
            .fold(T::zero(), T::max)
    }

    /// Replaces each coefficient by the Hermitian-symmetric average.
    pub fn symmetrize(&mut self) {
        let n = self.grid.n_modes();
        let two = lit::<T>(2.0);
        for i in 0..=n / 2 {
            if self.grid.is_excluded(i) {
                self.coeffs[i] = czero();
                continue;
            }
            let j = self.grid.mirror(i);
            let avg = (self.coeffs[i] + self.coeffs[j].conj()) / two;
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
    }

    /// Largest `|k|` with a coefficient above `tol`.
    pub fn bandwidth(&self, tol: T) -> usize {
        (0..self.grid.n_modes())
            .filter(|&i| self.coeffs[i].norm() > tol)
            .map(|i| self.grid.wavenumber(i).unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Applies `c ← f(slot, ξ, c)` on every matched mode; the unmatched mode stays zero.
    pub fn map_modes(&self, mut f: impl FnMut(usize, T, Complex<T>) -> Complex<T>) -> Self {
        let coeffs = (0..self.grid.n_modes())
            .map(|i| {
                if self.grid.is_excluded(i) {
                    czero()
                } else {
                    f(i, self.grid.xi(i), self.coeffs[i])
                }
            })
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// Multiplies nonzero modes by `symbol(ξ)` and clears the zero mode.
    pub fn apply_symbol(&self, symbol: impl Fn(T) -> Complex<T>) -> Self {
        self.map_modes(|i, xi, c| if i == 0 { czero() } else { c * symbol(xi) })
    }

    pub fn scale(&self, s: T) -> Self {
        self.map_modes(|_, _, c| c * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        self.map_modes(|_, _, c| c * s)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: T, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(self.map_modes(|i, _, c| c + other.coeffs[i] * s))
    }

    pub fn with_zero_mode(&self, value: Complex<T>) -> Self {
        let mut f = self.clone();
        f.coeffs[0] = value;
        f
    }

    /// Mean-zero antiderivative: `ŷ = ŷ_x / (iξ)`.
    pub fn antiderivative(&self) -> Self {
        self.apply_symbol(|xi| cplx(T::zero(), -T::one() / xi))
    }

    /// Grid samples `u(x_j)` via the inverse FFT.
    pub fn values(&self) -> Vec<T> {
        let mut buf = self.coeffs.clone();
        self.grid.fft_inverse().process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Complex grid samples (imaginary part is rounding noise for valid fields).
    pub fn complex_values(&self) -> Vec<Complex<T>> {
        let mut buf = self.coeffs.clone();
        self.grid.fft_inverse().process(&mut buf);
        buf
    }

    pub fn sup_norm(&self) -> T {
        self.values().into_iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Discrete Fourier analysis of `N` equispaced real samples on `[0, 2πL)`.
///
/// The result is exactly Hermitian and the unmatched mode is cleared.
pub fn analyze<T: Real>(grid: &FrequencyGrid<T>, samples: &[T]) -> Result<SpectralField<T>> {
    let n = grid.n_modes();
    if samples.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: samples.len() });
    }
    let mut buf: Vec<Complex<T>> = samples.iter().map(|&s| cplx(s, T::zero())).collect();
    grid.fft_forward().process(&mut buf);
    let inv_n = T::one() / from_usize::<T>(n);
    for c in buf.iter_mut() {
        *c = *c * inv_n;
    }
    let mut f = SpectralField::from_coeffs(grid, buf)?;
    f.symmetrize();
    Ok(f)
}

/// Evaluates `Σ_k c_k e^{iξ_k x}` at arbitrary points (real part).
pub fn synthesize<T: Real>(field: &SpectralField<T>, points: &[T]) -> Vec<T> {
    let g = field.grid();
    points
        .iter()
        .map(|&x| {
            (0..g.n_modes())
                .filter(|&i| !g.is_excluded(i))
                .fold(T::zero(), |acc, i| {
                    let phase = g.xi(i) * x;
                    let c = field.coeffs[i];
                    acc + c.re * phase.cos() - c.im * phase.sin()
                })
        })
        .collect()
}

/// Symbol of a named multiplier at `ξ ≠ 0`.
pub fn multiplier_symbol<T: Real>(symbol: Multiplier, xi: T, params: Option<&PhysParams<T>>) -> Result<Complex<T>> {
    let need = |p: Option<&PhysParams<T>>| {
        p.copied()
            .ok_or_else(|| Error::InvalidParameter(format!("{symbol:?} requires physical parameters")))
    };
    Ok(match symbol {
        Multiplier::Lambda => cplx(xi.abs(), T::zero()),
        Multiplier::Hilbert => cplx(T::zero(), -xi.signum()),
        Multiplier::Dx => cplx(T::zero(), xi),
        Multiplier::M => m_unchecked(xi, &need(params)?),
        Multiplier::MInv => {
            let m = m_unchecked(xi, &need(params)?);
            if m.norm() == T::zero() {
                return Err(Error::DegenerateFrequency { xi: crate::scalar::to_f64(xi) });
            }
            m.inv()
        }
        Multiplier::LambdaM => m_unchecked(xi, &need(params)?) * xi.abs(),
    })
}

/// Applies a named multiplier. The zero mode is mapped to zero for every symbol.
pub fn apply_multiplier<T: Real>(
    field: &SpectralField<T>,
    symbol: Multiplier,
    params: Option<&PhysParams<T>>,
) -> Result<SpectralField<T>> {
    let g = field.grid();
    let mut symbols = vec![czero::<T>(); g.n_modes()];
    for (i, s) in symbols.iter_mut().enumerate().skip(1) {
        if !g.is_excluded(i) {
            *s = multiplier_symbol(symbol, g.xi(i), params)?;
        }
    }
    Ok(field.map_modes(|i, _, c| c * symbols[i]))
}

/// Pointwise product realised as the exact (non-aliased) convolution of
/// coefficients, truncated back to the grid.
pub fn pointwise_product<T: Real>(u: &SpectralField<T>, v: &SpectralField<T>) -> Result<SpectralField<T>> {
    u.same_grid(v)?;
    let g = u.grid();
    let n = g.n_modes();
    let pad = |f: &SpectralField<T>| {
        let mut buf = vec![czero::<T>(); 2 * n];
        for i in 0..n {
            if g.is_excluded(i) {
                continue;
            }
            let k = g.wavenumber(i);
            let slot = if k >= 0 { k as usize } else { (k + 2 * n as i64) as usize };
            buf[slot] = f.coeffs[i];
        }
        g.fft_inverse_padded().process(&mut buf);
        buf
    };
    let a = pad(u);
    let b = pad(v);
    let mut prod: Vec<Complex<T>> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    g.fft_forward_padded().process(&mut prod);
    let inv = T::one() / from_usize::<T>(2 * n);
    let mut out = SpectralField::zeros(g);
    for i in 0..n {
        if g.is_excluded(i) {
            continue;
        }
        let k = g.wavenumber(i);
        let slot = if k >= 0 { k as usize } else { (k + 2 * n as i64) as usize };
        out.coeffs[i] = prod[slot] * inv;
    }
    Ok(out)
}

/// Pointwise product evaluated on the collocation grid (aliased). Cheap, exact
/// when the combined band stays below `N/2`.
pub fn collocation_product<T: Real>(u: &SpectralField<T>, v: &SpectralField<T>) -> Result<SpectralField<T>> {
    u.same_grid(v)?;
    let a = u.values();
    let b = v.values();
    let p: Vec<T> = a.iter().zip(&b).map(|(x, y)| *x * *y).collect();
    analyze(u.grid(), &p)
}

/// `Σ_k |c_k|`, the Wiener algebra norm.
pub fn b0_norm<T: Real>(u: &SpectralField<T>) -> T {
    u.coeffs.iter().fold(T::zero(), |s, c| s + c.norm())
}

/// `Σ_k e^{ρ|ξ_k|} |c_k|`.
pub fn brho_norm<T: Real>(u: &SpectralField<T>, rho: T) -> T {
    let g = u.grid();
    (0..g.n_modes()).fold(T::zero(), |s, i| s + (rho * g.xi(i).abs()).exp() * u.coeffs[i].norm())
}

impl<T: Real> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        assert!(self.grid == rhs.grid, "grid mismatch in field addition");
        self.map_modes(|i, _, c| c + rhs.coeffs[i])
    }
}

impl<T: Real> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        assert!(self.grid == rhs.grid, "grid mismatch in field subtraction");
        self.map_modes(|i, _, c| c - rhs.coeffs[i])
    }
}

impl<T: Real> Neg for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn neg(self) -> SpectralField<T> {
        self.map_modes(|_, _, c| -c)
    }
}

impl<T: Real> Mul<T> for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, s: T) -> SpectralField<T> {
        self.scale(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::make_grid;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize, l: f64) -> FrequencyGrid<f64> {
        make_grid(n, l).unwrap()
    }

    fn sampled(g: &FrequencyGrid<f64>, f: impl Fn(f64) -> f64) -> Vec<f64> {
        g.points().into_iter().map(f).collect()
    }

    pub(crate) fn random_band_limited(g: &FrequencyGrid<f64>, band: i64, scale: f64, seed: u64) -> SpectralField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<(i64, f64, f64)> = (1..=band)
            .map(|k| (k, scale * rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        SpectralField::from_cosines(g, &modes).unwrap()
    }

    #[test]
    fn analyze_cosine() {
        let g = grid(8, 1.0);
        let f = analyze(&g, &sampled(&g, f64::cos)).unwrap();
        for i in 0..8 {
            let k = g.wavenumber(i);
            let expect = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((f.coeffs()[i] - Complex::new(expect, 0.0)).norm() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn analyze_zero_and_length_mismatch() {
        let g = grid(8, 1.0);
        let f = analyze(&g, &[0.0; 8]).unwrap();
        assert_eq!(b0_norm(&f), 0.0);
        assert!(matches!(analyze(&g, &[0.0; 7]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn random_samples_are_hermitian() {
        let g = grid(32, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = analyze(&g, &s).unwrap();
        assert_eq!(f.hermitian_defect(), 0.0);
        assert_eq!(f.coeffs()[16], Complex::new(0.0, 0.0));
    }

    #[test]
    fn synthesize_cosine_and_zero() {
        let g = grid(8, 1.0);
        let f = analyze(&g, &sampled(&g, f64::cos)).unwrap();
        assert!((synthesize(&f, &[0.0])[0] - 1.0).abs() < 1e-15);
        let z = SpectralField::zeros(&g);
        assert!(synthesize(&z, &[0.0, 1.0, 2.5]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn round_trip_at_grid_points() {
        let g = grid(64, 2.0);
        let f = random_band_limited(&g, 20, 1.0, 3);
        let pts = g.points();
        let direct = synthesize(&f, &pts);
        let back = analyze(&g, &direct).unwrap();
        assert!(b0_norm(&(&back - &f)) < 1e-12);
        let fast = f.values();
        for (a, b) in direct.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn multipliers_on_pure_modes() {
        let g = grid(32, 1.0);
        for k in 1..8 {
            let kk = k as f64;
            let c = analyze(&g, &sampled(&g, |x| (kk * x).cos())).unwrap();
            let s = analyze(&g, &sampled(&g, |x| (kk * x).sin())).unwrap();
            let h = apply_multiplier(&c, Multiplier::Hilbert, None).unwrap();
            assert!(b0_norm(&(&h - &s)) < 1e-12);
            let l = apply_multiplier(&c, Multiplier::Lambda, None).unwrap();
            assert!(b0_norm(&(&l - &c.scale(kk))) < 1e-12);
            let d = apply_multiplier(&c, Multiplier::Dx, None).unwrap();
            assert!(b0_norm(&(&d + &s.scale(kk))) < 1e-12);
        }
    }

    #[test]
    fn zero_mode_is_annihilated() {
        let g = grid(16, 1.0);
        let one = SpectralField::constant(&g, 1.0);
        let p = PhysParams::new(0.3, -1.0, 0.1).unwrap();
        for m in [Multiplier::Lambda, Multiplier::Hilbert, Multiplier::Dx, Multiplier::M, Multiplier::MInv, Multiplier::LambdaM] {
            assert_eq!(b0_norm(&apply_multiplier(&one, m, Some(&p)).unwrap()), 0.0);
        }
    }

    #[test]
    fn m_without_density_jump_is_identity() {
        let g = grid(16, 1.0);
        let f = random_band_limited(&g, 6, 1.0, 11);
        let p = PhysParams::new(0.0, -1.0, 0.1).unwrap();
        let mf = apply_multiplier(&f, Multiplier::M, Some(&p)).unwrap();
        assert!(b0_norm(&(&mf - &f)) < 1e-15);
    }

    #[test]
    fn m_inverse_refuses_degenerate_grid_frequency() {
        // a = -0.5, g = -1: m = 0 at |xi| = 2/3, on-grid for L = 3/2, k = 1.
        let g = grid(16, 1.5);
        let f = random_band_limited(&g, 3, 1.0, 5);
        let p = PhysParams::new(-0.5, -1.0, 0.1).unwrap();
        let err = apply_multiplier(&f, Multiplier::MInv, Some(&p)).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrequency { .. }));
        assert!(apply_multiplier(&f, Multiplier::M, Some(&p)).is_ok());
    }

    #[test]
    fn product_identity_and_square() {
        let g = grid(16, 1.0);
        let c = analyze(&g, &sampled(&g, f64::cos)).unwrap();
        let one = SpectralField::constant(&g, 1.0);
        assert!(b0_norm(&(&pointwise_product(&c, &one).unwrap() - &c)) < 1e-15);
        let sq = pointwise_product(&c, &c).unwrap();
        let expect = analyze(&g, &sampled(&g, |x| 0.5 + 0.5 * (2.0 * x).cos())).unwrap();
        assert!(b0_norm(&(&sq - &expect)) < 1e-15);
    }

    #[test]
    fn product_grid_mismatch() {
        let a = SpectralField::zeros(&grid(16, 1.0));
        let b = SpectralField::zeros(&grid(16, 2.0));
        assert_eq!(pointwise_product(&a, &b).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn norms_of_cosine() {
        let g = grid(16, 1.0);
        let c = SpectralField::from_cosines(&g, &[(1, 1.0, 0.0)]).unwrap();
        assert!((b0_norm(&c) - 1.0).abs() < 1e-15);
        assert!((brho_norm(&c, 1.0) - std::f64::consts::E).abs() < 1e-14);
        assert_eq!(b0_norm(&SpectralField::zeros(&g)), 0.0);
    }

    #[test]
    fn f32_round_trip() {
        let g = make_grid(32, 1.0f32).unwrap();
        let s: Vec<f32> = g.points().iter().map(|x| x.cos() + 0.25 * (3.0 * x).sin()).collect();
        let f = analyze(&g, &s).unwrap();
        assert!((b0_norm(&f) - 1.25).abs() < 1e-5);
        let back = f.values();
        assert!(s.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-5));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn algebra_property(seed in 0u64..10_000, rho in 0.0f64..0.5) {
            let g = grid(64, 1.0);
            let u = random_band_limited(&g, 16, 1.0, seed);
            let v = random_band_limited(&g, 16, 1.0, seed + 1);
            let uv = pointwise_product(&u, &v).unwrap();
            prop_assert!(b0_norm(&uv) <= b0_norm(&u) * b0_norm(&v) * (1.0 + 1e-12));
            prop_assert!(brho_norm(&uv, rho) <= brho_norm(&u, rho) * brho_norm(&v, rho) * (1.0 + 1e-12));
            prop_assert!(uv.hermitian_defect() < 1e-14);
        }

        #[test]
        fn hilbert_isometry_and_symmetry(seed in 0u64..10_000) {
            let g = grid(64, 1.0);
            let u = random_band_limited(&g, 31, 1.0, seed);
            for m in [Multiplier::Hilbert, Multiplier::Lambda, Multiplier::Dx] {
                let hu = apply_multiplier(&u, m, None).unwrap();
                prop_assert!(hu.hermitian_defect() < 1e-14);
            }
            let hu = apply_multiplier(&u, Multiplier::Hilbert, None).unwrap();
            prop_assert!((b0_norm(&hu) - b0_norm(&u)).abs() < 1e-13);
        }

        #[test]
        fn analyze_synthesize_identity(seed in 0u64..10_000) {
            let g = grid(32, 1.5);
            let u = random_band_limited(&g, 15, 1.0, seed);
            let back = analyze(&g, &u.values()).unwrap();
            prop_assert!(b0_norm(&(&back - &u)) < 1e-12);
        }
    }
}
