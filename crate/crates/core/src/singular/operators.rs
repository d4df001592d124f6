use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{czero, from_usize, lit, to_f64, Real};
use crate::singular::kernel::PeriodizedKernel;
use crate::spectral::{analyze, apply_multiplier, b0_norm, pointwise_product, Multiplier, SpectralField};

/// Default largest operator order.
pub const DEFAULT_J_MAX: usize = 10;

/// Largest tolerated relative cancellation loss in the binomial expansion.
pub const CANCELLATION_LIMIT: f64 = 1e-9;

/// Evaluation route for the singular integral operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorBackend {
    /// Alternating-point trapezoid rule on the collocation grid.
    Quadrature,
    /// Binomial expansion in Fourier multipliers and products.
    Spectral,
}

/// Operator options shared by the `T_j` family.
#[derive(Debug, Clone, Copy)]
pub struct OperatorOptions {
    pub j_max: usize,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        Self { j_max: DEFAULT_J_MAX }
    }
}

/// `T_j(y_x) u = (1/π) p.v.∫ (y(x) - y(x'))ʲ K_{j+1}(x - x') u(x') dx'`, with
/// `y` the mean-zero antiderivative of `y_x`.
pub fn tj_apply<T: Real>(
    y_x: &SpectralField<T>,
    u: &SpectralField<T>,
    j: usize,
    backend: OperatorBackend,
    opts: OperatorOptions,
) -> Result<SpectralField<T>> {
    y_x.same_grid(u)?;
    if j > opts.j_max {
        return Err(Error::OrderTooLarge { j, j_max: opts.j_max });
    }
    match backend {
        OperatorBackend::Quadrature => Ok(tj_quadrature(y_x, u, j)),
        OperatorBackend::Spectral => tj_spectral(y_x, u, j),
    }
}

/// `T̃_j(f_x) u = (1/π) ∫ (f(x) - f(x'))ʲ (u(x) - u(x')) K_{j+1}(x - x') dx'`, `j ≥ 1`.
pub fn tilde_tj_apply<T: Real>(
    f_x: &SpectralField<T>,
    u: &SpectralField<T>,
    j: usize,
    backend: OperatorBackend,
    opts: OperatorOptions,
) -> Result<SpectralField<T>> {
    f_x.same_grid(u)?;
    if j == 0 {
        return Err(Error::InvalidParameter("tilde operators start at j = 1".into()));
    }
    if j > opts.j_max {
        return Err(Error::OrderTooLarge { j, j_max: opts.j_max });
    }
    match backend {
        OperatorBackend::Quadrature => Ok(tilde_tj_quadrature(f_x, u, j)),
        OperatorBackend::Spectral => {
            let one = SpectralField::constant(u.grid(), T::one());
            let t1 = tj_spectral(f_x, &one, j)?;
            let tu = tj_spectral(f_x, u, j)?;
            let ut1 = pointwise_product(u, &t1)?;
            Ok(&ut1 - &tu)
        }
    }
}

/// `T_j(y_x) u` for every `j` in `0..=j_top`, sharing one pass over the grid on
/// the quadrature backend. `j_top` is not limited by [`OperatorOptions::j_max`].
pub fn tj_family<T: Real>(
    y_x: &SpectralField<T>,
    u: &SpectralField<T>,
    j_top: usize,
    backend: OperatorBackend,
) -> Result<Vec<SpectralField<T>>> {
    y_x.same_grid(u)?;
    match backend {
        OperatorBackend::Spectral => (0..=j_top).map(|j| tj_spectral(y_x, u, j)).collect(),
        OperatorBackend::Quadrature => {
            let g = y_x.grid();
            let n = g.n_modes();
            let h = g.spacing();
            let tables: Vec<Vec<T>> = (0..=j_top)
                .map(|j| {
                    let k = PeriodizedKernel::new(j, g.period_scale());
                    (0..n).map(|d| if d % 2 == 1 { k.eval(from_usize::<T>(d) * h) } else { T::zero() }).collect()
                })
                .collect();
            let y = y_x.antiderivative().values();
            let uv = u.values();
            let w = lit::<T>(2.0) * h / T::PI();
            let rows: Vec<Vec<T>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut acc = vec![T::zero(); j_top + 1];
                    for l in ((i + 1) % 2..n).step_by(2) {
                        let d = (i + n - l) % n;
                        let dy = y[i] - y[l];
                        let mut p = uv[l];
                        for (j, a) in acc.iter_mut().enumerate() {
                            *a = *a + p * tables[j][d];
                            p = p * dy;
                        }
                    }
                    acc.into_iter().map(|a| a * w).collect()
                })
                .collect();
            (0..=j_top)
                .map(|j| analyze(g, &rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
                .collect()
        }
    }
}

/// Alternating-point trapezoid evaluation: for each target node only nodes of
/// opposite parity contribute, each with weight `2h`.
fn tj_quadrature<T: Real>(y_x: &SpectralField<T>, u: &SpectralField<T>, j: usize) -> SpectralField<T> {
    let g = y_x.grid();
    let n = g.n_modes();
    let h = g.spacing();
    let kernel = PeriodizedKernel::new(j, g.period_scale());
    let table: Vec<T> = (0..n).map(|d| if d % 2 == 1 { kernel.eval(from_usize::<T>(d) * h) } else { T::zero() }).collect();
    let y = y_x.antiderivative().values();
    let uv = u.values();
    let w = lit::<T>(2.0) * h / T::PI();
    let out: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = T::zero();
            let start = (i + 1) % 2;
            for l in (start..n).step_by(2) {
                let d = (i + n - l) % n;
                let dy = y[i] - y[l];
                acc = acc + dy.powi(j as i32) * table[d] * uv[l];
            }
            acc * w
        })
        .collect();
    analyze(g, &out).expect("grid-sized samples")
}

fn tilde_tj_quadrature<T: Real>(f_x: &SpectralField<T>, u: &SpectralField<T>, j: usize) -> SpectralField<T> {
    let g = f_x.grid();
    let n = g.n_modes();
    let h = g.spacing();
    let kernel = PeriodizedKernel::new(j, g.period_scale());
    let table: Vec<T> = (0..n).map(|d| if d > 0 { kernel.eval(from_usize::<T>(d) * h) } else { T::zero() }).collect();
    let f = f_x.antiderivative().values();
    let fxv = f_x.values();
    let uv = u.values();
    let uxv = apply_multiplier(u, Multiplier::Dx, None).expect("no parameters needed").values();
    let w = h / T::PI();
    let out: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = fxv[i].powi(j as i32) * uxv[i];
            for l in 0..n {
                if l == i {
                    continue;
                }
                let d = (i + n - l) % n;
                acc = acc + (f[i] - f[l]).powi(j as i32) * (uv[i] - uv[l]) * table[d];
            }
            acc * w
        })
        .collect();
    analyze(g, &out).expect("grid-sized samples")
}

/// Relative size below which coefficients count as absent for band checks.
fn band_of<T: Real>(f: &SpectralField<T>) -> usize {
    let tol = lit::<T>(1e-14) * b0_norm(f);
    f.bandwidth(tol)
}

/// Binomial identity
/// `T_j u = ((-1)ʲ/j!) Σ_m C(j,m) (-1)^{j-m} yᵐ ∂ʲ H(y^{j-m} u)`.
fn tj_spectral<T: Real>(y_x: &SpectralField<T>, u: &SpectralField<T>, j: usize) -> Result<SpectralField<T>> {
    let g = y_x.grid();
    let n = g.n_modes();
    let limit = n / (2 * (j + 1));
    for f in [y_x, u] {
        let b = band_of(f);
        if b > limit {
            return Err(Error::BandLimit { mode: b, limit });
        }
    }
    if j == 0 {
        return apply_multiplier(u, Multiplier::Hilbert, None);
    }
    let y = y_x.antiderivative();
    let mut powers = vec![SpectralField::constant(g, T::one())];
    for p in 1..=j {
        let next = pointwise_product(&powers[p - 1], &y)?;
        powers.push(next);
    }
    let symbol = |xi: T| -> Complex<T> {
        // (iξ)ʲ (-i sgn ξ)
        let ij = match j % 4 {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        };
        ij * xi.powi(j as i32) * Complex::new(T::zero(), -xi.signum())
    };
    let mut fact = T::one();
    for k in 1..=j {
        fact = fact * from_usize::<T>(k);
    }
    let mut total = SpectralField::zeros(g);
    let mut term_mass = T::zero();
    let mut binom = T::one();
    for m in 0..=j {
        if m > 0 {
            binom = binom * from_usize::<T>(j - m + 1) / from_usize::<T>(m);
        }
        let sign = if (j - m) % 2 == 0 { T::one() } else { -T::one() };
        let inner = pointwise_product(&powers[j - m], u)?;
        let d = inner.apply_symbol(symbol);
        let term = pointwise_product(&powers[m], &d)?.scale(binom * sign);
        term_mass = term_mass + b0_norm(&term);
        total = &total + &term;
    }
    let overall = if j % 2 == 0 { T::one() } else { -T::one() } / fact;
    let total = total.scale(overall);
    let bound = lit::<T>(1.0 + 2.0 * j as f64) * b0_norm(y_x).powi(j as i32) * b0_norm(u);
    if bound > T::zero() {
        let loss = T::epsilon() * term_mass * overall.abs() / bound;
        if loss > lit(CANCELLATION_LIMIT) {
            return Err(Error::BackendCapacity { j, loss: to_f64(loss) });
        }
    }
    Ok(total)
}

/// `R_k(y_1x..y_kx) Ω = (1/π) ∫ (1/k) ∂_x[p_1⋯p_k](x, x') Ω(x') dx'` with the
/// periodized divided differences `p_1⋯p_k = Π(y_i(x) - y_i(x')) K_k(x - x')`.
///
/// The kernel is bounded; the trapezoid rule uses its diagonal limit
/// `(1/2k) Σ_i y_i''(x) Π_{l≠i} y_l'(x)`.
pub fn rk_apply<T: Real>(y_list: &[SpectralField<T>], omega: &SpectralField<T>) -> Result<SpectralField<T>> {
    let k = y_list.len();
    if k == 0 {
        return Err(Error::InvalidParameter("R_k needs at least one function".into()));
    }
    for y in y_list {
        y.same_grid(omega)?;
    }
    let g = omega.grid();
    let n = g.n_modes();
    let h = g.spacing();
    let kk = PeriodizedKernel::new(k - 1, g.period_scale());
    let kk1 = PeriodizedKernel::new(k, g.period_scale());
    let tab_k: Vec<T> = (0..n).map(|d| if d > 0 { kk.eval(from_usize::<T>(d) * h) } else { T::zero() }).collect();
    let tab_k1: Vec<T> = (0..n).map(|d| if d > 0 { kk1.eval(from_usize::<T>(d) * h) } else { T::zero() }).collect();
    let ys: Vec<Vec<T>> = y_list.iter().map(|y| y.antiderivative().values()).collect();
    let yps: Vec<Vec<T>> = y_list.iter().map(|y| y.values()).collect();
    let ypps: Vec<Vec<T>> = y_list
        .iter()
        .map(|y| apply_multiplier(y, Multiplier::Dx, None).map(|f| f.values()))
        .collect::<Result<_>>()?;
    let om = omega.values();
    let kf = from_usize::<T>(k);
    let half = lit::<T>(0.5);
    let w = h / T::PI();
    let out: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut diag = T::zero();
            for a in 0..k {
                let mut prod = half * ypps[a][i];
                for b in 0..k {
                    if b != a {
                        prod = prod * yps[b][i];
                    }
                }
                diag = diag + prod;
            }
            let mut acc = diag / kf * om[i];
            let mut dys = vec![T::zero(); k];
            for l in 0..n {
                if l == i {
                    continue;
                }
                let d = (i + n - l) % n;
                for a in 0..k {
                    dys[a] = ys[a][i] - ys[a][l];
                }
                let full = dys.iter().fold(T::one(), |p, &v| p * v);
                let mut lead = T::zero();
                for a in 0..k {
                    let mut prod = yps[a][i];
                    for b in 0..k {
                        if b != a {
                            prod = prod * dys[b];
                        }
                    }
                    lead = lead + prod;
                }
                let kern = lead * tab_k[d] / kf - full * tab_k1[d];
                acc = acc + kern * om[l];
            }
            acc * w
        })
        .collect();
    analyze(g, &out)
}

/// Fluid velocity on the sheet from the periodized Biot–Savart law,
/// `v_1 + i v_2 = (i/2π) p.v.∫ ω̃(x') K_1(conj(z(x) - z(x'))) dx'`, `z = x + i y`, `ω̃ = 2(1 + ω)`.
///
/// The flat-sheet part `(0, Hω)` is applied as a multiplier and only the
/// increment `K_1(Δx - iΔy) - K_1(Δx)` goes through the quadrature.
pub fn biot_savart<T: Real>(y_x: &SpectralField<T>, omega: &SpectralField<T>) -> Result<(SpectralField<T>, SpectralField<T>)> {
    y_x.same_grid(omega)?;
    let g = y_x.grid();
    let n = g.n_modes();
    let h = g.spacing();
    let l_scale = g.period_scale();
    let y = y_x.antiderivative().values();
    let om = omega.values();
    let two = lit::<T>(2.0);
    let xs = g.points();
    let geom_tol = lit::<T>(1e-10);
    let s = T::one() / (two * l_scale);
    // self-intersection: periodized chord length below tolerance
    for i in 0..n {
        for l in (i + 1)..n {
            let dz = Complex::new(xs[i] - xs[l], -(y[i] - y[l])) * s;
            if dz.sin().norm() * two * l_scale < geom_tol {
                return Err(Error::Geometry { i, j: l });
            }
        }
    }
    let pre = Complex::new(T::zero(), two * h / T::TAU());
    let vals: Vec<Complex<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = czero::<T>();
            let start = (i + 1) % 2;
            for l in (start..n).step_by(2) {
                let dx = xs[i] - xs[l];
                let delta = Complex::new(T::zero(), -(y[i] - y[l]));
                let inc = crate::singular::kernel::hilbert_kernel_increment(dx, delta, l_scale);
                acc = acc + inc * (two * (T::one() + om[l]));
            }
            acc * pre
        })
        .collect();
    let v1 = analyze(g, &vals.iter().map(|c| c.re).collect::<Vec<_>>())?;
    let v2_rest = analyze(g, &vals.iter().map(|c| c.im).collect::<Vec<_>>())?;
    let h_omega = apply_multiplier(omega, Multiplier::Hilbert, None)?;
    Ok((v1, &v2_rest + &h_omega))
}
