use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::linalg::Mat2;
use crate::evolution::propagator::{Branch, MatrixIntegrator, ScalarIntegrator, TimeGrid};
use crate::scalar::{cplx, czero, to_f64, Real};
use crate::spectral::{eigenvalues, FrequencyGrid, PhysParams, SpaceTimeField, SpectralField};

/// How the forcing enters a Duhamel integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuhamelMode {
    /// `∫ S(t-s) h(s) ds`.
    Plain,
    /// `∫ S(t-s) ∂_x h(s) ds`.
    Dx,
    /// `∫ S(t-s) ∂_s h(s) ds`, by parts.
    Dt,
}

#[derive(Debug, Clone)]
pub(crate) struct ModeEntry<T: Real> {
    pub xi: T,
    pub lam_plus: Complex<T>,
    pub lam_minus: Complex<T>,
    /// Forward integrator for `λ_-`.
    pub minus: ScalarIntegrator<T>,
    /// Forward integrator for `-λ_+`, run over the reversed history.
    pub plus_back: ScalarIntegrator<T>,
    /// Integrator for `e^{(t-s)Â}`, only on low modes of a split table.
    pub matrix: Option<MatrixIntegrator<T>>,
}

/// Per-frequency step propagators `e^{Δλ_±}`, `e^{ΔÂ}` and product-integration
/// weights on one uniform time grid. Built once, then shared read-only.
#[derive(Debug, Clone)]
pub struct PropagatorTable<T: Real> {
    grid: FrequencyGrid<T>,
    times: Vec<T>,
    dt: T,
    params: PhysParams<T>,
    split: Option<T>,
    modes: Vec<Option<ModeEntry<T>>>,
}

/// `2ag/(1-a²)`: below this `|ξ|` the diagonalization is avoided when `a < 0`.
pub fn split_frequency<T: Real>(params: &PhysParams<T>) -> Option<T> {
    params.degenerate_frequency().map(|x| x + x)
}

impl<T: Real> PropagatorTable<T> {
    /// Diagonal propagators on every mode.
    pub fn new(grid: &FrequencyGrid<T>, time: &TimeGrid<T>, params: &PhysParams<T>) -> Result<Self> {
        Self::build(grid, time, params, None)
    }

    /// As [`Self::new`], plus matrix propagators on the modes `0 < |ξ| ≤ 2ag/(1-a²)`.
    pub fn with_split(grid: &FrequencyGrid<T>, time: &TimeGrid<T>, params: &PhysParams<T>) -> Result<Self> {
        let xc = split_frequency(params)
            .ok_or_else(|| Error::InvalidParameter("the low/high split needs a < 0".into()))?;
        Self::build(grid, time, params, Some(xc))
    }

    fn build(grid: &FrequencyGrid<T>, time: &TimeGrid<T>, params: &PhysParams<T>, split: Option<T>) -> Result<Self> {
        let dt = time.require_uniform()?;
        let count = time.len();
        let modes = (0..grid.n_modes())
            .into_par_iter()
            .map(|i| {
                if grid.is_excluded(i) {
                    return None;
                }
                let xi = grid.xi(i);
                let (lam_plus, lam_minus) = eigenvalues(xi, params);
                let matrix = match split {
                    Some(xc) if xi != T::zero() && xi.abs() <= xc => Some(MatrixIntegrator::new(xi, params, dt, count)),
                    _ => None,
                };
                Some(ModeEntry {
                    xi,
                    lam_plus,
                    lam_minus,
                    minus: ScalarIntegrator::new(lam_minus, dt, count),
                    plus_back: ScalarIntegrator::new(-lam_plus, dt, count),
                    matrix,
                })
            })
            .collect();
        Ok(Self { grid: grid.clone(), times: time.nodes().to_vec(), dt, params: *params, split, modes })
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn params(&self) -> &PhysParams<T> {
        &self.params
    }

    /// Split frequency if low modes use the matrix path.
    pub fn split(&self) -> Option<T> {
        self.split
    }

    /// `e^{Δλ_±(ξ_i)}` for slot `i`.
    pub fn step_factor(&self, i: usize, branch: Branch) -> Option<Complex<T>> {
        self.modes[i].as_ref().map(|e| match branch {
            Branch::Minus => e.minus.step_factor(),
            Branch::Plus => e.plus_back.step_factor().inv(),
        })
    }

    /// `e^{ΔÂ(ξ_i)}` for a low mode of a split table.
    pub fn step_matrix(&self, i: usize) -> Option<&Mat2<T>> {
        self.modes[i].as_ref().and_then(|e| e.matrix.as_ref()).map(|m| m.step_factor())
    }

    /// Whether slot `i` takes the matrix path.
    pub fn is_low(&self, i: usize) -> bool {
        self.modes[i].as_ref().is_some_and(|e| e.matrix.is_some())
    }

    pub(crate) fn entry(&self, i: usize) -> Option<&ModeEntry<T>> {
        self.modes[i].as_ref()
    }

    pub(crate) fn check(&self, f: &SpaceTimeField<T>) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if f.times() != self.times.as_slice() {
            return Err(Error::InvalidParameter("forcing is not sampled on the propagator time grid".into()));
        }
        Ok(())
    }

    /// Rebuilds a space-time field from per-slot histories.
    pub(crate) fn collect(&self, histories: Vec<Vec<Complex<T>>>) -> SpaceTimeField<T> {
        let m = self.times.len();
        let n = self.grid.n_modes();
        let slices = (0..m)
            .map(|t| {
                let coeffs = (0..n).map(|i| histories[i].get(t).copied().unwrap_or(czero())).collect();
                SpectralField::from_coeffs(&self.grid, coeffs).expect("length matches grid")
            })
            .collect();
        SpaceTimeField::new(&self.grid, self.times.clone(), slices).expect("times validated by table")
    }
}

fn prepare<T: Real>(h: Vec<Complex<T>>, xi: T, mode: DuhamelMode) -> Vec<Complex<T>> {
    match mode {
        DuhamelMode::Dx => {
            let ik = cplx(T::zero(), xi);
            h.into_iter().map(|c| c * ik).collect()
        }
        _ => h,
    }
}

/// `I^-`: `∫_0^t S_-(t-s)(·) ds` at every node.
pub fn duhamel_minus<T: Real>(
    table: &PropagatorTable<T>,
    forcing: &SpaceTimeField<T>,
    mode: DuhamelMode,
) -> Result<SpaceTimeField<T>> {
    table.check(forcing)?;
    let times = table.times();
    let hist: Vec<Vec<Complex<T>>> = (0..table.grid.n_modes())
        .into_par_iter()
        .map(|i| -> Result<Vec<Complex<T>>> {
            let Some(e) = table.entry(i) else { return Ok(Vec::new()) };
            if e.lam_minus.re > T::zero() {
                return Err(Error::Stability(format!("Re lambda_- > 0 at xi = {}", to_f64(e.xi))));
            }
            let h = prepare(forcing.mode_history(i), e.xi, mode);
            Ok(match mode {
                DuhamelMode::Plain | DuhamelMode::Dx => e.minus.forward(&h),
                DuhamelMode::Dt => {
                    let core = e.minus.forward(&h);
                    times
                        .iter()
                        .zip(core)
                        .zip(&h)
                        .map(|((&t, c), &ht)| ht - (e.lam_minus * t).exp() * h[0] + e.lam_minus * c)
                        .collect()
                }
            })
        })
        .collect::<Result<_>>()?;
    Ok(table.collect(hist))
}

/// Envelope weight `sup e^{αt_n|ξ|}|h(t_n)|` over the later half of the grid,
/// the envelope the forcing is assumed to keep beyond `T_max`.
pub(crate) fn envelope<T: Real>(h: &[Complex<T>], times: &[T], xi: T, alpha: T) -> T {
    let half = times[times.len() - 1] / (T::one() + T::one());
    h.iter()
        .zip(times)
        .filter(|(_, &t)| t >= half)
        .map(|(c, &t)| (alpha * t * xi.abs()).exp() * c.norm())
        .fold(T::zero(), T::max)
}

/// Bound on `|∫_{T}^∞ e^{(t-s)λ_+} h(s) ds|` for `t ≤ T` under the envelope
/// `|h(s)| ≤ μ e^{-αs|ξ|}`.
pub(crate) fn plus_tail<T: Real>(mu: T, lam_plus: Complex<T>, xi: T, alpha: T, t_max: T) -> T {
    if mu == T::zero() {
        return T::zero();
    }
    let rate = lam_plus.re + alpha * xi.abs();
    if rate <= T::zero() {
        return T::infinity();
    }
    mu * (-alpha * t_max * xi.abs()).exp() / rate
}

/// `I^+`: `∫_t^{T_max} S_+(t-s)(·) ds`, with a bound on the neglected `∫_{T_max}^∞`.
pub fn duhamel_plus<T: Real>(
    table: &PropagatorTable<T>,
    forcing: &SpaceTimeField<T>,
    mode: DuhamelMode,
) -> Result<(SpaceTimeField<T>, T)> {
    table.check(forcing)?;
    let times = table.times();
    let t_max = times[times.len() - 1];
    let alpha = table.params.alpha;
    let parts: Vec<(Vec<Complex<T>>, T)> = (0..table.grid.n_modes())
        .into_par_iter()
        .map(|i| -> Result<(Vec<Complex<T>>, T)> {
            let Some(e) = table.entry(i) else { return Ok((Vec::new(), T::zero())) };
            if e.lam_plus.re < T::zero() {
                return Err(Error::Stability(format!("Re lambda_+ < 0 at xi = {}", to_f64(e.xi))));
            }
            let h = prepare(forcing.mode_history(i), e.xi, mode);
            let mu = envelope(&h, times, e.xi, alpha);
            let tail = plus_tail(mu, e.lam_plus, e.xi, alpha, t_max);
            Ok(match mode {
                DuhamelMode::Plain | DuhamelMode::Dx => (e.plus_back.backward(&h), tail),
                DuhamelMode::Dt => {
                    let core = e.plus_back.backward(&h);
                    let last = h[h.len() - 1];
                    let out = times
                        .iter()
                        .zip(core)
                        .zip(&h)
                        .map(|((&t, c), &ht)| (e.lam_plus * (t - t_max)).exp() * last - ht + e.lam_plus * c)
                        .collect();
                    // by parts the neglected piece is λ_+ times the plain tail plus the boundary value at T_max
                    let boundary = mu * (-alpha * t_max * e.xi.abs()).exp();
                    (out, boundary + e.lam_plus.norm() * tail)
                }
            })
        })
        .collect::<Result<_>>()?;
    let mut tail = T::zero();
    let mut hist = Vec::with_capacity(parts.len());
    for (h, t) in parts {
        tail = tail + t;
        hist.push(h);
    }
    Ok((table.collect(hist), tail))
}
