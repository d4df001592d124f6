use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::linalg::{
    lagrange_monomials, mat2_add, mat2_apply, mat2_identity, mat2_scale, phi_functions, phi_functions_mat2, Mat2,
};
use crate::scalar::{cplx, czero, from_usize, lit, to_f64, Real};
use crate::spectral::{eigenvalues, m_radicand, PhysParams, SpectralField};

/// Time nodes `0 = t_0 < … < t_M = T_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T: Real> {
    nodes: Vec<T>,
}

impl<T: Real> TimeGrid<T> {
    /// `M + 1` equally spaced nodes on `[0, t_max]`.
    pub fn uniform(t_max: T, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidParameter(format!("time grid needs at least 2 steps, got {steps}")));
        }
        if !(t_max > T::zero()) || !t_max.is_finite() {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
        }
        let dt = t_max / from_usize(steps);
        let mut nodes: Vec<T> = (0..=steps).map(|i| dt * from_usize(i)).collect();
        nodes[steps] = t_max;
        Ok(Self { nodes })
    }

    pub fn from_nodes(nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidParameter("time grid needs at least 3 nodes".into()));
        }
        if nodes[0] != T::zero() {
            return Err(Error::InvalidParameter("time grid must start at 0".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("time nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of steps `M`.
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_max(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    /// Step size if the nodes are equally spaced.
    pub fn uniform_step(&self) -> Option<T> {
        let dt = self.t_max() / from_usize(self.steps());
        let tol = lit::<T>(1e-10) * dt;
        self.nodes
            .windows(2)
            .all(|w| (w[1] - w[0] - dt).abs() <= tol)
            .then_some(dt)
    }

    pub(crate) fn require_uniform(&self) -> Result<T> {
        self.uniform_step()
            .ok_or_else(|| Error::InvalidParameter("Duhamel product integration needs a uniform time grid".into()))
    }
}

/// Branch of the diagonalized semigroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// `S_±(dt)`: multiplies mode `ξ` by `e^{dt λ_±(ξ)}`. Refuses to amplify any mode.
pub fn semigroup_apply<T: Real>(
    field: &SpectralField<T>,
    branch: Branch,
    dt: T,
    params: &PhysParams<T>,
) -> Result<SpectralField<T>> {
    let limit = lit::<T>(1.0 + 1e-12);
    let mut bad = None;
    let out = field.map_modes(|_, xi, c| {
        if xi == T::zero() {
            return c;
        }
        let (lp, lm) = eigenvalues(xi, params);
        let lam = if branch == Branch::Plus { lp } else { lm };
        let f = (lam * dt).exp();
        if f.norm() > limit && c != czero() && bad.is_none() {
            bad = Some((to_f64(xi), to_f64(f.norm())));
        }
        c * f
    });
    match bad {
        Some((xi, g)) => Err(Error::Stability(format!(
            "semigroup {branch:?} with dt = {dt} amplifies mode xi = {xi} by {g}"
        ))),
        None => Ok(out),
    }
}

/// `|ξ| m(ξ)` as a complex number, defined at `ξ = 0` as well.
pub(crate) fn xi_m<T: Real>(xi: T, params: &PhysParams<T>) -> Complex<T> {
    let ax = xi.abs();
    if ax == T::zero() {
        return czero();
    }
    let r = m_radicand(xi, params);
    if r >= T::zero() {
        cplx(ax * r.sqrt(), T::zero())
    } else {
        cplx(T::zero(), ax * (-r).sqrt())
    }
}

/// Symbol matrix `Â(ξ) = [[0, |ξ|], [|ξ| - ag, 2iaξ]]`.
pub fn a_hat<T: Real>(xi: T, params: &PhysParams<T>) -> Mat2<T> {
    let (a, g) = (params.atwood, params.gravity);
    let ax = xi.abs();
    [
        [czero(), cplx(ax, T::zero())],
        [cplx(ax - a * g, T::zero()), cplx(T::zero(), lit::<T>(2.0) * a * xi)],
    ]
}

/// `e^{tÂ(ξ)} = e^{iaξt}[cosh(τ) Id + t sinhc(τ) (Â - iaξ Id)]`, `τ = t|ξ|m(ξ)`;
/// valid through the double eigenvalue where `m` vanishes.
pub fn matrix_exp_a<T: Real>(xi: T, t: T, params: &PhysParams<T>) -> Mat2<T> {
    let a = params.atwood;
    let q = xi_m(xi, params);
    let tau = q * t;
    let (cosh, sinhc) = if tau.norm() < lit(1e-4) {
        let t2 = tau * tau;
        (
            Complex::new(T::one(), T::zero()) + t2 / lit::<T>(2.0) + t2 * t2 / lit::<T>(24.0),
            Complex::new(T::one(), T::zero()) + t2 / lit::<T>(6.0) + t2 * t2 / lit::<T>(120.0),
        )
    } else {
        (tau.cosh(), tau.sinh() / tau)
    };
    let iax = cplx(T::zero(), a * xi);
    let mut shifted = a_hat(xi, params);
    shifted[0][0] = shifted[0][0] - iax;
    shifted[1][1] = shifted[1][1] - iax;
    let body = mat2_add(&mat2_scale(&mat2_identity(), cosh), &mat2_scale(&shifted, sinhc * t));
    mat2_scale(&body, (iax * t).exp())
}

fn bump<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        (-T::one() / x).exp()
    }
}

fn bump_d<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        bump(x) / (x * x)
    }
}

/// Smooth cutoff `χ(s/T)`: 1 for `s ≤ T`, 0 for `s ≥ 2T`, `C^∞` and nonincreasing between.
pub fn cutoff_chi<T: Real>(s: T, horizon: T) -> T {
    let x = s.abs() / horizon - T::one();
    if x <= T::zero() {
        return T::one();
    }
    if x >= T::one() {
        return T::zero();
    }
    let (p, q) = (bump(x), bump(T::one() - x));
    q / (p + q)
}

/// `d/ds χ(s/T)` for `s ≥ 0`.
pub fn cutoff_chi_derivative<T: Real>(s: T, horizon: T) -> T {
    let x = s.abs() / horizon - T::one();
    if x <= T::zero() || x >= T::one() {
        return T::zero();
    }
    let (p, q) = (bump(x), bump(T::one() - x));
    let (dp, dq) = (bump_d(x), -bump_d(T::one() - x));
    let d = (dq * (p + q) - q * (dp + dq)) / ((p + q) * (p + q));
    d / horizon
}

/// First node of the cubic stencil used on step `[t_n, t_{n+1}]`.
#[inline]
fn stencil_first(n: usize, count: usize) -> usize {
    n.saturating_sub(1).min(count - count.min(4))
}

/// Weights per stencil shape, keyed by `n - first`. Only the leading, interior
/// and trailing shapes occur, so memory does not grow with the number of steps.
fn stencil_weights<W: Clone>(count: usize, phis: &[W], combine: impl Fn(&[(f64, &W)]) -> W) -> Vec<Option<Vec<W>>> {
    let width = count.min(4);
    let mut table: Vec<Option<Vec<W>>> = vec![None; width];
    for n in [0, 1, count.saturating_sub(2)] {
        if n + 1 >= count {
            continue;
        }
        let first = stencil_first(n, count);
        let key = n - first;
        if table[key].is_some() {
            continue;
        }
        let pos: Vec<f64> = (first..first + width).map(|i| i as f64 - n as f64).collect();
        // ∫_0^1 e^{z(1-θ)} θᵏ dθ = k! φ_{k+1}(z)
        let w = lagrange_monomials(&pos)
            .iter()
            .map(|b| {
                let mut fact = 1.0;
                let terms: Vec<(f64, &W)> = b
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        (c * fact, &phis[k + 1])
                    })
                    .collect();
                combine(&terms)
            })
            .collect();
        table[key] = Some(w);
    }
    table
}

/// Product integration of `∫_0^{t_n} e^{(t_n-s)λ} h(s) ds` against the local cubic
/// interpolant of `h`, exact in the kernel.
#[derive(Debug, Clone)]
pub(crate) struct ScalarIntegrator<T: Real> {
    step_factor: Complex<T>,
    count: usize,
    weights: Vec<Option<Vec<Complex<T>>>>,
}

impl<T: Real> ScalarIntegrator<T> {
    /// Integrator for rate `λ` on a uniform grid of `count` nodes and step `dt`.
    pub fn new(lambda: Complex<T>, dt: T, count: usize) -> Self {
        let phis = phi_functions(lambda * dt, 4);
        let weights = stencil_weights(count, &phis, |terms| {
            terms.iter().fold(czero(), |s, &(c, p)| s + *p * lit::<T>(c)) * dt
        });
        Self { step_factor: phis[0], count, weights }
    }

    pub fn step_factor(&self) -> Complex<T> {
        self.step_factor
    }

    pub fn forward(&self, h: &[Complex<T>]) -> Vec<Complex<T>> {
        debug_assert_eq!(h.len(), self.count);
        let mut out = Vec::with_capacity(self.count);
        let mut acc = czero();
        out.push(acc);
        for n in 0..self.count - 1 {
            let first = stencil_first(n, self.count);
            let w = self.weights[n - first].as_ref().expect("stencil shape precomputed");
            acc = acc * self.step_factor;
            for (wi, hi) in w.iter().zip(&h[first..]) {
                acc = acc + *wi * *hi;
            }
            out.push(acc);
        }
        out
    }

    /// `∫_{t_n}^{T} e^{(t_n - s)μ} h(s) ds` where this integrator was built for `λ = -μ`.
    pub fn backward(&self, h: &[Complex<T>]) -> Vec<Complex<T>> {
        let rev: Vec<Complex<T>> = h.iter().rev().copied().collect();
        let mut out = self.forward(&rev);
        out.reverse();
        out
    }
}

/// Matrix counterpart of [`ScalarIntegrator`] for `∫ e^{(t-s)Â} n(s) ds`.
#[derive(Debug, Clone)]
pub(crate) struct MatrixIntegrator<T: Real> {
    step_factor: Mat2<T>,
    count: usize,
    weights: Vec<Option<Vec<Mat2<T>>>>,
}

impl<T: Real> MatrixIntegrator<T> {
    pub fn new(xi: T, params: &PhysParams<T>, dt: T, count: usize) -> Self {
        let z = mat2_scale(&a_hat(xi, params), cplx(dt, T::zero()));
        let phis = phi_functions_mat2(&z, 4);
        let weights = stencil_weights(count, &phis, |terms| {
            let s = terms
                .iter()
                .fold([[czero(); 2]; 2], |s, &(c, p)| mat2_add(&s, &mat2_scale(p, cplx(lit(c), T::zero()))));
            mat2_scale(&s, cplx(dt, T::zero()))
        });
        Self { step_factor: matrix_exp_a(xi, dt, params), count, weights }
    }

    pub fn step_factor(&self) -> &Mat2<T> {
        &self.step_factor
    }

    pub fn forward(&self, h: &[[Complex<T>; 2]]) -> Vec<[Complex<T>; 2]> {
        debug_assert_eq!(h.len(), self.count);
        let mut out = Vec::with_capacity(self.count);
        let mut acc = [czero(); 2];
        out.push(acc);
        for n in 0..self.count - 1 {
            let first = stencil_first(n, self.count);
            let w = self.weights[n - first].as_ref().expect("stencil shape precomputed");
            acc = mat2_apply(&self.step_factor, acc);
            for (wi, hi) in w.iter().zip(&h[first..]) {
                let v = mat2_apply(wi, *hi);
                acc = [acc[0] + v[0], acc[1] + v[1]];
            }
            out.push(acc);
        }
        out
    }
}
