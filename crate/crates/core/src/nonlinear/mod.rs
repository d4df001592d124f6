//! Nonlinear terms of the vortex-sheet system linearized around the flat
//! sheet: `N_1 = F_x` and `N_2 = (G_1)_t + (G_2)_x`.

mod majorant;
mod series;

pub use series::{even_kernel_coeffs, odd_kernel_coeffs, rational_series};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::singular::{biot_savart, tj_apply, tj_family, OperatorBackend, OperatorOptions};
use crate::spectral::{analyze, apply_multiplier, b0_norm, brho_norm, pointwise_product, Multiplier, SpectralField};
use majorant::MajorantAlgebra;
use series::{assemble, Algebra};

/// How the nonlinear terms are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearBackend {
    /// Biot–Savart velocities combined pointwise. Used by the solver.
    ClosedForm,
    /// Truncated `T_j` expansions evaluated with the given operator backend.
    Series(OperatorBackend),
}

/// Truncation controls of the series backend.
#[derive(Debug, Clone, Copy)]
pub struct SeriesOptions {
    /// A series stops once the bound on its next term drops below this.
    pub tol: f64,
    /// Hard cap on the highest `T_j` order.
    pub max_order: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_order: 64 }
    }
}

/// `F`, `G_1`, `G_2` at one time slice. The constant `-a/2` of `G_2` is removed.
#[derive(Debug, Clone)]
pub struct NonlinearEval<T: Real> {
    pub f: SpectralField<T>,
    pub g1: SpectralField<T>,
    pub g2: SpectralField<T>,
    /// Highest `T_j` order used (0 for the closed form).
    pub series_terms: usize,
    /// Terms of the `1/(1 + y_x²)` expansion used (0 for the closed form).
    pub geometric_terms: usize,
    /// Bound on the discarded tails in `B_0` (0 for the closed form).
    pub truncation_residual: f64,
}

fn check_inputs<T: Real>(y_x: &SpectralField<T>, omega: &SpectralField<T>) -> Result<()> {
    y_x.same_grid(omega)?;
    let mean = y_x.mean().norm();
    if mean > lit(1e-12) {
        return Err(Error::NonzeroMean(to_f64(mean)));
    }
    Ok(())
}

/// Evaluates all three terms with one backend.
pub fn evaluate<T: Real>(
    y_x: &SpectralField<T>,
    omega: &SpectralField<T>,
    atwood: T,
    backend: NonlinearBackend,
    opts: SeriesOptions,
) -> Result<NonlinearEval<T>> {
    check_inputs(y_x, omega)?;
    match backend {
        NonlinearBackend::ClosedForm => closed_form(y_x, omega, atwood),
        NonlinearBackend::Series(ops) => series_form(y_x, omega, atwood, ops, opts),
    }
}

fn closed_form<T: Real>(y_x: &SpectralField<T>, omega: &SpectralField<T>, atwood: T) -> Result<NonlinearEval<T>> {
    let g = y_x.grid();
    let (v1f, v2f) = biot_savart(y_x, omega)?;
    let v1 = v1f.values();
    let v2 = v2f.values();
    let yx = y_x.values();
    let om = omega.values();
    let hyx = apply_multiplier(y_x, Multiplier::Hilbert, None)?.values();
    let hom = apply_multiplier(omega, Multiplier::Hilbert, None)?.values();
    let half = lit::<T>(0.5);
    let one = T::one();
    let a = atwood;
    let n = g.n_modes();
    let mut f = Vec::with_capacity(n);
    let mut g1 = Vec::with_capacity(n);
    let mut g2 = Vec::with_capacity(n);
    for i in 0..n {
        let (v1, v2, yx, om) = (v1[i], v2[i], yx[i], om[i]);
        let v1_hyx = v1 + hyx[i];
        f.push(v2 - hom[i] - v1 * yx);
        g1.push(a * (v1_hyx + v2 * yx));
        let q = one + om;
        let bracket = half * q * q / (one + yx * yx) - om - half - half * v1 * v1 - half * v2 * v2;
        g2.push(-om * v1 - v1_hyx + a * v1 * v1 + a * v1 * v2 * yx + a * bracket);
    }
    Ok(NonlinearEval {
        f: analyze(g, &f)?,
        g1: analyze(g, &g1)?,
        g2: analyze(g, &g2)?,
        series_terms: 0,
        geometric_terms: 0,
        truncation_residual: 0.0,
    })
}

struct FieldAlgebra<T: Real> {
    y_x: SpectralField<T>,
    omega: SpectralField<T>,
    h_omega: SpectralField<T>,
    tj: Vec<SpectralField<T>>,
    t1_omega: SpectralField<T>,
    geometric: usize,
}

impl<T: Real> Algebra for FieldAlgebra<T> {
    type E = SpectralField<T>;

    fn constant(&self, c: f64) -> Self::E {
        SpectralField::constant(self.y_x.grid(), lit(c))
    }
    fn y_x(&self) -> Self::E {
        self.y_x.clone()
    }
    fn omega(&self) -> Self::E {
        self.omega.clone()
    }
    fn h_omega(&self) -> Self::E {
        self.h_omega.clone()
    }
    fn tj(&self, j: usize) -> Self::E {
        self.tj[j].clone()
    }
    fn t1_omega(&self) -> Self::E {
        self.t1_omega.clone()
    }
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E {
        a + b
    }
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E {
        pointwise_product(a, b).expect("fields share a grid")
    }
    fn scale(&self, a: &Self::E, s: f64) -> Self::E {
        a.scale(lit(s))
    }
    fn order(&self) -> usize {
        self.tj.len() - 1
    }
    fn geometric_terms(&self) -> usize {
        self.geometric
    }
}

/// Orders kept so that the discarded tails, bounded termwise by
/// `(1+2j) ‖y_x‖ʲ ‖1+ω‖` and `‖y_x‖^{2n} (1+‖ω‖)²/2`, each stay below `tol/2`.
/// Returns the `T_j` order, the geometric term count and the total tail bound.
fn truncation(my: f64, mq: f64, mom: f64, opts: SeriesOptions) -> (usize, usize, f64) {
    let term = |j: usize| (1 + 2 * j) as f64 * my.powi(j as i32) * mq;
    let tail_from = |first: usize| {
        let mut tail = 0.0;
        for j in first..first + 100_000 {
            let t = term(j);
            tail += t;
            if t <= 1e-30 * tail || t == 0.0 {
                break;
            }
        }
        tail
    };
    let half = 0.5 * opts.tol;
    let mut order = 2;
    while order < opts.max_order && tail_from(order + 1) >= half {
        order += 1;
    }
    let geo_tail = |n: usize| {
        if my == 0.0 {
            0.0
        } else {
            my.powi(2 * (n as i32 + 1)) * 0.5 * (1.0 + mom).powi(2) / (1.0 - my * my)
        }
    };
    let mut geometric = 1;
    while geometric < opts.max_order && geo_tail(geometric) >= half {
        geometric += 1;
    }
    (order, geometric, tail_from(order + 1) + geo_tail(geometric))
}

fn series_form<T: Real>(
    y_x: &SpectralField<T>,
    omega: &SpectralField<T>,
    atwood: T,
    ops: OperatorBackend,
    opts: SeriesOptions,
) -> Result<NonlinearEval<T>> {
    let my = to_f64(b0_norm(y_x));
    if my >= 1.0 {
        return Err(Error::SeriesDivergence { norm: my });
    }
    let g = y_x.grid();
    let big = &SpectralField::constant(g, T::one()) + omega;
    let (order, geometric, tail) = truncation(my, to_f64(b0_norm(&big)), to_f64(b0_norm(omega)), opts);
    let tj = tj_family(y_x, &big, order, ops)?;
    let t1_omega = tj_apply(y_x, omega, 1, ops, OperatorOptions::default())?;
    let alg = FieldAlgebra {
        y_x: y_x.clone(),
        omega: omega.clone(),
        h_omega: apply_multiplier(omega, Multiplier::Hilbert, None)?,
        tj,
        t1_omega,
        geometric,
    };
    let out = assemble(&alg, to_f64(atwood));
    Ok(NonlinearEval {
        f: out.f,
        g1: out.g1,
        g2: out.g2,
        series_terms: order,
        geometric_terms: geometric,
        truncation_residual: tail,
    })
}

/// `F(y_x, ω) = -v_1 y_x + (v_2 - Hω)`.
pub fn eval_f<T: Real>(y_x: &SpectralField<T>, omega: &SpectralField<T>, backend: NonlinearBackend) -> Result<SpectralField<T>> {
    Ok(evaluate(y_x, omega, T::zero(), backend, SeriesOptions::default())?.f)
}

/// `G_1(y_x, ω) = a(v_1 + Hy_x) + a v_2 y_x`.
pub fn eval_g1<T: Real>(
    y_x: &SpectralField<T>,
    omega: &SpectralField<T>,
    atwood: T,
    backend: NonlinearBackend,
) -> Result<SpectralField<T>> {
    Ok(evaluate(y_x, omega, atwood, backend, SeriesOptions::default())?.g1)
}

/// `G_2(y_x, ω)`, normalized so that `N_2 = (G_1)_t + (G_2)_x`, without its constant `-a/2`.
pub fn eval_g2<T: Real>(
    y_x: &SpectralField<T>,
    omega: &SpectralField<T>,
    atwood: T,
    backend: NonlinearBackend,
) -> Result<SpectralField<T>> {
    Ok(evaluate(y_x, omega, atwood, backend, SeriesOptions::default())?.g2)
}

/// Forcing of the linear system at one time slice.
#[derive(Debug, Clone)]
pub struct Forcing<T: Real> {
    /// `N_1 = F_x`.
    pub n1: SpectralField<T>,
    pub g1: SpectralField<T>,
    pub g2: SpectralField<T>,
}

/// Closed-form `N_1`, `G_1`, `G_2`. `(G_1)_t` is left to the time integrators.
pub fn eval_n<T: Real>(y_x: &SpectralField<T>, omega: &SpectralField<T>, atwood: T) -> Result<Forcing<T>> {
    let e = evaluate(y_x, omega, atwood, NonlinearBackend::ClosedForm, SeriesOptions::default())?;
    Ok(Forcing { n1: apply_multiplier(&e.f, Multiplier::Dx, None)?, g1: e.g1, g2: e.g2 })
}

/// Weighted masses of `F(p_1) - F(p_2)` and `(G_1 + G_2)(p_1) - (G_1 + G_2)(p_2)`
/// next to the majorant built from the operator bounds term by term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceCheck {
    pub lhs_f: f64,
    pub lhs_g: f64,
    pub rhs_f: f64,
    pub rhs_g: f64,
    /// Mass of the common dominating measure `μ`.
    pub mu: f64,
    /// Mass of the difference measure `ν`.
    pub nu: f64,
}

impl DifferenceCheck {
    pub fn holds(&self) -> bool {
        let ok = |l: f64, r: f64| l <= r * (1.0 + crate::singular::BOUND_SLACK) + 1e-300;
        ok(self.lhs_f, self.rhs_f) && ok(self.lhs_g, self.rhs_g)
    }
}

/// Difference estimate for two pairs `(y_x, ω)` in the `e^{ρ|ξ|}`-weighted norm.
pub fn dr_difference_check<T: Real>(
    pair1: (&SpectralField<T>, &SpectralField<T>),
    pair2: (&SpectralField<T>, &SpectralField<T>),
    atwood: T,
    rho: T,
) -> Result<DifferenceCheck> {
    let (y1, w1) = pair1;
    let (y2, w2) = pair2;
    y1.same_grid(y2)?;
    y1.same_grid(w1)?;
    y1.same_grid(w2)?;
    let g = y1.grid();
    let mut mu = 0.0;
    let mut nu = 0.0;
    for i in 0..g.n_modes() {
        let w = to_f64((rho * g.xi(i).abs()).exp());
        let at = |f: &SpectralField<T>| to_f64(f.coeffs()[i].norm());
        mu += w * at(y1).max(at(y2)).max(at(w1)).max(at(w2));
        let dy = to_f64((y1.coeffs()[i] - y2.coeffs()[i]).norm());
        let dw = to_f64((w1.coeffs()[i] - w2.coeffs()[i]).norm());
        nu += w * dy.max(dw);
    }
    if mu >= 1.0 {
        return Err(Error::MeasureTooLarge(mu));
    }
    let e1 = evaluate(y1, w1, atwood, NonlinearBackend::ClosedForm, SeriesOptions::default())?;
    let e2 = evaluate(y2, w2, atwood, NonlinearBackend::ClosedForm, SeriesOptions::default())?;
    let lhs_f = to_f64(brho_norm(&(&e1.f - &e2.f), rho));
    let s1 = &e1.g1 + &e1.g2;
    let s2 = &e2.g1 + &e2.g2;
    let lhs_g = to_f64(brho_norm(&(&s1 - &s2), rho));
    let maj = assemble(&MajorantAlgebra::new(mu, nu), to_f64(atwood));
    Ok(DifferenceCheck { lhs_f, lhs_g, rhs_f: maj.f.d, rhs_g: maj.g1.d + maj.g2.d, mu, nu })
}
