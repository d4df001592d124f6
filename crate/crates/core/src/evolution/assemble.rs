use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::duhamel::{envelope, plus_tail, ModeEntry, PropagatorTable};
use crate::evolution::linalg::{mat2_apply, mat2_norm_inf};
use crate::evolution::propagator::{a_hat, cutoff_chi, cutoff_chi_derivative, matrix_exp_a};
use crate::scalar::{cplx, czero, lit, to_f64, Real};
use crate::spectral::params::m_unchecked;
use crate::spectral::{PhysParams, SpaceTimeField, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions<T> {
    /// Largest admissible bound on the neglected `∫_{T_max}^∞` part of `I^+`.
    pub tail_tolerance: T,
}

impl<T: Real> Default for AssemblyOptions<T> {
    fn default() -> Self {
        Self { tail_tolerance: lit(1e-10) }
    }
}

/// `V = (y_x, ω)` and `U = (u_+, u_-)` on the whole space-time grid.
#[derive(Debug, Clone)]
pub struct AssemblyResult<T: Real> {
    pub y_x: SpaceTimeField<T>,
    pub omega: SpaceTimeField<T>,
    /// Diagonal variables; zero on the zero mode and on matrix-path modes.
    pub u_plus: SpaceTimeField<T>,
    pub u_minus: SpaceTimeField<T>,
    /// `ω(0)` as fixed by requiring `u_+` to stay bounded.
    pub omega0_prescribed: SpectralField<T>,
    pub tail_estimate: T,
    /// Nodes with `t ≤ valid_until` carry the solution.
    pub valid_until: T,
    pub low_modes: usize,
    pub high_modes: usize,
}

struct ModeOut<T: Real> {
    y: Vec<Complex<T>>,
    w: Vec<Complex<T>>,
    up: Vec<Complex<T>>,
    um: Vec<Complex<T>>,
    tail: T,
}

impl<T: Real> ModeOut<T> {
    fn empty() -> Self {
        Self { y: vec![], w: vec![], up: vec![], um: vec![], tail: T::zero() }
    }
}

struct Inputs<'a, T: Real> {
    table: &'a PropagatorTable<T>,
    f: &'a SpaceTimeField<T>,
    g1: &'a SpaceTimeField<T>,
    g2: &'a SpaceTimeField<T>,
    /// `χ` and `χ'` at the nodes.
    chi: Vec<T>,
    dchi: Vec<T>,
    /// Forcing vanishes identically past the last node.
    compact: bool,
}

/// Diagonalized path with the forcing cut by `χ`: the `G_1` time derivative is
/// integrated by parts, leaving the boundary values of `χG_1`.
fn diagonal_mode<T: Real>(inp: &Inputs<'_, T>, i: usize, e: &ModeEntry<T>, y0: Complex<T>) -> Result<ModeOut<T>> {
    let p = inp.table.params();
    let times = inp.table.times();
    let last = times.len() - 1;
    let t_max = times[last];
    let xi = e.xi;
    let m = m_unchecked(xi, p);
    if m.norm() == T::zero() {
        return Err(Error::DegenerateFrequency { xi: to_f64(xi) });
    }
    let ik = cplx(T::zero(), xi);
    let ias = cplx(T::zero(), p.atwood * xi.signum());
    let (lp, lm) = (e.lam_plus, e.lam_minus);
    let (f, g1, g2) = (inp.f.mode_history(i), inp.g1.mode_history(i), inp.g2.mode_history(i));
    let fc: Vec<_> = f.iter().zip(&inp.chi).map(|(&v, &c)| v * c).collect();
    let g1c: Vec<_> = g1.iter().zip(&inp.chi).map(|(&v, &c)| v * c).collect();
    let g2c: Vec<_> = g2.iter().zip(&inp.chi).map(|(&v, &c)| v * c).collect();
    let mut hm = Vec::with_capacity(times.len());
    let mut hp = Vec::with_capacity(times.len());
    for n in 0..times.len() {
        let direct = g1[n] * inp.dchi[n];
        let base = -m * ik * fc[n];
        hm.push(base + ik * g2c[n] - direct + lm * g1c[n]);
        hp.push(base - ik * g2c[n] + direct - lp * g1c[n]);
    }
    let im = e.minus.forward(&hm);
    let jp = e.plus_back.backward(&hp);
    let up: Vec<_> = (0..times.len())
        .map(|n| -jp[n] + (lp * (times[n] - t_max)).exp() * g1c[last] - g1c[n])
        .collect();
    let um0 = -m * y0 * lit::<T>(2.0) - up[0];
    let um: Vec<_> = (0..times.len())
        .map(|n| (lm * times[n]).exp() * (um0 - g1c[0]) + im[n] + g1c[n])
        .collect();
    let inv = -(m * lit::<T>(2.0)).inv();
    let y: Vec<_> = up.iter().zip(&um).map(|(&a, &b)| (a + b) * inv).collect();
    let w: Vec<_> = up.iter().zip(&um).map(|(&a, &b)| ((m + ias) * a + (ias - m) * b) * inv).collect();
    let tail = if inp.compact {
        T::zero()
    } else {
        let alpha = p.alpha;
        plus_tail(envelope(&hp, times, xi, alpha), lp, xi, alpha, t_max)
            + envelope(&g1c, times, xi, alpha) * (-alpha * t_max * xi.abs()).exp()
    };
    Ok(ModeOut { y, w, up, um, tail })
}

/// Direct path `V(t) = e^{tÂ}(V_0 - (0, G_1(0))) + (0, G_1(t)) + ∫ e^{(t-s)Â} n(s) ds`,
/// `n = (iξF, iξG_2 - aĤ iξF) + Â(0, G_1)`.
fn matrix_mode<T: Real>(
    inp: &Inputs<'_, T>,
    i: usize,
    e: &ModeEntry<T>,
    y0: Complex<T>,
    w0: Complex<T>,
) -> ModeOut<T> {
    let p = inp.table.params();
    let times = inp.table.times();
    let xi = e.xi;
    let integ = e.matrix.as_ref().expect("low mode has a matrix integrator");
    let ik = cplx(T::zero(), xi);
    let ah = a_hat(xi, p);
    // -aĤ iξ = -a|ξ|
    let hilbert_n1 = cplx(-p.atwood * xi.abs(), T::zero());
    let (f, g1, g2) = (inp.f.mode_history(i), inp.g1.mode_history(i), inp.g2.mode_history(i));
    let n: Vec<[Complex<T>; 2]> = (0..times.len())
        .map(|k| {
            let shift = mat2_apply(&ah, [czero(), g1[k]]);
            let n1 = ik * f[k];
            [n1 + shift[0], ik * g2[k] + hilbert_n1 * f[k] + shift[1]]
        })
        .collect();
    let integral = integ.forward(&n);
    let start = [y0, w0 - g1[0]];
    let mut y = Vec::with_capacity(times.len());
    let mut w = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let free = mat2_apply(&matrix_exp_a(xi, t, p), start);
        y.push(free[0] + integral[k][0]);
        w.push(free[1] + g1[k] + integral[k][1]);
    }
    let zeros = vec![czero(); times.len()];
    ModeOut { y, w, up: zeros.clone(), um: zeros, tail: T::zero() }
}

fn check_inputs<T: Real>(
    table: &PropagatorTable<T>,
    y0x: &SpectralField<T>,
    fields: [&SpaceTimeField<T>; 3],
) -> Result<()> {
    if y0x.grid() != table.grid() {
        return Err(Error::GridMismatch);
    }
    let mean = y0x.coeff(0).norm();
    if mean > lit(1e-12) {
        return Err(Error::NonzeroMean(to_f64(mean)));
    }
    for f in fields {
        table.check(f)?;
    }
    Ok(())
}

fn finish<T: Real>(
    table: &PropagatorTable<T>,
    g1: &SpaceTimeField<T>,
    outs: Vec<ModeOut<T>>,
    omega0_low: Option<&SpectralField<T>>,
    valid_until: T,
) -> AssemblyResult<T> {
    let n = table.grid().n_modes();
    let mut ys = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    let mut ups = Vec::with_capacity(n);
    let mut ums = Vec::with_capacity(n);
    let mut tail = T::zero();
    for (i, o) in outs.into_iter().enumerate() {
        tail = tail + o.tail;
        if i == 0 {
            // y_x has mean zero; the mean of ω follows G_1
            ws.push(g1.mode_history(0));
            ys.push(vec![]);
        } else {
            ys.push(o.y);
            ws.push(o.w);
        }
        ups.push(o.up);
        ums.push(o.um);
    }
    let omega = table.collect(ws);
    let mut omega0 = omega.slice(0).clone();
    if let Some(w0) = omega0_low {
        for i in 0..n {
            if table.is_low(i) {
                omega0.coeffs_mut()[i] = w0.coeffs()[i];
            }
        }
    }
    let low = (0..n).filter(|&i| table.is_low(i)).count();
    let high = (1..n).filter(|&i| table.entry(i).is_some() && !table.is_low(i)).count();
    AssemblyResult {
        y_x: table.collect(ys),
        omega,
        u_plus: table.collect(ups),
        u_minus: table.collect(ums),
        omega0_prescribed: omega0,
        tail_estimate: tail,
        valid_until,
        low_modes: low,
        high_modes: high,
    }
}

/// Diagonalized representation for `a ≥ 0`: `u_-` forward from `t = 0`,
/// `u_+` backward from infinity, `ω(0)` prescribed so that `u_+` stays bounded.
pub fn assemble_apos<T: Real>(
    table: &PropagatorTable<T>,
    y0x: &SpectralField<T>,
    f: &SpaceTimeField<T>,
    g1: &SpaceTimeField<T>,
    g2: &SpaceTimeField<T>,
    opts: &AssemblyOptions<T>,
) -> Result<AssemblyResult<T>> {
    let p = table.params();
    if p.atwood < T::zero() {
        return Err(Error::InvalidParameter(format!("diagonal assembly needs a >= 0, got {}", p.atwood)));
    }
    check_inputs(table, y0x, [f, g1, g2])?;
    let len = table.times().len();
    let inp = Inputs { table, f, g1, g2, chi: vec![T::one(); len], dchi: vec![T::zero(); len], compact: false };
    let outs = (0..table.grid().n_modes())
        .into_par_iter()
        .map(|i| match table.entry(i) {
            Some(e) if i != 0 => diagonal_mode(&inp, i, e, y0x.coeffs()[i]),
            _ => Ok(ModeOut::empty()),
        })
        .collect::<Result<Vec<_>>>()?;
    let t_max = table.times()[len - 1];
    let res = finish(table, g1, outs, None, t_max);
    if !(res.tail_estimate <= opts.tail_tolerance) {
        return Err(Error::TailTolerance { tail: to_f64(res.tail_estimate), tol: to_f64(opts.tail_tolerance) });
    }
    Ok(res)
}

/// Split representation for `a < 0`: modes with `|ξ| ≤ 2ag/(1-a²)` propagate by
/// `e^{tÂ}` from `(y_{0x}, ω_0)`; the rest use the diagonalized path with forcing
/// cut off by `χ(s/T)`. The result is the solution only for `t ≤ T`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_aneg<T: Real>(
    table: &PropagatorTable<T>,
    y0x: &SpectralField<T>,
    omega0: &SpectralField<T>,
    f: &SpaceTimeField<T>,
    g1: &SpaceTimeField<T>,
    g2: &SpaceTimeField<T>,
    horizon: T,
) -> Result<AssemblyResult<T>> {
    let p = table.params();
    if !(p.atwood < T::zero()) {
        return Err(Error::InvalidParameter(format!("split assembly needs a < 0, got {}", p.atwood)));
    }
    if table.split().is_none() {
        return Err(Error::Config("split assembly needs a propagator table built with the low/high split".into()));
    }
    if omega0.grid() != table.grid() {
        return Err(Error::GridMismatch);
    }
    check_inputs(table, y0x, [f, g1, g2])?;
    let times = table.times();
    let t_max = times[times.len() - 1];
    if !(horizon > T::zero()) || t_max < horizon + horizon {
        return Err(Error::Config(format!(
            "time grid must cover [0, 2T]: T = {horizon}, t_max = {t_max}"
        )));
    }
    let n = table.grid().n_modes();
    let low = (1..n).filter(|&i| table.is_low(i)).count();
    let high = (1..n).filter(|&i| table.entry(i).is_some() && !table.is_low(i)).count();
    if low == 0 || high == 0 {
        return Err(Error::Config(format!(
            "grid does not straddle the split frequency {}: {low} low and {high} high modes",
            to_f64(table.split().unwrap_or(T::zero()))
        )));
    }
    let inp = Inputs {
        table,
        f,
        g1,
        g2,
        chi: times.iter().map(|&t| cutoff_chi(t, horizon)).collect(),
        dchi: times.iter().map(|&t| cutoff_chi_derivative(t, horizon)).collect(),
        compact: true,
    };
    let outs = (0..n)
        .into_par_iter()
        .map(|i| match table.entry(i) {
            Some(e) if i != 0 && e.matrix.is_some() => Ok(matrix_mode(&inp, i, e, y0x.coeffs()[i], omega0.coeffs()[i])),
            Some(e) if i != 0 => diagonal_mode(&inp, i, e, y0x.coeffs()[i]),
            _ => Ok(ModeOut::empty()),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(table, g1, outs, Some(omega0), horizon))
}

/// Largest `|BV - U|` over nodes and diagonal-path modes.
pub fn bv_consistency<T: Real>(res: &AssemblyResult<T>, params: &PhysParams<T>, table: &PropagatorTable<T>) -> T {
    let g = res.y_x.grid();
    let mut worst = T::zero();
    for n in 0..res.y_x.len() {
        let (y, w) = (res.y_x.slice(n), res.omega.slice(n));
        let (up, um) = (res.u_plus.slice(n), res.u_minus.slice(n));
        for i in 1..g.n_modes() {
            if g.is_excluded(i) || table.is_low(i) {
                continue;
            }
            let xi = g.xi(i);
            let m = m_unchecked(xi, params);
            let ias = cplx(T::zero(), params.atwood * xi.signum());
            let (yi, wi) = (y.coeffs()[i], w.coeffs()[i]);
            let bp = (ias - m) * yi - wi;
            let bm = (-m - ias) * yi + wi;
            let d = (bp - up.coeffs()[i]).norm().max((bm - um.coeffs()[i]).norm());
            worst = worst.max(d);
        }
    }
    worst
}

/// `max ‖Â(ξ)‖_∞` over the matrix-path modes: a growth rate for the free low-mode flow.
pub fn low_mode_growth_bound<T: Real>(table: &PropagatorTable<T>) -> T {
    let g = table.grid();
    (0..g.n_modes())
        .filter(|&i| table.is_low(i))
        .map(|i| mat2_norm_inf(&a_hat(g.xi(i), table.params())))
        .fold(T::zero(), T::max)
}
