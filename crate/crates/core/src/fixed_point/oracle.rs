use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::singular::biot_savart;
use crate::spectral::{analyze, apply_multiplier, Multiplier, PhysParams, SpaceTimeField, SpectralField};

const RECOVERY_MAX: usize = 200;

/// Solves `ω = Q - 1 + a(v_1 + v_2 y_x)` for `ω`, the velocities depending linearly on `1 + ω`.
fn recover_omega<T: Real>(
    y_x: &SpectralField<T>,
    q: &SpectralField<T>,
    atwood: T,
    guess: &SpectralField<T>,
) -> Result<SpectralField<T>> {
    let g = y_x.grid();
    let yx = y_x.values();
    let qv = q.values();
    let mut w = guess.clone();
    let tol = lit::<T>(1e-14);
    for _ in 0..RECOVERY_MAX {
        let (v1, v2) = biot_savart(y_x, &w)?;
        let (v1, v2) = (v1.values(), v2.values());
        let next: Vec<T> = (0..yx.len()).map(|i| qv[i] - T::one() + atwood * (v1[i] + v2[i] * yx[i])).collect();
        let next = analyze(g, &next)?;
        let change = (&next - &w).sup_norm();
        w = next;
        if change <= tol * (T::one() + w.sup_norm()) {
            return Ok(w);
        }
    }
    Err(Error::Stability("vorticity recovery did not converge".into()))
}

struct State<T: Real> {
    y_x: SpectralField<T>,
    q: SpectralField<T>,
    omega: SpectralField<T>,
}

/// Right-hand side of `∂_t y_x = ∂_x(v_2 - v_1 y_x)`,
/// `∂_t Q = ∂_x[-v_1 Q + a((1+ω)²/(2(1+y_x²)) - |v|²/2)] - a g y_x`.
fn rhs<T: Real>(s: &State<T>, params: &PhysParams<T>) -> Result<(SpectralField<T>, SpectralField<T>)> {
    let g = s.y_x.grid();
    let a = params.atwood;
    let (v1, v2) = biot_savart(&s.y_x, &s.omega)?;
    let (v1, v2) = (v1.values(), v2.values());
    let yx = s.y_x.values();
    let om = s.omega.values();
    let q = s.q.values();
    let half = lit::<T>(0.5);
    let mut flux_y = Vec::with_capacity(yx.len());
    let mut flux_q = Vec::with_capacity(yx.len());
    for i in 0..yx.len() {
        flux_y.push(v2[i] - v1[i] * yx[i]);
        let w1 = T::one() + om[i];
        let bern = half * w1 * w1 / (T::one() + yx[i] * yx[i]) - half * (v1[i] * v1[i] + v2[i] * v2[i]);
        flux_q.push(-v1[i] * q[i] + a * bern);
    }
    let dy = apply_multiplier(&analyze(g, &flux_y)?, Multiplier::Dx, None)?;
    let dq = apply_multiplier(&analyze(g, &flux_q)?, Multiplier::Dx, None)?;
    let dq = dq.axpy(-a * params.gravity, &s.y_x)?;
    Ok((dy, dq))
}

fn stage<T: Real>(
    base: &State<T>,
    k: Option<&(SpectralField<T>, SpectralField<T>)>,
    h: T,
    params: &PhysParams<T>,
) -> Result<State<T>> {
    let Some((ky, kq)) = k else {
        return Ok(State { y_x: base.y_x.clone(), q: base.q.clone(), omega: base.omega.clone() });
    };
    let y_x = base.y_x.axpy(h, ky)?;
    let q = base.q.axpy(h, kq)?;
    let omega = recover_omega(&y_x, &q, params.atwood, &base.omega)?;
    Ok(State { y_x, q, omega })
}

/// Classical RK4 for the interface equations in the unknowns `(y_x, Q)`,
/// `Q = ½ω̃ - a(v_1 + v_2 y_x)`, with velocities from the quadrature Biot–Savart law.
/// Returns `(y_x, ω)` at `t = k·dt` up to the horizon.
pub fn oracle_rk4_vortex<T: Real>(
    y0x: &SpectralField<T>,
    omega0: &SpectralField<T>,
    params: &PhysParams<T>,
    horizon: T,
    dt: T,
) -> Result<(SpaceTimeField<T>, SpaceTimeField<T>)> {
    if !(dt > T::zero()) || !(horizon > T::zero()) {
        return Err(Error::InvalidParameter("oracle needs positive dt and horizon".into()));
    }
    let g = y0x.grid();
    let steps = (horizon / dt).round().to_usize().unwrap_or(0).max(1);
    let a = params.atwood;
    let (v1, v2) = biot_savart(y0x, omega0)?;
    let (v1, v2, yx) = (v1.values(), v2.values(), y0x.values());
    let om = omega0.values();
    let q0: Vec<T> = (0..yx.len()).map(|i| T::one() + om[i] - a * (v1[i] + v2[i] * yx[i])).collect();
    let mut s = State { y_x: y0x.clone(), q: analyze(g, &q0)?, omega: omega0.clone() };
    let guard = lit::<T>(1e3) * (T::one() + y0x.sup_norm() + omega0.sup_norm());
    let mut times = vec![T::zero()];
    let mut ys = vec![s.y_x.clone()];
    let mut ws = vec![s.omega.clone()];
    let two = lit::<T>(2.0);
    let six = lit::<T>(6.0);
    for n in 1..=steps {
        let k1 = rhs(&stage(&s, None, T::zero(), params)?, params)?;
        let s2 = stage(&s, Some(&k1), dt / two, params)?;
        let k2 = rhs(&s2, params)?;
        let s3 = stage(&s, Some(&k2), dt / two, params)?;
        let k3 = rhs(&s3, params)?;
        let s4 = stage(&s, Some(&k3), dt, params)?;
        let k4 = rhs(&s4, params)?;
        let comb = |a: &SpectralField<T>, b: &SpectralField<T>, c: &SpectralField<T>, d: &SpectralField<T>| {
            a.map_modes(|i, _, v| (v + (b.coeffs()[i] + c.coeffs()[i]) * two + d.coeffs()[i]) * (dt / six))
        };
        let y_x = &s.y_x + &comb(&k1.0, &k2.0, &k3.0, &k4.0);
        let q = &s.q + &comb(&k1.1, &k2.1, &k3.1, &k4.1);
        let omega = recover_omega(&y_x, &q, a, &s4.omega)?;
        s = State { y_x, q, omega };
        let size = s.y_x.sup_norm() + s.omega.sup_norm();
        if !size.is_finite() || size > guard {
            return Err(Error::Stability(format!(
                "RK4 trajectory left the guard at step {n} (sup-norm {})",
                to_f64(size)
            )));
        }
        times.push(dt * T::from_usize(n).expect("step count"));
        ys.push(s.y_x.clone());
        ws.push(s.omega.clone());
    }
    Ok((SpaceTimeField::new(g, times.clone(), ys)?, SpaceTimeField::new(g, times, ws)?))
}
