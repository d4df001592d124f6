use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cplx, lit, Real};

/// Physical parameters of the two-fluid vortex sheet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams<T: Real> {
    /// Atwood number `a`, `|a| < 1`.
    pub atwood: T,
    /// Gravitational acceleration `g < 0`.
    pub gravity: T,
    /// Decay weight `α > 0` of the space-time norm.
    pub alpha: T,
}

impl<T: Real> PhysParams<T> {
    pub fn new(atwood: T, gravity: T, alpha: T) -> Result<Self> {
        let p = Self { atwood, gravity, alpha };
        let issues = p.violations();
        if issues.is_empty() {
            Ok(p)
        } else {
            Err(Error::InvalidParameter(issues.join("; ")))
        }
    }

    /// Every constraint violation, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (a, g, alpha) = (self.atwood, self.gravity, self.alpha);
        if !(a.abs() < T::one()) {
            out.push(format!("Atwood number must satisfy |a| < 1, got a = {a}"));
        }
        if !(g < T::zero()) {
            out.push(format!("gravity must be negative, got g = {g}"));
        }
        if !(alpha > T::zero()) {
            out.push(format!("alpha must be positive, got alpha = {alpha}"));
        }
        if a >= T::zero() && a.abs() < T::one() {
            let cap = self.alpha_cap();
            if !(alpha < cap) {
                out.push(format!(
                    "Duhamel estimate constraint violated: alpha must be < sqrt(1-a^2)/2 = {cap:.6}, got {alpha}"
                ));
            }
        }
        out
    }

    /// `√(1-a²)/2`, the largest admissible decay weight for `a ≥ 0`.
    pub fn alpha_cap(&self) -> T {
        (T::one() - self.atwood * self.atwood).sqrt() / lit(2.0)
    }

    /// `|ξ| = ag/(1-a²)`, where `m` vanishes when `a < 0`.
    pub fn degenerate_frequency(&self) -> Option<T> {
        let a = self.atwood;
        if a < T::zero() {
            Some(a * self.gravity / (T::one() - a * a))
        } else {
            None
        }
    }
}

/// Radicand `1 - a² - a g / |ξ|` of the multiplier `m`.
///
/// Values within rounding of zero are snapped to exactly zero so the
/// degenerate frequency is recognised when it lies on the grid.
pub fn m_radicand<T: Real>(xi: T, params: &PhysParams<T>) -> T {
    let a = params.atwood;
    let head = T::one() - a * a;
    let tail = a * params.gravity / xi.abs();
    let r = head - tail;
    if r.abs() <= lit::<T>(8.0) * T::epsilon() * (head.abs() + tail.abs()) {
        T::zero()
    } else {
        r
    }
}

/// The multiplier `m(ξ)`: real square root of the radicand, or `i√|radicand|` when it is negative.
pub fn symbol_m<T: Real>(xi: T, params: &PhysParams<T>) -> Result<Complex<T>> {
    if xi == T::zero() {
        return Err(Error::InvalidParameter("m(xi) is undefined at xi = 0".into()));
    }
    Ok(m_unchecked(xi, params))
}

#[inline]
pub(crate) fn m_unchecked<T: Real>(xi: T, params: &PhysParams<T>) -> Complex<T> {
    let r = m_radicand(xi, params);
    if r >= T::zero() {
        cplx(r.sqrt(), T::zero())
    } else {
        cplx(T::zero(), (-r).sqrt())
    }
}

/// Eigenvalues `λ± = iaξ ± |ξ| m(ξ)` of the linear symbol matrix.
pub fn eigenvalues<T: Real>(xi: T, params: &PhysParams<T>) -> (Complex<T>, Complex<T>) {
    if xi == T::zero() {
        let z = cplx(T::zero(), T::zero());
        return (z, z);
    }
    let m = m_unchecked(xi, params);
    let drift = cplx(T::zero(), params.atwood * xi);
    let spread = m * xi.abs();
    (drift + spread, drift - spread)
}
