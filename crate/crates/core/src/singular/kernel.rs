use num_complex::Complex;

use crate::scalar::{cplx, from_usize, lit, Real};

/// `K_{j+1}(z) = ((-1)^j / j!) dʲ/dzʲ [(1/2L) cot(z/2L)]`, the image sum of `z^{-(j+1)}`
/// over the periods `2πL`.
#[derive(Debug, Clone)]
pub struct PeriodizedKernel<T: Real> {
    order: usize,
    scale: T,
    /// Coefficients of the polynomial `P_j` with `cot^{(j)}(w) = P_j(cot w)`, lowest degree first.
    poly: Vec<T>,
    prefactor: T,
}

impl<T: Real> PeriodizedKernel<T> {
    /// Kernel `K_{order+1}` on the torus of length `2πL`.
    pub fn new(order: usize, period_scale: T) -> Self {
        let scale = T::one() / (lit::<T>(2.0) * period_scale);
        let poly = cot_derivative_poly(order).into_iter().map(lit).collect();
        let mut fact = T::one();
        for k in 1..=order {
            fact = fact * from_usize::<T>(k);
        }
        let sign = if order % 2 == 0 { T::one() } else { -T::one() };
        let prefactor = sign * scale.powi(order as i32 + 1) / fact;
        Self { order, scale, poly, prefactor }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    /// Evaluates the kernel at `z ≢ 0 (mod 2πL)`.
    #[inline]
    pub fn eval(&self, z: T) -> T {
        let c = T::one() / (self.scale * z).tan();
        let mut acc = T::zero();
        for &p in self.poly.iter().rev() {
            acc = acc * c + p;
        }
        self.prefactor * acc
    }
}

/// Integer coefficients of `P_j` where `dʲ/dwʲ cot w = P_j(cot w)`; `P_0(c) = c`,
/// `P_{j+1}(c) = -(1 + c²) P_j'(c)`.
pub fn cot_derivative_poly(j: usize) -> Vec<f64> {
    let mut p = vec![0.0, 1.0];
    for _ in 0..j {
        let dp: Vec<f64> = (1..p.len()).map(|k| k as f64 * p[k]).collect();
        let mut next = vec![0.0; dp.len() + 2];
        for (k, &d) in dp.iter().enumerate() {
            next[k] -= d;
            next[k + 2] -= d;
        }
        p = next;
    }
    p
}

/// `K_1(w) = (1/2L) cot(w/2L)` at complex argument.
#[inline]
pub fn hilbert_kernel_complex<T: Real>(w: Complex<T>, period_scale: T) -> Complex<T> {
    let s = T::one() / (lit::<T>(2.0) * period_scale);
    let a = w * s;
    a.cos() / a.sin() * s
}

/// `K_1(x + δ) - K_1(x)` for real `x ≢ 0` and complex `δ`, free of cancellation:
/// `cot(A+B) - cot(A) = -sin B / (sin(A+B) sin A)`.
#[inline]
pub fn hilbert_kernel_increment<T: Real>(x: T, delta: Complex<T>, period_scale: T) -> Complex<T> {
    let s = T::one() / (lit::<T>(2.0) * period_scale);
    let a = x * s;
    let b = delta * s;
    let sin_ab = (cplx(a, T::zero()) + b).sin();
    -(b.sin()) / (sin_ab * a.sin()) * s
}
