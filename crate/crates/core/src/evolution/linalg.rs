//! φ-functions, interpolation stencils and small complex matrices.

use num_complex::Complex;

use crate::scalar::{czero, from_usize, lit, Real};

pub type Mat2<T> = [[Complex<T>; 2]; 2];

pub fn mat2_identity<T: Real>() -> Mat2<T> {
    let (o, z) = (Complex::new(T::one(), T::zero()), czero());
    [[o, z], [z, o]]
}

#[cfg(test)]
pub fn mat2_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut out = [[czero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_add<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn mat2_scale<T: Real>(a: &Mat2<T>, s: Complex<T>) -> Mat2<T> {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

#[inline]
pub fn mat2_apply<T: Real>(a: &Mat2<T>, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Largest absolute row sum.
pub fn mat2_norm_inf<T: Real>(a: &Mat2<T>) -> T {
    (a[0][0].norm() + a[0][1].norm()).max(a[1][0].norm() + a[1][1].norm())
}

/// Dense square complex matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T: Real> {
    pub n: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![czero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if a == czero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * other.at(k, j);
                }
            }
        }
        out
    }

    pub fn norm_one(&self) -> T {
        (0..self.n)
            .map(|j| (0..self.n).fold(T::zero(), |s, i| s + self.at(i, j).norm()))
            .fold(T::zero(), T::max)
    }

    /// `exp` by scaling and squaring around a degree-18 Taylor polynomial.
    pub fn exp(&self) -> Self {
        let n = self.n;
        let norm = self.norm_one();
        let mut squarings = 0;
        let mut scale = T::one();
        while norm * scale > lit(0.25) {
            scale = scale / lit(2.0);
            squarings += 1;
        }
        let a = Self { n, data: self.data.iter().map(|&z| z * scale).collect() };
        let mut result = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=18 {
            term = term.mul(&a);
            let inv = T::one() / from_usize::<T>(k);
            for z in term.data.iter_mut() {
                *z = *z * inv;
            }
            for (r, t) in result.data.iter_mut().zip(&term.data) {
                *r = *r + *t;
            }
        }
        for _ in 0..squarings {
            result = result.mul(&result);
        }
        result
    }
}

/// `φ_0(z), …, φ_p(z)` with `φ_0 = eᶻ`, `φ_{k+1}(z) = (φ_k(z) - 1/k!)/z`.
pub fn phi_functions<T: Real>(z: Complex<T>, p: usize) -> Vec<Complex<T>> {
    let mut out = Vec::with_capacity(p + 1);
    if z.norm() < T::one() {
        // φ_k(z) = Σ_n zⁿ/(n+k)!
        for k in 0..=p {
            let mut fact = T::one();
            for i in 1..=k {
                fact = fact * from_usize::<T>(i);
            }
            let mut term = Complex::new(T::one() / fact, T::zero());
            let mut sum = term;
            for n in 1..40 {
                term = term * z / from_usize::<T>(n + k);
                sum = sum + term;
                if term.norm() < T::epsilon() * lit(1e-3) * sum.norm() {
                    break;
                }
            }
            out.push(sum);
        }
    } else {
        out.push(z.exp());
        let mut fact = T::one();
        for k in 0..p {
            if k > 0 {
                fact = fact * from_usize::<T>(k);
            }
            let next = (out[k] - Complex::new(T::one() / fact, T::zero())) / z;
            out.push(next);
        }
    }
    out
}

/// `e^Z, φ_1(Z), …, φ_p(Z)` for a 2×2 matrix through the exponential of the
/// block matrix `[[Z, I, 0..], [0, 0, I, ..], …, [0, …, 0]]`.
pub fn phi_functions_mat2<T: Real>(z: &Mat2<T>, p: usize) -> Vec<Mat2<T>> {
    let n = 2 * (p + 1);
    let mut w = CMat::zeros(n);
    for i in 0..2 {
        for j in 0..2 {
            w.set(i, j, z[i][j]);
        }
    }
    let one = Complex::new(T::one(), T::zero());
    for b in 0..p {
        for i in 0..2 {
            w.set(2 * b + i, 2 * (b + 1) + i, one);
        }
    }
    let e = w.exp();
    (0..=p)
        .map(|b| [[e.at(0, 2 * b), e.at(0, 2 * b + 1)], [e.at(1, 2 * b), e.at(1, 2 * b + 1)]])
        .collect()
}

/// Monomial coefficients (lowest first) of the Lagrange basis polynomials on `nodes`.
pub fn lagrange_monomials(nodes: &[f64]) -> Vec<Vec<f64>> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for (m, &xm) in nodes.iter().enumerate() {
                if m == j {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (k, &c) in poly.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= xm * c;
                }
                poly = next;
                denom *= xj - xm;
            }
            poly.iter().map(|c| c / denom).collect()
        })
        .collect()
}
