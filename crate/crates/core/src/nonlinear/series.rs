//! Series assembly of `F`, `G_1`, `G_2` written once over an abstract algebra,
//! so the field evaluation and its norm majorant share every term and sign.

/// Taylor coefficients of `num(p)/den(p)` up to degree `n - 1`, by long division.
/// `den[0]` must be `±1` so all coefficients stay integral.
pub fn rational_series(num: &[i64], den: &[i64], n: usize) -> Vec<i64> {
    assert!(den.first().is_some_and(|d| d.abs() == 1), "leading denominator coefficient must be ±1");
    let mut out = vec![0i64; n];
    for k in 0..n {
        let mut acc = num.get(k).copied().unwrap_or(0);
        for i in 1..den.len().min(k + 1) {
            acc -= den[i] * out[k - i];
        }
        out[k] = acc * den[0];
    }
    out
}

/// Coefficients of `1/(1+p²)`, the kernel factor of `v_2`.
pub fn even_kernel_coeffs(n: usize) -> Vec<i64> {
    rational_series(&[1], &[1, 0, 1], n)
}

/// Coefficients of `p/(1+p²)`, the kernel factor of `v_1`.
pub fn odd_kernel_coeffs(n: usize) -> Vec<i64> {
    rational_series(&[0, 1], &[1, 0, 1], n)
}

pub(crate) trait Algebra {
    type E: Clone;
    fn constant(&self, c: f64) -> Self::E;
    fn y_x(&self) -> Self::E;
    fn omega(&self) -> Self::E;
    fn h_omega(&self) -> Self::E;
    /// `T_j(y_x)(1 + ω)`.
    fn tj(&self, j: usize) -> Self::E;
    /// `T_1(y_x) ω`.
    fn t1_omega(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn scale(&self, a: &Self::E, s: f64) -> Self::E;
    /// Highest `T_j` order kept.
    fn order(&self) -> usize;
    /// Terms kept in `Σ_{n≥1} (-1)ⁿ y_x^{2n}`.
    fn geometric_terms(&self) -> usize;
}

pub(crate) struct Assembled<E> {
    pub f: E,
    pub g1: E,
    pub g2: E,
}

fn lin_comb<A: Algebra>(alg: &A, coeffs: &[i64], from: usize, sign: f64) -> A::E {
    let mut acc = alg.constant(0.0);
    for (j, &c) in coeffs.iter().enumerate().skip(from) {
        if c != 0 {
            acc = alg.add(&acc, &alg.scale(&alg.tj(j), sign * c as f64));
        }
    }
    acc
}

/// `F = v_2 - Hω - v_1 y_x`, `G_1 = a(v_1 + Hy_x + v_2 y_x)` and
/// `G_2 = -ωv_1 - (v_1 + Hy_x) + a v_1² + a v_1 v_2 y_x
///        + a[½(1+ω)²/(1+y_x²) - ω - ½ - ½v_1² - ½v_2²]`,
/// with `v_1 = -Σ o_j T_j(1+ω)`, `v_2 = Σ e_j T_j(1+ω)` and `T_1(1) = Hy_x` used
/// to cancel the linear part of `v_1` exactly.
pub(crate) fn assemble<A: Algebra>(alg: &A, atwood: f64) -> Assembled<A::E> {
    let n = alg.order() + 1;
    let even = even_kernel_coeffs(n);
    let odd = odd_kernel_coeffs(n);
    debug_assert!(even[0] == 1 && odd.get(1).is_none_or(|&c| c == 1));

    let v1 = lin_comb(alg, &odd, 1, -1.0);
    // v_1 + H y_x = -T_1 ω - Σ_{j≥3} o_j T_j(1+ω)
    let v1_hyx = alg.add(&alg.scale(&alg.t1_omega(), -1.0), &lin_comb(alg, &odd, 3, -1.0));
    let v2_rest = lin_comb(alg, &even, 1, 1.0);
    let v2 = alg.add(&alg.h_omega(), &v2_rest);

    let y_x = alg.y_x();
    let om = alg.omega();

    let f = alg.add(&v2_rest, &alg.scale(&alg.mul(&y_x, &v1), -1.0));
    let g1 = alg.scale(&alg.add(&v1_hyx, &alg.mul(&v2, &y_x)), atwood);

    // ½(1+ω)²/(1+y_x²) - ω - ½ = ½ω² + ½(1+ω)² Σ_{n≥1} (-1)ⁿ y_x^{2n}
    let y2 = alg.mul(&y_x, &y_x);
    let mut geo = alg.constant(0.0);
    let mut pw = alg.constant(1.0);
    for k in 1..=alg.geometric_terms() {
        pw = alg.mul(&pw, &y2);
        let s = if k % 2 == 1 { -1.0 } else { 1.0 };
        geo = alg.add(&geo, &alg.scale(&pw, s));
    }
    let one_om = alg.add(&alg.constant(1.0), &om);
    let sq = alg.mul(&one_om, &one_om);
    let bracket = [
        alg.scale(&alg.mul(&om, &om), 0.5),
        alg.scale(&alg.mul(&sq, &geo), 0.5),
        alg.scale(&alg.mul(&v1, &v1), -0.5),
        alg.scale(&alg.mul(&v2, &v2), -0.5),
    ];
    let bracket = bracket.iter().skip(1).fold(bracket[0].clone(), |a, b| alg.add(&a, b));

    let v1v2 = alg.mul(&v1, &v2);
    let terms = [
        alg.scale(&alg.mul(&om, &v1), -1.0),
        alg.scale(&v1_hyx, -1.0),
        alg.scale(&alg.mul(&v1, &v1), atwood),
        alg.scale(&alg.mul(&v1v2, &y_x), atwood),
        alg.scale(&bracket, atwood),
    ];
    let g2 = terms.iter().skip(1).fold(terms[0].clone(), |a, b| alg.add(&a, b));
    Assembled { f, g1, g2 }
}
