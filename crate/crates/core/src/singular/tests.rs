use num_complex::Complex;
use proptest::prelude::*;

use super::*;
use crate::spectral::{apply_multiplier, b0_norm, make_grid, pointwise_product, FrequencyGrid, Multiplier, SpectralField};
use crate::test_util::{random_band_limited, random_with_norm};

const Q: OperatorBackend = OperatorBackend::Quadrature;
const S: OperatorBackend = OperatorBackend::Spectral;

fn opts() -> OperatorOptions {
    OperatorOptions::default()
}

fn grid(n: usize, l: f64) -> FrequencyGrid<f64> {
    make_grid(n, l).unwrap()
}

fn cos1(g: &FrequencyGrid<f64>, amp: f64) -> SpectralField<f64> {
    SpectralField::from_cosines(g, &[(1, amp, 0.0)]).unwrap()
}

fn dist(a: &SpectralField<f64>, b: &SpectralField<f64>) -> f64 {
    b0_norm(&(a - b))
}

#[test]
fn t0_is_hilbert() {
    let g = grid(64, 1.0);
    let u = SpectralField::from_cosines(&g, &[(3, 1.0, 0.0)]).unwrap();
    let sin3 = SpectralField::from_cosines(&g, &[(3, 1.0, -std::f64::consts::FRAC_PI_2)]).unwrap();
    let y_x = cos1(&g, 0.1);
    for b in [Q, S] {
        let out = tj_apply(&y_x, &u, 0, b, opts()).unwrap();
        assert!(dist(&out, &sin3) < 1e-13, "{b:?}");
    }
}

#[test]
fn flat_profile_kills_higher_orders() {
    let g = grid(64, 1.0);
    let y_x = SpectralField::zeros(&g);
    let u = random_band_limited(&g, 5, 1.0, 1);
    for j in 1..=4 {
        for b in [Q, S] {
            assert!(b0_norm(&tj_apply(&y_x, &u, j, b, opts()).unwrap()) < 1e-14);
        }
    }
}

#[test]
fn order_and_band_limits() {
    let g = grid(64, 1.0);
    let y_x = cos1(&g, 0.05);
    assert!(matches!(tj_apply(&y_x, &y_x, 11, Q, opts()), Err(crate::Error::OrderTooLarge { .. })));
    let wide = random_band_limited(&g, 20, 0.01, 2);
    assert!(matches!(tj_apply(&wide, &y_x, 1, S, opts()), Err(crate::Error::BandLimit { .. })));
    assert!(tj_apply(&wide, &y_x, 1, Q, opts()).is_ok());
    let other = grid(32, 1.0);
    assert!(tj_apply(&y_x, &cos1(&other, 1.0), 1, Q, opts()).is_err());
}

#[test]
fn backends_agree_on_single_mode() {
    let g = grid(256, 1.0);
    let y_x = cos1(&g, 0.05);
    let u = cos1(&g, 1.0);
    for j in 1..=3 {
        let q = tj_apply(&y_x, &u, j, Q, opts()).unwrap();
        let s = tj_apply(&y_x, &u, j, S, opts()).unwrap();
        assert!(dist(&q, &s) < 1e-8, "j={j} diff={}", dist(&q, &s));
    }
}

#[test]
fn backends_agree_up_to_order_six() {
    for (l, seed) in [(1.0, 7u64), (2.0, 8)] {
        let g = grid(256, l);
        let y_x = random_with_norm(&g, 8, 0.1, seed);
        let u = random_band_limited(&g, 8, 0.5, seed + 100).with_zero_mode(Complex::new(1.0, 0.0));
        for j in 0..=6 {
            let q = tj_apply(&y_x, &u, j, Q, opts()).unwrap();
            let s = tj_apply(&y_x, &u, j, S, opts()).unwrap();
            assert!(dist(&q, &s) <= 1e-7, "L={l} j={j} diff={}", dist(&q, &s));
        }
    }
}

#[test]
fn t1_of_one_is_lambda_y() {
    let g = grid(128, 1.5);
    let y_x = random_with_norm(&g, 6, 0.1, 3);
    let one = SpectralField::constant(&g, 1.0);
    let lam_y = apply_multiplier(&y_x.antiderivative(), Multiplier::Lambda, None).unwrap();
    let h_yx = apply_multiplier(&y_x, Multiplier::Hilbert, None).unwrap();
    assert!(dist(&lam_y, &h_yx) < 1e-15);
    let q = tj_apply(&y_x, &one, 1, Q, opts()).unwrap();
    assert!(dist(&q, &lam_y) < 1e-8, "{}", dist(&q, &lam_y));
}

#[test]
fn tilde_backends_agree() {
    let g = grid(256, 1.0);
    let f_x = cos1(&g, 0.05);
    for j in 1..=3 {
        let q = tilde_tj_apply(&f_x, &f_x, j, Q, opts()).unwrap();
        let s = tilde_tj_apply(&f_x, &f_x, j, S, opts()).unwrap();
        assert!(dist(&q, &s) < 1e-8, "j={j} diff={}", dist(&q, &s));
    }
    let rf = random_with_norm(&g, 6, 0.1, 9);
    let ru = random_band_limited(&g, 6, 0.3, 10);
    let q = tilde_tj_apply(&rf, &ru, 2, Q, opts()).unwrap();
    let s = tilde_tj_apply(&rf, &ru, 2, S, opts()).unwrap();
    assert!(dist(&q, &s) < 1e-8, "{}", dist(&q, &s));
}

#[test]
fn tilde_trivial_cases() {
    let g = grid(64, 1.0);
    let zero = SpectralField::zeros(&g);
    let u = random_band_limited(&g, 4, 1.0, 4);
    let c = SpectralField::constant(&g, 3.0);
    let f_x = cos1(&g, 0.1);
    for b in [Q, S] {
        assert!(b0_norm(&tilde_tj_apply(&zero, &u, 2, b, opts()).unwrap()) < 1e-15);
        assert!(b0_norm(&tilde_tj_apply(&f_x, &c, 2, b, opts()).unwrap()) < 1e-14);
        assert!(tilde_tj_apply(&f_x, &u, 0, b, opts()).is_err());
    }
}

#[test]
fn rk_zero_factor_vanishes() {
    let g = grid(64, 1.0);
    let y = random_with_norm(&g, 4, 0.1, 5);
    let om = random_band_limited(&g, 4, 1.0, 6);
    let zero = SpectralField::zeros(&g);
    let out = rk_apply(&[y.clone(), zero, y], &om).unwrap();
    assert!(b0_norm(&out) < 1e-15);
    assert!(rk_apply::<f64>(&[], &om).is_err());
}

#[test]
fn r1_is_x_derivative_of_divided_difference() {
    // R_1 Ω = ∂_x S Ω with S Ω = (1/π) ∫ (y(x) - y(x')) K_1(x - x') Ω(x') dx' = y HΩ - H(yΩ)
    let g = grid(128, 1.0);
    let y_x = cos1(&g, 0.05);
    let om = random_band_limited(&g, 3, 0.5, 19).with_zero_mode(Complex::new(1.0, 0.0));
    let r = rk_apply(std::slice::from_ref(&y_x), &om).unwrap();
    let y = y_x.antiderivative();
    let h_om = apply_multiplier(&om, Multiplier::Hilbert, None).unwrap();
    let h_yom = apply_multiplier(&pointwise_product(&y, &om).unwrap(), Multiplier::Hilbert, None).unwrap();
    let s = &pointwise_product(&y, &h_om).unwrap() - &h_yom;
    let d = apply_multiplier(&s, Multiplier::Dx, None).unwrap();
    assert!(dist(&r, &d) < 1e-10, "{}", dist(&r, &d));

    // central difference in x of an off-grid midpoint rule for S (the integrand is bounded)
    let x0 = g.points()[5];
    let eps = 1e-3;
    let k1 = PeriodizedKernel::new(0, 1.0);
    let m = 4096;
    let h = g.period() / m as f64;
    let sq = |x: f64| -> f64 {
        let nodes: Vec<f64> = (0..m).map(|l| x + (l as f64 + 0.5) * h).collect();
        let ys = crate::spectral::synthesize(&y, &nodes);
        let oms = crate::spectral::synthesize(&om, &nodes);
        let yv = crate::spectral::synthesize(&y, &[x])[0];
        let acc: f64 = nodes.iter().zip(ys.iter().zip(&oms)).map(|(&xp, (&yp, &o))| (yv - yp) * k1.eval(x - xp) * o).sum();
        acc * h / std::f64::consts::PI
    };
    let fd = (sq(x0 + eps) - sq(x0 - eps)) / (2.0 * eps);
    let rv = r.values()[5];
    assert!((fd - rv).abs() < 1e-6, "fd={fd} r={rv}");
}

#[test]
fn rk_diagonal_identity() {
    // R_k(y, …, y) Ω = y_x T_{k-1}(y_x) Ω - T_k(y_x) Ω
    let g = grid(128, 1.0);
    let y_x = random_with_norm(&g, 5, 0.1, 12);
    let om = random_band_limited(&g, 5, 0.5, 13).with_zero_mode(Complex::new(1.0, 0.0));
    for k in 1..=3 {
        let r = rk_apply(&vec![y_x.clone(); k], &om).unwrap();
        let lo = tj_apply(&y_x, &om, k - 1, Q, opts()).unwrap();
        let hi = tj_apply(&y_x, &om, k, Q, opts()).unwrap();
        let expect = &pointwise_product(&y_x, &lo).unwrap() - &hi;
        assert!(dist(&r, &expect) < 1e-9, "k={k} diff={}", dist(&r, &expect));
    }
}

#[test]
fn biot_savart_flat_sheet() {
    let g = grid(64, 1.0);
    let zero = SpectralField::zeros(&g);
    let (v1, v2) = biot_savart(&zero, &zero).unwrap();
    assert!(b0_norm(&v1) < 1e-15 && b0_norm(&v2) < 1e-15);
    let om = random_band_limited(&g, 6, 0.5, 14);
    let (v1, v2) = biot_savart(&zero, &om).unwrap();
    let h = apply_multiplier(&om, Multiplier::Hilbert, None).unwrap();
    assert!(b0_norm(&v1) < 1e-10);
    assert!(dist(&v2, &h) < 1e-10);
}

#[test]
fn biot_savart_leading_terms() {
    // v_1 = -T_1(1+ω) + O(y³), v_2 = Hω - T_2(1+ω) + O(y⁴)
    let g = grid(128, 1.0);
    let one = SpectralField::constant(&g, 1.0);
    let mut prev: Option<(f64, f64)> = None;
    for eps in [0.02, 0.01] {
        let y_x = random_with_norm(&g, 4, eps, 15);
        let om = random_with_norm(&g, 4, eps, 16);
        let big = &one + &om;
        let (v1, v2) = biot_savart(&y_x, &om).unwrap();
        let t1 = tj_apply(&y_x, &big, 1, Q, opts()).unwrap();
        let t2 = tj_apply(&y_x, &big, 2, Q, opts()).unwrap();
        let h = apply_multiplier(&om, Multiplier::Hilbert, None).unwrap();
        let r1 = b0_norm(&(&v1 + &t1));
        let r2 = b0_norm(&(&(&v2 - &h) + &t2));
        if let Some((p1, p2)) = prev {
            assert!(p1 / r1 > 7.0, "v1 ratio {}", p1 / r1);
            assert!(p2 / r2 > 12.0, "v2 ratio {}", p2 / r2);
        }
        prev = Some((r1, r2));
    }
}

#[test]
fn bound_examples() {
    let g = grid(64, 1.0);
    let zero = SpectralField::zeros(&g);
    let u = random_band_limited(&g, 4, 1.0, 17);
    let c = tj_norm_bound_check(&zero, &u, 1, 0.0, Q).unwrap();
    assert!(c.lhs < 1e-15 && c.rhs == 0.0 && c.holds());
    // H is an isometry of every weighted space
    let c = tj_norm_bound_check(&zero, &u, 0, 0.1, Q).unwrap();
    assert!((c.lhs - c.rhs).abs() < 1e-12 * c.rhs);
    let y = random_with_norm(&g, 4, 0.1, 18);
    let d = tj_difference_bound_check(&y, &y, &u, &u, 2, 0.0, Q).unwrap();
    assert_eq!(d.lhs, 0.0);
    assert!(d.holds());
    let big = SpectralField::constant(&g, 2.0);
    assert!(tj_difference_bound_check(&y, &y, &big, &u, 1, 0.0, Q).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tj_norm_bound_holds(seed in 0u64..10_000, j in 0usize..=4, rho_ix in 0usize..2, norm in 0.01f64..0.3) {
        let g = grid(64, 1.0);
        let rho = [0.0, 0.1][rho_ix];
        let y_x = random_with_norm(&g, 5, norm, seed);
        let u = random_band_limited(&g, 5, 1.0, seed + 1).with_zero_mode(Complex::new(1.0, 0.0));
        let c = tj_norm_bound_check(&y_x, &u, j, rho, Q).unwrap();
        prop_assert!(c.holds(), "lhs={} rhs={}", c.lhs, c.rhs);
    }

    #[test]
    fn tj_difference_bound_holds(seed in 0u64..10_000, j in 1usize..=3, norm in 0.01f64..0.2, delta in 0.0f64..0.05) {
        let g = grid(64, 1.0);
        let one = Complex::new(1.0, 0.0);
        let y1 = random_with_norm(&g, 5, norm, seed);
        let y2 = &y1 + &random_with_norm(&g, 5, delta, seed + 1);
        let u1 = random_with_norm(&g, 5, norm, seed + 2).with_zero_mode(one);
        let u2 = (&u1 + &random_with_norm(&g, 5, delta, seed + 3)).with_zero_mode(one);
        let c = tj_difference_bound_check(&y1, &y2, &u1, &u2, j, 0.1, Q).unwrap();
        prop_assert!(c.holds(), "lhs={} rhs={}", c.lhs, c.rhs);
    }

    #[test]
    fn rk_bound_holds(seed in 0u64..10_000, k in 1usize..=3, norm in 0.01f64..0.3) {
        let g = grid(64, 1.0);
        let ys: Vec<_> = (0..k as u64).map(|i| random_with_norm(&g, 4, norm, seed + i)).collect();
        let om = random_band_limited(&g, 4, 1.0, seed + 50).with_zero_mode(Complex::new(1.0, 0.0));
        let c = rk_bound_check(&ys, &om, 0.1).unwrap();
        prop_assert!(c.holds(), "lhs={} rhs={}", c.lhs, c.rhs);
    }
}

#[test]
fn family_matches_single_orders() {
    let g = grid(128, 1.0);
    let y_x = random_with_norm(&g, 5, 0.2, 21);
    let u = random_band_limited(&g, 5, 0.5, 22).with_zero_mode(Complex::new(1.0, 0.0));
    let fam = tj_family(&y_x, &u, 12, Q).unwrap();
    for (j, f) in fam.iter().enumerate().take(11) {
        let single = tj_apply(&y_x, &u, j, Q, opts()).unwrap();
        assert!(dist(f, &single) < 1e-15 * (1.0 + b0_norm(&single)) * 10.0, "j={j}");
    }
    assert_eq!(fam.len(), 13);
}
