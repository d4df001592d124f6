use super::*;
use crate::fixed_point::InitialProfile;
use crate::error::Error;
use crate::fixed_point::balpha_envelope_check;
use crate::spectral::{apply_multiplier, b0_norm, make_grid, Multiplier, SpectralField};

fn cosine(n: usize, eps: f64) -> SpectralField<f64> {
    let g = make_grid(n, 1.0).unwrap();
    SpectralField::from_cosines(&g, &[(1, eps, 0.0)]).unwrap()
}

/// `-(Δρ/2π) Σ_images ∫ Δf_x/z · p²/(1+p²)` on the real line, summing periods directly.
fn image_sum(f_x: &SpectralField<f64>, gap: f64, periods: i64) -> Vec<f64> {
    let g = f_x.grid();
    let n = g.n_modes();
    let h = g.spacing();
    let per = 2.0 * std::f64::consts::PI * g.period_scale();
    let f = f_x.antiderivative().values();
    let fx = f_x.values();
    let fxx = apply_multiplier(f_x, Multiplier::Dx, None).unwrap().values();
    (0..n)
        .map(|i| {
            let p = fx[i];
            let mut acc = fxx[i] * p * p / (1.0 + p * p);
            for l in 0..n {
                for m in -periods..=periods {
                    if l == i && m == 0 {
                        continue;
                    }
                    let z = (i as f64 - l as f64) * h + m as f64 * per;
                    let q = (f[i] - f[l]) / z;
                    acc += (fx[i] - fx[l]) / z * q * q / (1.0 + q * q);
                }
            }
            -gap / (2.0 * std::f64::consts::PI) * h * acc
        })
        .collect()
}

#[test]
fn nonlinearity_vanishes_on_flat_interface() {
    let z = SpectralField::zeros(&make_grid(32, 1.0).unwrap());
    for b in [MuskatBackend::ClosedForm, MuskatBackend::Series] {
        assert_eq!(b0_norm(&muskat_nonlinearity(&z, 2.0, b, 1e-12).unwrap()), 0.0);
    }
}

#[test]
fn closed_form_matches_image_sum() {
    let g = make_grid(16, 1.0).unwrap();
    let f_x = SpectralField::from_cosines(&g, &[(1, 0.3, 0.0), (2, 0.1, 1.0)]).unwrap();
    let nl = muskat_nonlinearity(&f_x, 2.0, MuskatBackend::ClosedForm, 1e-12).unwrap().values();
    let reference = image_sum(&f_x, 2.0, 4000);
    let scale = nl.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    for (a, b) in nl.iter().zip(&reference) {
        assert!((a - b).abs() < 1e-6 * scale, "{a} vs {b}");
    }
}

#[test]
fn backends_agree() {
    let f_x = cosine(64, 0.05);
    let a = muskat_nonlinearity(&f_x, 2.0, MuskatBackend::ClosedForm, 1e-14).unwrap();
    let b = muskat_nonlinearity(&f_x, 2.0, MuskatBackend::Series, 1e-14).unwrap();
    assert!(b0_norm(&(&a - &b)) < 1e-12, "{}", b0_norm(&(&a - &b)));
    let g = make_grid(64, 1.0).unwrap();
    let r = SpectralField::from_cosines(&g, &[(1, 0.2, 0.3), (3, 0.1, 2.0), (4, 0.05, 0.0)]).unwrap();
    let a = muskat_nonlinearity(&r, 1.0, MuskatBackend::ClosedForm, 1e-14).unwrap();
    let b = muskat_nonlinearity(&r, 1.0, MuskatBackend::Series, 1e-14).unwrap();
    assert!(b0_norm(&(&a - &b)) < 1e-10, "{}", b0_norm(&(&a - &b)));
}

#[test]
fn nonlinearity_is_cubic() {
    let sizes = [1e-2, 1e-3, 1e-4];
    let norms: Vec<f64> = sizes
        .iter()
        .map(|&e| b0_norm(&muskat_nonlinearity(&cosine(32, e), 2.0, MuskatBackend::ClosedForm, 1e-12).unwrap()))
        .collect();
    for k in 0..2 {
        let slope = (norms[k] / norms[k + 1]).log10() / (sizes[k] / sizes[k + 1]).log10();
        assert!(slope >= 2.9, "slope {slope}");
    }
}

#[test]
fn series_guard() {
    let f_x = cosine(32, 1.2);
    assert!(matches!(
        muskat_nonlinearity(&f_x, 2.0, MuskatBackend::Series, 1e-12),
        Err(Error::SeriesDivergence { .. })
    ));
}

#[test]
fn config_checks() {
    let mut c = MuskatConfig::new(-1.0, 32, 1.0, 1.0, 10);
    c.amplitude = 0.8;
    assert_eq!(c.violations().len(), 3, "{:?}", c.violations());
    let c = MuskatConfig::new(2.0, 32, 1.0, 1.0, 10);
    assert!(c.validate().is_ok());
    assert_eq!(c.alpha, 0.25);
}

#[test]
fn linear_decay_and_zero_data() {
    let mut c = MuskatConfig::new(2.0f64, 32, 1.0, 2.0, 40);
    c.amplitude = 0.0;
    let b = muskat_picard_solve(&c).unwrap();
    assert_eq!(b.iterations, 1);
    assert!(b.y_x.slices().iter().all(|s| b0_norm(s) == 0.0));
    // tiny data: the nonlinear correction is far below the linear formula's scale
    c.amplitude = 1e-6;
    c.profile = InitialProfile::SingleMode { k: 3 };
    let p = MuskatProblem::new(c).unwrap();
    let lin = p.linear().unwrap();
    let once = p.sweep(&lin).unwrap();
    for (n, &t) in lin.times().iter().enumerate() {
        let expect: f64 = 0.5e-6 * (-3.0 * t).exp();
        assert!((lin.slice(n).coeff(3).re - expect).abs() < 1e-18);
        assert!(b0_norm(&(once.slice(n) - lin.slice(n))) < 1e-12);
    }
}

#[test]
fn small_data_converges_and_decays() {
    let mut c = MuskatConfig::new(2.0, 32, 1.0, 4.0, 200);
    c.amplitude = 0.01;
    let b = muskat_picard_solve(&c).unwrap();
    assert!(b.residual_norm < 1e-8, "{}", b.residual_norm);
    assert!(b.contraction_ratios.iter().all(|&r| r < 1.0));
    let norms: Vec<f64> = b.y_x.slices().iter().map(b0_norm).collect();
    assert!(norms.iter().all(|&v| v <= norms[0] + 1e-15));
    assert!(b.y_x.slices().iter().all(|s| s.coeff(0).norm() < 1e-16));
    assert!(balpha_envelope_check(&b, c.alpha, 2.0));
}

#[test]
fn rk4_matches_picard() {
    let mut c = MuskatConfig::new(2.0, 64, 1.0, 1.0, 100);
    c.profile = InitialProfile::TwoMode { k1: 1, k2: 2 };
    c.amplitude = 0.01;
    let b = muskat_picard_solve(&c).unwrap();
    let f0 = b.y_x.slice(0).antiderivative();
    let f = oracle_rk4_muskat(&f0, &c, 1.0, 0.01).unwrap();
    let mut worst: f64 = 0.0;
    for n in (0..=100).step_by(10) {
        let fx = apply_multiplier(f.slice(n), Multiplier::Dx, None).unwrap();
        worst = worst.max(b0_norm(&(&fx - b.y_x.slice(n))));
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn rk4_high_mode_follows_linear_rate() {
    let c = MuskatConfig::new(2.0f64, 32, 1.0, 1.0, 10);
    let g = make_grid(32, 1.0).unwrap();
    let f0 = SpectralField::from_cosines(&g, &[(5, 1e-4, 0.0)]).unwrap();
    let f = oracle_rk4_muskat(&f0, &c, 0.5, 0.01).unwrap();
    let rate: f64 = -(f.slice(50).coeff(5).norm() / f0.coeff(5).norm()).ln() / 0.5;
    assert!((rate - 5.0).abs() < 0.05, "{rate}");
    assert!(oracle_rk4_muskat(&f0, &c, 0.5, 0.5).is_err());
}
