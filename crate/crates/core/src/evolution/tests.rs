use num_complex::Complex;
use proptest::prelude::*;

use super::*;
use crate::error::Error;
use crate::spectral::{balpha_norm, make_grid, symbol_m, FrequencyGrid, PhysParams, SpaceTimeField, SpectralField};
use crate::test_util::random_band_limited;

fn grid(n: usize, l: f64) -> FrequencyGrid<f64> {
    make_grid(n, l).unwrap()
}

fn params(a: f64, alpha: f64) -> PhysParams<f64> {
    PhysParams::new(a, -1.0, alpha).unwrap()
}

/// Forcing `c_k e^{μ_k s}` on every nonzero mode.
fn exponential_forcing(g: &FrequencyGrid<f64>, tg: &TimeGrid<f64>, rate: impl Fn(f64) -> Complex<f64>) -> SpaceTimeField<f64> {
    let base = random_band_limited(g, 6, 1.0, 3);
    SpaceTimeField::from_fn(g, tg.nodes(), |_, t| base.map_modes(|_, xi, c| c * (rate(xi) * t).exp())).unwrap()
}

#[test]
fn constant_forcing_unit_case() {
    // a = 0, ξ = 1: λ_- = -1, so I^-1 = 1 - e^{-t}
    let g = grid(16, 1.0);
    let p = params(0.0, 0.1);
    let tg = TimeGrid::uniform(3.0, 30).unwrap();
    let table = PropagatorTable::new(&g, &tg, &p).unwrap();
    let one = SpectralField::from_cosines(&g, &[(1, 2.0, 0.0)]).unwrap();
    let f = SpaceTimeField::from_fn(&g, tg.nodes(), |_, _| one.clone()).unwrap();
    let out = duhamel_minus(&table, &f, DuhamelMode::Plain).unwrap();
    for (&t, s) in tg.nodes().iter().zip(out.slices()) {
        assert!((s.coeff(1) - Complex::new(1.0 - (-t).exp(), 0.0)).norm() < 1e-14);
    }
    let zero = SpaceTimeField::zeros(&g, tg.nodes());
    let (z, tail) = duhamel_plus(&table, &zero, DuhamelMode::Dx).unwrap();
    assert_eq!(balpha_norm(&z, 0.1), 0.0);
    assert_eq!(tail, 0.0);
}

#[test]
fn exponential_forcing_matches_closed_form() {
    let g = grid(32, 1.0);
    let p = params(0.5, 0.2);
    let rate = |xi: f64| Complex::new(-0.7 * xi.abs(), 0.3 * xi);
    let mut errs = vec![];
    for steps in [100, 200] {
        let tg = TimeGrid::uniform(2.0, steps).unwrap();
        let table = PropagatorTable::new(&g, &tg, &p).unwrap();
        let f = exponential_forcing(&g, &tg, rate);
        let t_max = 2.0;
        let mut worst = 0.0f64;
        for mode in [DuhamelMode::Plain, DuhamelMode::Dx, DuhamelMode::Dt] {
            let im = duhamel_minus(&table, &f, mode).unwrap();
            let (ip, _) = duhamel_plus(&table, &f, mode).unwrap();
            for (n, &t) in tg.nodes().iter().enumerate() {
                for k in [1i64, -2, 5] {
                    let i = g.slot(k).unwrap();
                    let xi = g.xi(i);
                    let c0 = f.slice(0).coeffs()[i];
                    let mu = rate(xi);
                    let (lp, lm) = crate::spectral::eigenvalues(xi, &p);
                    let pre = match mode {
                        DuhamelMode::Plain => Complex::new(1.0, 0.0),
                        DuhamelMode::Dx => Complex::new(0.0, xi),
                        DuhamelMode::Dt => mu,
                    };
                    let em = c0 * pre * ((mu * t).exp() - (lm * t).exp()) / (mu - lm);
                    let ep = c0 * pre * ((mu * t).exp() - (lp * (t - t_max) + mu * t_max).exp()) / (lp - mu);
                    worst = worst.max((im.slice(n).coeffs()[i] - em).norm());
                    worst = worst.max((ip.slice(n).coeffs()[i] - ep).norm());
                }
            }
        }
        errs.push(worst);
    }
    assert!(errs[1] < 5e-9, "{errs:?}");
    assert!(errs[0] / errs[1] > 10.0, "{errs:?}");
}

#[test]
fn zero_mode_of_plain_plus_has_no_tail_bound() {
    let g = grid(16, 1.0);
    let p = params(0.5, 0.1);
    let tg = TimeGrid::uniform(1.0, 10).unwrap();
    let table = PropagatorTable::new(&g, &tg, &p).unwrap();
    let c = SpectralField::constant(&g, 1.0);
    let f = SpaceTimeField::from_fn(&g, tg.nodes(), |_, _| c.clone()).unwrap();
    let (_, tail) = duhamel_plus(&table, &f, DuhamelMode::Plain).unwrap();
    assert!(tail.is_infinite());
    let (_, tail) = duhamel_plus(&table, &f, DuhamelMode::Dx).unwrap();
    assert_eq!(tail, 0.0);
}

#[test]
fn table_group_law_and_decay() {
    let g = grid(64, 1.0);
    let p = params(0.5, 0.1);
    let tg = TimeGrid::uniform(1.0, 10).unwrap();
    let table = PropagatorTable::new(&g, &tg, &p).unwrap();
    for i in 1..g.n_modes() {
        let Some(s) = table.step_factor(i, Branch::Minus) else { continue };
        assert!(s.norm() <= 1.0);
        let (_, lm) = crate::spectral::eigenvalues(g.xi(i), &p);
        let two = (lm * 0.2).exp();
        assert!((two - s * s).norm() < 1e-13);
        let sp = table.step_factor(i, Branch::Plus).unwrap();
        assert!(sp.norm() >= 1.0);
    }
    let tg = TimeGrid::from_nodes(vec![0.0, 0.1, 0.3, 1.0]).unwrap();
    assert!(PropagatorTable::new(&g, &tg, &p).is_err());
}

#[test]
fn split_table_routes_low_modes() {
    let g = grid(32, 3.0);
    let p = PhysParams::new(-0.5, -1.0, 0.1).unwrap();
    let tg = TimeGrid::uniform(1.0, 10).unwrap();
    let table = PropagatorTable::with_split(&g, &tg, &p).unwrap();
    let xc = split_frequency(&p).unwrap();
    assert!((xc - 4.0 / 3.0).abs() < 1e-15);
    for i in 0..g.n_modes() {
        let xi = g.xi(i).abs();
        let low = xi > 0.0 && xi <= xc && !g.is_excluded(i);
        assert_eq!(table.is_low(i), low, "xi={xi}");
        assert_eq!(table.step_matrix(i).is_some(), low);
    }
    assert!(PropagatorTable::with_split(&g, &tg, &params(0.5, 0.1)).is_err());
}

/// Lemma constants: `1/(m-α)` for the `x`-derivative, and
/// `2 + (|a|+m)/(m-α)` for the time derivative, maximised over the grid.
fn lemma_constants(g: &FrequencyGrid<f64>, p: &PhysParams<f64>) -> (f64, f64) {
    let mut cx = 0.0f64;
    let mut ct = 0.0f64;
    for i in 1..g.n_modes() {
        if g.is_excluded(i) {
            continue;
        }
        let m = symbol_m(g.xi(i), p).unwrap().re;
        cx = cx.max(1.0 / (m - p.alpha));
        ct = ct.max(2.0 + (p.atwood.abs() + m) / (m - p.alpha));
    }
    (cx, ct)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn duhamel_norm_bounds(seed in 0u64..10_000, a_ix in 0usize..3, frac in 0.1f64..0.95) {
        let a: f64 = [0.25, 0.5, 0.75][a_ix];
        let alpha = frac * (1.0 - a * a).sqrt() / 2.0;
        let p = params(a, alpha);
        let g = grid(32, 1.0);
        let tg = TimeGrid::uniform(4.0, 160).unwrap();
        let table = PropagatorTable::new(&g, &tg, &p).unwrap();
        // random F in the weighted class: e^{-α' t|ξ|} decay with α' > α, smooth oscillation in t
        let base = random_band_limited(&g, 8, 1.0, seed);
        let f = SpaceTimeField::from_fn(&g, tg.nodes(), |_, t| {
            base.map_modes(|_, xi, c| c * Complex::new(0.0, 0.8 * t).exp() * (-(alpha + 0.05) * t * xi.abs()).exp())
        }).unwrap();
        let nf = balpha_norm(&f, alpha);
        let (cx, ct) = lemma_constants(&g, &p);
        let slack = 1.0 + 1e-6;
        let ix = duhamel_minus(&table, &f, DuhamelMode::Dx).unwrap();
        prop_assert!(balpha_norm(&ix, alpha) <= slack * cx * nf);
        let it = duhamel_minus(&table, &f, DuhamelMode::Dt).unwrap();
        prop_assert!(balpha_norm(&it, alpha) <= slack * ct * nf);
        let (px, _) = duhamel_plus(&table, &f, DuhamelMode::Dx).unwrap();
        prop_assert!(balpha_norm(&px, alpha) <= slack * cx * nf);
        let (pt, _) = duhamel_plus(&table, &f, DuhamelMode::Dt).unwrap();
        prop_assert!(balpha_norm(&pt, alpha) <= slack * ct * nf);
    }
}

// ---- assembly ----

struct Forcing {
    f: SpaceTimeField<f64>,
    g1: SpaceTimeField<f64>,
    g2: SpaceTimeField<f64>,
    /// `∂_t G_1`, exact.
    g1t: SpaceTimeField<f64>,
}

/// Smooth decaying forcing `c e^{(-β(|ξ|) + iγξ)t}`, real in physical space.
fn smooth_forcing(g: &FrequencyGrid<f64>, tg: &TimeGrid<f64>, scale: f64, seed: u64, g1_mean: f64) -> Forcing {
    let rate = |xi: f64| Complex::new(-(3.0 + 0.5 * xi.abs()), 0.7 * xi);
    let make = |s: u64, mean: f64, deriv: bool| {
        let base = random_band_limited(g, 5, scale, s).with_zero_mode(Complex::new(mean, 0.0));
        SpaceTimeField::from_fn(g, tg.nodes(), |_, t| {
            base.map_modes(|_, xi, c| {
                let r = if xi == 0.0 { Complex::new(-1.0, 0.0) } else { rate(xi) };
                let v = c * (r * t).exp();
                if deriv { v * r } else { v }
            })
        })
        .unwrap()
    };
    Forcing {
        f: make(seed, 0.0, false),
        g1: make(seed + 1, g1_mean, false),
        g2: make(seed + 2, 0.0, false),
        g1t: make(seed + 1, g1_mean, true),
    }
}

fn loose() -> AssemblyOptions<f64> {
    AssemblyOptions { tail_tolerance: f64::INFINITY }
}

/// Largest residual of `∂_t V = ÂV + (N_1, N_2 - aĤN_1)` by fourth-order
/// central differences at the nodes `n` with `2 ≤ n ≤ last`.
fn ode_residual(res: &AssemblyResult<f64>, fc: &Forcing, p: &PhysParams<f64>, dt: f64, last: usize) -> f64 {
    let g = res.y_x.grid();
    let mut worst = 0.0f64;
    for n in 2..=last {
        for i in 0..g.n_modes() {
            if g.is_excluded(i) {
                continue;
            }
            let xi = g.xi(i);
            let d = |h: &SpaceTimeField<f64>| {
                let c = |k: usize| h.slice(k).coeffs()[i];
                (c(n - 2) - c(n - 1) * 8.0 + c(n + 1) * 8.0 - c(n + 2)) / (12.0 * dt)
            };
            let (dy, dw) = (d(&res.y_x), d(&res.omega));
            let y = res.y_x.slice(n).coeffs()[i];
            let w = res.omega.slice(n).coeffs()[i];
            let ah = a_hat(xi, p);
            let ik = Complex::new(0.0, xi);
            let n1 = ik * fc.f.slice(n).coeffs()[i];
            let n2 = fc.g1t.slice(n).coeffs()[i] + ik * fc.g2.slice(n).coeffs()[i];
            let hil = Complex::new(0.0, -xi.signum());
            let ry = dy - (ah[0][0] * y + ah[0][1] * w + n1);
            let rw = dw - (ah[1][0] * y + ah[1][1] * w + n2 - hil * n1 * p.atwood);
            worst = worst.max(ry.norm()).max(rw.norm());
        }
    }
    worst
}

#[test]
fn unforced_assembly_is_the_linear_solution() {
    let g = grid(32, 1.0);
    let p = params(0.5, 0.1);
    let tg = TimeGrid::uniform(2.0, 40).unwrap();
    let table = PropagatorTable::new(&g, &tg, &p).unwrap();
    let y0 = random_band_limited(&g, 6, 0.1, 21);
    let zero = SpaceTimeField::zeros(&g, tg.nodes());
    let res = assemble_apos(&table, &y0, &zero, &zero, &zero, &AssemblyOptions::default()).unwrap();
    assert_eq!(res.tail_estimate, 0.0);
    for (n, &t) in tg.nodes().iter().enumerate() {
        for i in 1..g.n_modes() {
            if g.is_excluded(i) {
                continue;
            }
            let xi = g.xi(i);
            let (_, lm) = crate::spectral::eigenvalues(xi, &p);
            let m = symbol_m(xi, &p).unwrap();
            let ias = Complex::new(0.0, 0.5 * xi.signum());
            let y = y0.coeffs()[i] * (lm * t).exp();
            assert!((res.y_x.slice(n).coeffs()[i] - y).norm() < 1e-14);
            assert!((res.omega.slice(n).coeffs()[i] - (ias - m) * y).norm() < 1e-14);
        }
    }
    let trivial = assemble_apos(&table, &SpectralField::zeros(&g), &zero, &zero, &zero, &AssemblyOptions::default()).unwrap();
    assert_eq!(balpha_norm(&trivial.y_x, 0.1) + balpha_norm(&trivial.omega, 0.1), 0.0);
}

#[test]
fn forced_assembly_solves_the_linear_system_apos() {
    for a in [0.0, 0.5] {
        let g = grid(32, 1.0);
        let p = params(a, 0.1);
        let tg = TimeGrid::uniform(8.0, 1600).unwrap();
        let table = PropagatorTable::new(&g, &tg, &p).unwrap();
        let y0 = random_band_limited(&g, 5, 0.1, 31);
        let fc = smooth_forcing(&g, &tg, 0.05, 40, 0.01);
        let res = assemble_apos(&table, &y0, &fc.f, &fc.g1, &fc.g2, &loose()).unwrap();
        assert!((res.y_x.slice(0).coeffs()[1] - y0.coeffs()[1]).norm() < 1e-15);
        let r = ode_residual(&res, &fc, &p, tg.uniform_step().unwrap(), 800);
        assert!(r < 1e-7, "a={a} residual={r}");
        let bv = bv_consistency(&res, &p, &table);
        assert!(bv < 1e-10, "bv={bv}");
        assert_eq!(res.omega0_prescribed, *res.omega.slice(0));
    }
}

#[test]
fn tail_tolerance_is_enforced() {
    let g = grid(16, 1.0);
    let p = params(0.5, 0.1);
    let tg = TimeGrid::uniform(1.0, 20).unwrap();
    let table = PropagatorTable::new(&g, &tg, &p).unwrap();
    let fc = smooth_forcing(&g, &tg, 0.05, 50, 0.0);
    let y0 = SpectralField::zeros(&g);
    let err = assemble_apos(&table, &y0, &fc.f, &fc.g1, &fc.g2, &AssemblyOptions::default()).unwrap_err();
    assert!(matches!(err, Error::TailTolerance { .. }));
    let shifted = SpectralField::constant(&g, 0.2);
    assert!(matches!(
        assemble_apos(&table, &shifted, &fc.f, &fc.g1, &fc.g2, &loose()),
        Err(Error::NonzeroMean(_))
    ));
}

fn aneg_setup(t_max: f64, steps: usize) -> (FrequencyGrid<f64>, PhysParams<f64>, TimeGrid<f64>, PropagatorTable<f64>) {
    let g = grid(32, 3.0);
    let p = PhysParams::new(-0.5, -1.0, 0.1).unwrap();
    let tg = TimeGrid::uniform(t_max, steps).unwrap();
    let table = PropagatorTable::with_split(&g, &tg, &p).unwrap();
    (g, p, tg, table)
}

#[test]
fn forced_assembly_solves_the_linear_system_aneg() {
    let (g, p, tg, table) = aneg_setup(4.0, 800);
    let horizon = 2.0;
    let y0 = random_band_limited(&g, 10, 0.1, 61);
    let w0 = random_band_limited(&g, 10, 0.1, 62);
    let fc = smooth_forcing(&g, &tg, 0.05, 63, 0.01);
    let res = assemble_aneg(&table, &y0, &w0, &fc.f, &fc.g1, &fc.g2, horizon).unwrap();
    assert!(res.low_modes > 0 && res.high_modes > 0);
    assert_eq!(res.tail_estimate, 0.0);
    assert_eq!(res.valid_until, horizon);
    let r = ode_residual(&res, &fc, &p, tg.uniform_step().unwrap(), 398);
    assert!(r < 1e-7, "residual={r}");
    assert!(bv_consistency(&res, &p, &table) < 1e-10);
    for i in 0..g.n_modes() {
        if table.is_low(i) {
            assert!((res.omega.slice(0).coeffs()[i] - w0.coeffs()[i]).norm() < 1e-15);
        }
    }
}

#[test]
fn unforced_low_modes_follow_the_matrix_flow() {
    let (g, _, tg, table) = aneg_setup(2.0, 20);
    let y0 = random_band_limited(&g, 10, 0.1, 71);
    let w0 = random_band_limited(&g, 10, 0.1, 72);
    let zero = SpaceTimeField::zeros(&g, tg.nodes());
    let res = assemble_aneg(&table, &y0, &w0, &zero, &zero, &zero, 1.0).unwrap();
    let c = low_mode_growth_bound(&table);
    for (n, &t) in tg.nodes().iter().enumerate() {
        for i in 0..g.n_modes() {
            if !table.is_low(i) {
                continue;
            }
            let v0 = [y0.coeffs()[i], w0.coeffs()[i]];
            let v = [res.y_x.slice(n).coeffs()[i], res.omega.slice(n).coeffs()[i]];
            let expect = crate::evolution::linalg::mat2_apply(&matrix_exp_a(g.xi(i), t, table.params()), v0);
            assert!((v[0] - expect[0]).norm() + (v[1] - expect[1]).norm() < 1e-14);
            let size = |u: [Complex<f64>; 2]| u[0].norm().max(u[1].norm());
            assert!(size(v) <= (c * t).exp() * size(v0) * (1.0 + 1e-12));
        }
    }
    let z = SpectralField::zeros(&g);
    let res = assemble_aneg(&table, &z, &z, &zero, &zero, &zero, 1.0).unwrap();
    assert_eq!(balpha_norm(&res.y_x, 0.1) + balpha_norm(&res.omega, 0.1), 0.0);
}

#[test]
fn high_mode_data_follows_the_decaying_branch() {
    let (g, p, tg, table) = aneg_setup(2.0, 20);
    let k = 6;
    let i = g.slot(k).unwrap();
    assert!(!table.is_low(i));
    let y0 = SpectralField::from_cosines(&g, &[(k, 0.1, 0.3)]).unwrap();
    let z = SpectralField::zeros(&g);
    let zero = SpaceTimeField::zeros(&g, tg.nodes());
    let res = assemble_aneg(&table, &y0, &z, &zero, &zero, &zero, 1.0).unwrap();
    let xi = g.xi(i);
    let (_, lm) = crate::spectral::eigenvalues(xi, &p);
    let m = symbol_m(xi, &p).unwrap();
    let ias = Complex::new(0.0, -0.5 * xi.signum());
    for (n, &t) in tg.nodes().iter().enumerate() {
        if t > 1.0 {
            break;
        }
        let y = y0.coeffs()[i] * (lm * t).exp();
        assert!((res.y_x.slice(n).coeffs()[i] - y).norm() < 1e-15);
        assert!((res.omega.slice(n).coeffs()[i] - (ias - m) * y).norm() < 1e-15);
        assert!(res.u_plus.slice(n).coeffs()[i].norm() < 1e-15);
    }
}

#[test]
fn split_assembly_preconditions() {
    let (g, _, tg, table) = aneg_setup(2.0, 20);
    let z = SpectralField::zeros(&g);
    let zero = SpaceTimeField::zeros(&g, tg.nodes());
    assert!(matches!(assemble_aneg(&table, &z, &z, &zero, &zero, &zero, 1.5), Err(Error::Config(_))));
    // every nonzero mode below the split
    let coarse = grid(8, 3.0);
    let tg = TimeGrid::uniform(2.0, 20).unwrap();
    let p = PhysParams::new(-0.5, -1.0, 0.1).unwrap();
    let t2 = PropagatorTable::with_split(&coarse, &tg, &p).unwrap();
    let z = SpectralField::zeros(&coarse);
    let zero = SpaceTimeField::zeros(&coarse, tg.nodes());
    assert!(matches!(assemble_aneg(&t2, &z, &z, &zero, &zero, &zero, 1.0), Err(Error::Config(_))));
    let plain = PropagatorTable::new(&g, &TimeGrid::uniform(2.0, 20).unwrap(), &p).unwrap();
    let z = SpectralField::zeros(&g);
    let zero = SpaceTimeField::zeros(&g, plain.times());
    assert!(assemble_aneg(&plain, &z, &z, &zero, &zero, &zero, 1.0).is_err());
    assert!(matches!(assemble_apos(&plain, &z, &zero, &zero, &zero, &loose()), Err(Error::InvalidParameter(_))));
}
