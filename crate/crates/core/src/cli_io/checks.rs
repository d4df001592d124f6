use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixed_point::{oracle_rk4_vortex, picard_solve, SolverMode};
use crate::muskat::{muskat_picard_solve, oracle_rk4_muskat};
use crate::nonlinear::dr_difference_check;
use crate::singular::{
    rk_bound_check, tilde_tj_apply, tj_apply, tj_difference_bound_check, tj_norm_bound_check, BoundCheck,
    OperatorBackend, OperatorOptions,
};
use crate::spectral::{apply_multiplier, b0_norm, make_grid, FrequencyGrid, Multiplier, SpectralField};

use super::config::{Problem, RunConfig};

/// Relative slack allowed on the inequality checks.
pub const INEQUALITY_SLACK: f64 = 1e-6;
/// Largest accepted `B_0` gap between the two operator backends.
pub const EQUIVALENCE_TOL: f64 = 1e-7;

/// Seeded real field with modes `1..=band`, rescaled to the given `B_0` norm.
pub fn random_field(g: &FrequencyGrid<f64>, band: i64, norm: f64, rng: &mut ChaCha8Rng) -> SpectralField<f64> {
    let modes: Vec<(i64, f64, f64)> = (1..=band)
        .map(|k| (k, rng.gen_range(0.1..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let f = SpectralField::from_cosines(g, &modes).expect("modes on the grid");
    let s = norm / b0_norm(&f);
    f.scale(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub property: String,
    pub j: Option<usize>,
    pub rho: Option<f64>,
    pub cases: usize,
    pub violations: usize,
    /// Largest `lhs/rhs` for inequalities, largest `B_0` gap for equivalences.
    pub worst: f64,
    pub threshold: f64,
    pub passed: bool,
    pub error: Option<String>,
}

impl PropertyResult {
    fn failed(property: &str, j: Option<usize>, rho: Option<f64>, threshold: f64, e: Error) -> Self {
        Self { property: property.into(), j, rho, cases: 0, violations: 0, worst: f64::NAN, threshold, passed: false, error: Some(e.to_string()) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorReport {
    pub n_modes: usize,
    pub seed: u64,
    pub all_passed: bool,
    pub properties: Vec<PropertyResult>,
}

fn inequality(
    property: &str,
    j: Option<usize>,
    rho: f64,
    cases: usize,
    mut check: impl FnMut(usize) -> Result<BoundCheck<f64>>,
) -> PropertyResult {
    let threshold = 1.0 + INEQUALITY_SLACK;
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for c in 0..cases {
        match check(c) {
            Ok(b) => {
                let ratio = if b.rhs > 0.0 { b.lhs / b.rhs } else if b.lhs > 0.0 { f64::INFINITY } else { 0.0 };
                worst = worst.max(ratio);
                if ratio > threshold {
                    violations += 1;
                }
            }
            Err(e) => return PropertyResult::failed(property, j, Some(rho), threshold, e),
        }
    }
    PropertyResult { property: property.into(), j, rho: Some(rho), cases, violations, worst, threshold, passed: violations == 0, error: None }
}

/// Backend equivalence and the weighted-norm inequalities on seeded random data.
pub fn validate_operators(cfg: &RunConfig) -> Result<OperatorReport> {
    let (n, l, atwood) = match &cfg.problem {
        Problem::VortexSheet(c) => (c.n_modes, c.period_scale, Some(c.params.atwood)),
        Problem::Muskat(c) => (c.n_modes, c.period_scale, None),
    };
    let s = &cfg.operators;
    let g = make_grid(n, l)?;
    let band = ((n / (2 * (s.j_max + 1))) as i64).clamp(1, 4);
    let rng_for = |tag: u64| ChaCha8Rng::seed_from_u64(s.seed.wrapping_mul(1_000_003).wrapping_add(tag));
    let mut props = Vec::new();

    for j in 0..=s.j_max {
        let mut rng = rng_for(j as u64);
        let mut worst: f64 = 0.0;
        let mut worst_tilde: f64 = 0.0;
        let mut err = None;
        let mut err_tilde = None;
        let opts = OperatorOptions { j_max: s.j_max.max(1) };
        for _ in 0..s.cases {
            let y = random_field(&g, band, s.norm, &mut rng);
            let u = random_field(&g, band, 1.0, &mut rng);
            if err.is_none() {
                match (tj_apply(&y, &u, j, OperatorBackend::Spectral, opts), tj_apply(&y, &u, j, OperatorBackend::Quadrature, opts)) {
                    (Ok(a), Ok(b)) => worst = worst.max(b0_norm(&(&a - &b))),
                    (Err(e), _) | (_, Err(e)) => err = Some(e),
                }
            }
            if j >= 1 && err_tilde.is_none() {
                match (
                    tilde_tj_apply(&y, &u, j, OperatorBackend::Spectral, opts),
                    tilde_tj_apply(&y, &u, j, OperatorBackend::Quadrature, opts),
                ) {
                    (Ok(a), Ok(b)) => worst_tilde = worst_tilde.max(b0_norm(&(&a - &b))),
                    (Err(e), _) | (_, Err(e)) => err_tilde = Some(e),
                }
            }
        }
        let eq = |name: &str, worst: f64, err: Option<Error>| match err {
            Some(e) => PropertyResult::failed(name, Some(j), None, EQUIVALENCE_TOL, e),
            None => PropertyResult {
                property: name.into(),
                j: Some(j),
                rho: None,
                cases: s.cases,
                violations: usize::from(worst > EQUIVALENCE_TOL),
                worst,
                threshold: EQUIVALENCE_TOL,
                passed: worst <= EQUIVALENCE_TOL,
                error: None,
            },
        };
        props.push(eq("backend_equivalence_tj", worst, err));
        if j >= 1 {
            props.push(eq("backend_equivalence_tilde_tj", worst_tilde, err_tilde));
        }
    }

    for (ri, &rho) in s.rho.iter().enumerate() {
        let tag = 1000 * (ri as u64 + 1);
        for j in 0..=s.j_max {
            let mut rng = rng_for(tag + j as u64);
            props.push(inequality("tj_norm_bound", Some(j), rho, s.cases, |_| {
                let y = random_field(&g, band, s.norm, &mut rng);
                let u = random_field(&g, band, 1.0, &mut rng);
                tj_norm_bound_check(&y, &u, j, rho, OperatorBackend::Quadrature)
            }));
            let mut rng = rng_for(tag + 100 + j as u64);
            props.push(inequality("tj_difference_bound", Some(j), rho, s.cases, |_| {
                let y1 = random_field(&g, band, s.norm, &mut rng);
                let y2 = random_field(&g, band, s.norm, &mut rng);
                let w1 = random_field(&g, band, s.norm, &mut rng).with_zero_mode(num_complex::Complex::new(rng.gen_range(-1.0..1.0), 0.0));
                let w2 = random_field(&g, band, s.norm, &mut rng).with_zero_mode(num_complex::Complex::new(rng.gen_range(-1.0..1.0), 0.0));
                tj_difference_bound_check(&y1, &y2, &w1, &w2, j, rho, OperatorBackend::Quadrature)
            }));
        }
        for k in 1..=3 {
            let mut rng = rng_for(tag + 200 + k as u64);
            props.push(inequality("rk_bound", Some(k), rho, s.cases, |_| {
                let ys: Vec<_> = (0..k).map(|_| random_field(&g, band, s.norm, &mut rng)).collect();
                let w = random_field(&g, band, 1.0, &mut rng);
                rk_bound_check(&ys, &w, rho)
            }));
        }
        if let Some(a) = atwood {
            let mut rng = rng_for(tag + 300);
            let mut worst: f64 = 0.0;
            let mut violations = 0;
            let mut error = None;
            for _ in 0..s.cases {
                let small = s.norm / 8.0;
                let f: Vec<_> = (0..4).map(|_| random_field(&g, band, small, &mut rng)).collect();
                match dr_difference_check((&f[0], &f[1]), (&f[2], &f[3]), a, rho) {
                    Ok(c) => {
                        let r = (c.lhs_f / c.rhs_f).max(c.lhs_g / c.rhs_g);
                        worst = worst.max(if r.is_nan() { 0.0 } else { r });
                        if !c.holds() {
                            violations += 1;
                        }
                    }
                    Err(e) => {
                        error = Some(e);
                        break;
                    }
                }
            }
            props.push(match error {
                Some(e) => PropertyResult::failed("nonlinear_difference_bound", None, Some(rho), 1.0 + INEQUALITY_SLACK, e),
                None => PropertyResult {
                    property: "nonlinear_difference_bound".into(),
                    j: None,
                    rho: Some(rho),
                    cases: s.cases,
                    violations,
                    worst,
                    threshold: 1.0 + INEQUALITY_SLACK,
                    passed: violations == 0,
                    error: None,
                },
            });
        }
    }
    let all_passed = props.iter().all(|p| p.passed);
    Ok(OperatorReport { n_modes: n, seed: s.seed, all_passed, properties: props })
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub problem: &'static str,
    pub horizon: f64,
    pub solver_dt: f64,
    pub oracle_dt: f64,
    pub compared_nodes: usize,
    /// Largest `B_0` gap in `y_x` (or `f_x`).
    pub discrepancy_y: f64,
    /// Largest `B_0` gap in `ω`; absent for Muskat.
    pub discrepancy_w: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
}

/// Picard solution against the explicit Runge–Kutta trajectory on `[0, horizon]`.
pub fn compare_oracle(cfg: &RunConfig) -> Result<OracleReport> {
    let o = &cfg.oracle;
    let (t_max, steps) = match &cfg.problem {
        Problem::VortexSheet(c) => (c.t_max, c.steps),
        Problem::Muskat(c) => (c.t_max, c.steps),
    };
    let dt = t_max / steps as f64;
    let oracle_dt = o.dt.unwrap_or(dt / 4.0);
    let sub = (dt / oracle_dt).round();
    if !(sub >= 1.0) || ((dt / oracle_dt) - sub).abs() > 1e-9 {
        return Err(Error::Config(format!("oracle dt {oracle_dt} must divide the solver step {dt}")));
    }
    let sub = sub as usize;
    let report = |problem, horizon: f64, nodes, dy, dw: Option<f64>, threshold: f64| OracleReport {
        problem,
        horizon,
        solver_dt: dt,
        oracle_dt,
        compared_nodes: nodes,
        discrepancy_y: dy,
        discrepancy_w: dw,
        threshold,
        passed: dy <= threshold && dw.is_none_or(|w| w <= threshold),
    };
    match &cfg.problem {
        Problem::VortexSheet(c) => {
            let local = c.mode == SolverMode::LocalAneg;
            let horizon = o.horizon.or(if local { c.horizon } else { None }).unwrap_or(t_max);
            let threshold = o.threshold.unwrap_or(if local { 1e-4 } else { 1e-6 });
            let b = picard_solve(c)?;
            let w = b.omega.as_ref().expect("vortex solutions carry omega");
            let horizon = horizon.min(b.valid_until);
            let (oy, ow) = oracle_rk4_vortex(b.y_x.slice(0), w.slice(0), &c.params, horizon, oracle_dt)?;
            let (mut dy, mut dw, mut nodes) = (0.0f64, 0.0f64, 0);
            for (n, &t) in b.times().iter().enumerate() {
                if t > horizon + 1e-12 || n * sub >= oy.len() {
                    break;
                }
                dy = dy.max(b0_norm(&(oy.slice(n * sub) - b.y_x.slice(n))));
                dw = dw.max(b0_norm(&(ow.slice(n * sub) - w.slice(n))));
                nodes += 1;
            }
            Ok(report("vortex_sheet", horizon, nodes, dy, Some(dw), threshold))
        }
        Problem::Muskat(c) => {
            let horizon = o.horizon.unwrap_or(t_max).min(t_max);
            let threshold = o.threshold.unwrap_or(1e-6);
            let b = muskat_picard_solve(c)?;
            let f = oracle_rk4_muskat(&b.y_x.slice(0).antiderivative(), c, horizon, oracle_dt)?;
            let (mut dy, mut nodes) = (0.0f64, 0);
            for (n, &t) in b.times().iter().enumerate() {
                if t > horizon + 1e-12 || n * sub >= f.len() {
                    break;
                }
                let fx = apply_multiplier(f.slice(n * sub), Multiplier::Dx, None)?;
                dy = dy.max(b0_norm(&(&fx - b.y_x.slice(n))));
                nodes += 1;
            }
            Ok(report("muskat", horizon, nodes, dy, None, threshold))
        }
    }
}
