use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::propagator::ScalarIntegrator;
use crate::evolution::TimeGrid;
use crate::fixed_point::picard::ContractionMonitor;
use crate::fixed_point::residual::{ddt4, interior_nodes};
use crate::fixed_point::{IterationRecord, SolutionBundle};
use crate::scalar::{cplx, lit, to_f64, Real};
use crate::spectral::{b0_norm, balpha_norm, make_grid, FrequencyGrid, SpaceTimeField, SpectralField};

use super::{muskat_nonlinearity, MuskatBackend, MuskatConfig};

/// `f̂_x(ξ, t) = e^{-(Δρ/2)|ξ|t} f̂_{0x}(ξ)`.
pub fn muskat_linear_solution<T: Real>(f0x: &SpectralField<T>, rate: T, times: &[T]) -> Result<SpaceTimeField<T>> {
    SpaceTimeField::from_fn(f0x.grid(), times, |_, t| {
        f0x.map_modes(|_, xi, c| c * (-rate * xi.abs() * t).exp())
    })
}

pub struct MuskatProblem<T: Real> {
    pub config: MuskatConfig<T>,
    pub grid: FrequencyGrid<T>,
    pub time: TimeGrid<T>,
    pub f0x: SpectralField<T>,
    integrators: Vec<Option<ScalarIntegrator<T>>>,
}

impl<T: Real> MuskatProblem<T> {
    pub fn new(config: MuskatConfig<T>) -> Result<Self> {
        config.validate()?;
        let grid = make_grid(config.n_modes, config.period_scale)?;
        let time = TimeGrid::uniform(config.t_max, config.steps)?;
        let f0x = config.profile.build(&grid, config.amplitude)?;
        let mean = f0x.coeff(0).norm();
        if mean > lit(1e-12) {
            return Err(Error::NonzeroMean(to_f64(mean)));
        }
        let dt = time.uniform_step().expect("uniform grid");
        let rate = config.rate();
        let integrators = (0..grid.n_modes())
            .map(|i| {
                let xi = grid.xi(i);
                (xi != T::zero()).then(|| ScalarIntegrator::new(cplx(-rate * xi.abs(), T::zero()), dt, time.len()))
            })
            .collect();
        Ok(Self { config, grid, time, f0x, integrators })
    }

    pub fn linear(&self) -> Result<SpaceTimeField<T>> {
        muskat_linear_solution(&self.f0x, self.config.rate(), self.time.nodes())
    }

    fn nonlinear_history(&self, f_x: &SpaceTimeField<T>, backend: MuskatBackend) -> Result<Vec<SpectralField<T>>> {
        f_x.slices()
            .par_iter()
            .map(|s| muskat_nonlinearity(s, self.config.density_gap, backend, self.config.series_tol))
            .collect()
    }

    /// `S(t) f_{0x} + ∫_0^t S(t-s) ∂_x N(f)(s) ds`.
    pub fn sweep(&self, f_x: &SpaceTimeField<T>) -> Result<SpaceTimeField<T>> {
        let nl = self.nonlinear_history(f_x, self.config.backend)?;
        let n_modes = self.grid.n_modes();
        let columns: Vec<Vec<_>> = (0..n_modes)
            .into_par_iter()
            .map(|i| match &self.integrators[i] {
                None => vec![cplx(T::zero(), T::zero()); nl.len()],
                Some(int) => {
                    let ixi = cplx(T::zero(), self.grid.xi(i));
                    let h: Vec<_> = nl.iter().map(|s| s.coeffs()[i] * ixi).collect();
                    int.forward(&h)
                }
            })
            .collect();
        let lin = self.linear()?;
        let slices = lin
            .slices()
            .iter()
            .enumerate()
            .map(|(n, s)| s.map_modes(|i, _, c| c + columns[i][n]))
            .collect();
        SpaceTimeField::new(&self.grid, self.time.nodes().to_vec(), slices)
    }

    /// Largest `B_0` residual of `∂_t f_x + (Δρ/2)Λ f_x - ∂_x N(f)` over interior nodes,
    /// with `N` from the other backend (the closed form if the series diverges).
    pub fn residual(&self, f_x: &SpaceTimeField<T>) -> Result<f64> {
        muskat_residual(f_x, &self.config)
    }

    pub fn solve(&self) -> Result<SolutionBundle<T>> {
        self.solve_with(|_| {})
    }

    pub fn solve_with(&self, mut on_record: impl FnMut(&IterationRecord)) -> Result<SolutionBundle<T>> {
        let start = Instant::now();
        let alpha = self.config.alpha;
        let mut cur = self.linear()?;
        let linear_balpha = to_f64(balpha_norm(&cur, alpha));
        let mut monitor = ContractionMonitor::new();
        let mut records = Vec::new();
        let mut norms = Vec::new();
        let tol = to_f64(self.config.picard_tol);
        let mut last = f64::INFINITY;
        let mut converged = false;
        for n in 1..=self.config.max_iterations {
            let next = self.sweep(&cur)?;
            let diff = to_f64(balpha_norm(&next.sub(&cur)?, alpha));
            let ratio = monitor.push(diff)?;
            let norm = to_f64(balpha_norm(&next, alpha));
            let rec = IterationRecord {
                n,
                contraction_ratio: ratio,
                difference: diff,
                balpha_norm: norm,
                tail_estimate: 0.0,
                wall_time: start.elapsed().as_secs_f64(),
            };
            on_record(&rec);
            records.push(rec);
            norms.push(norm);
            cur = next;
            last = diff;
            if diff < tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NotConverged { iterations: self.config.max_iterations, last });
        }
        let residual_norm = self.residual(&cur)?;
        let decay_profile = cur.slices().iter().map(|s| (to_f64(s.sup_norm()), 0.0)).collect();
        Ok(SolutionBundle {
            valid_until: self.config.t_max,
            y_x: cur,
            omega: None,
            omega0: None,
            iterations: records.len(),
            contraction_ratios: monitor.ratios,
            residual_norm,
            balpha_norms: norms,
            decay_profile,
            records,
            tail_estimate: 0.0,
            alpha,
            linear_balpha,
        })
    }
}

/// Residual of the perturbative equation on a computed `f_x` trajectory.
pub fn muskat_residual<T: Real>(f_x: &SpaceTimeField<T>, config: &MuskatConfig<T>) -> Result<f64> {
    let times = f_x.times();
    let dt = times[1] - times[0];
    let rate = config.rate();
    let check = config.backend.other();
    interior_nodes(times, config.t_max)
        .into_par_iter()
        .map(|n| {
            let s = f_x.slice(n);
            let nl = match muskat_nonlinearity(s, config.density_gap, check, config.series_tol) {
                Err(Error::SeriesDivergence { .. }) => {
                    muskat_nonlinearity(s, config.density_gap, MuskatBackend::ClosedForm, config.series_tol)?
                }
                r => r?,
            };
            let d = ddt4(f_x, n, dt);
            let r = d.map_modes(|i, xi, c| {
                c + s.coeffs()[i] * (rate * xi.abs()) - nl.coeffs()[i] * cplx(T::zero(), xi)
            });
            Ok(to_f64(b0_norm(&r)))
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Picard iteration for the Muskat slope from its linear decay.
pub fn muskat_picard_solve<T: Real>(config: &MuskatConfig<T>) -> Result<SolutionBundle<T>> {
    MuskatProblem::new(config.clone())?.solve()
}
