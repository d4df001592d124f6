use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{
    assemble_aneg, assemble_apos, AssemblyOptions, AssemblyResult, PropagatorTable, TimeGrid,
};
use crate::fixed_point::config::{SolverConfig, SolverMode};
use crate::fixed_point::residual::residual_check;
use crate::nonlinear::{evaluate, SeriesOptions};
use crate::scalar::{cplx, lit, to_f64, Real};
use crate::spectral::params::m_unchecked;
use crate::spectral::{
    balpha_norm, dominating_measure, eigenvalues, make_grid, FrequencyGrid, PhysParams, SpaceTimeField,
    SpectralField,
};

/// One line of the iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    /// `d_n / d_{n-1}`, absent on the first sweep.
    pub contraction_ratio: Option<f64>,
    /// `𝓑_α` norm of the change made by this sweep.
    pub difference: f64,
    /// `𝓑_α` norm of the new iterate (both unknowns).
    pub balpha_norm: f64,
    pub tail_estimate: f64,
    pub wall_time: f64,
}

/// Converged trajectory and its diagnostics.
#[derive(Debug, Clone)]
pub struct SolutionBundle<T: Real> {
    /// `y_x` for the vortex sheet, `f_x` for Muskat.
    pub y_x: SpaceTimeField<T>,
    pub omega: Option<SpaceTimeField<T>>,
    pub omega0: Option<SpectralField<T>>,
    pub iterations: usize,
    pub contraction_ratios: Vec<f64>,
    pub residual_norm: f64,
    pub balpha_norms: Vec<f64>,
    /// `(sup|y_x|, sup|ω|)` at each node.
    pub decay_profile: Vec<(f64, f64)>,
    pub records: Vec<IterationRecord>,
    pub tail_estimate: f64,
    /// The trajectory solves the equations for `t ≤ valid_until`.
    pub valid_until: T,
    pub alpha: T,
    /// `𝓑_α` mass of the linear solution the iteration started from.
    pub linear_balpha: f64,
}

impl<T: Real> SolutionBundle<T> {
    pub fn times(&self) -> &[T] {
        self.y_x.times()
    }
}

/// `y_x = S_-(t)y_{0x}`, `ω = S_-(t)(-aH - 𝔐)y_{0x}` for `a ≥ 0`.
pub fn linear_solution<T: Real>(
    y0x: &SpectralField<T>,
    params: &PhysParams<T>,
    time: &TimeGrid<T>,
) -> Result<(SpaceTimeField<T>, SpaceTimeField<T>)> {
    if params.atwood < T::zero() {
        return Err(Error::InvalidParameter("the linear solution about the decaying branch needs a >= 0".into()));
    }
    let mean = y0x.coeff(0).norm();
    if mean > lit::<T>(1e-12) {
        return Err(Error::NonzeroMean(to_f64(mean)));
    }
    let g = y0x.grid();
    let y = SpaceTimeField::from_fn(g, time.nodes(), |_, t| {
        y0x.map_modes(|i, xi, c| if i == 0 { c } else { c * (eigenvalues(xi, params).1 * t).exp() })
    })?;
    let w = y.map(|s| {
        s.map_modes(|i, xi, c| {
            if i == 0 {
                return c;
            }
            let ias = cplx(T::zero(), params.atwood * xi.signum());
            c * (ias - m_unchecked(xi, params))
        })
    });
    Ok((y, w))
}

/// Nonlinear terms at every node where the cut-off forcing can be nonzero.
pub(crate) fn forcing_fields<T: Real>(
    y_x: &SpaceTimeField<T>,
    omega: &SpaceTimeField<T>,
    atwood: T,
    backend: crate::nonlinear::NonlinearBackend,
    opts: SeriesOptions,
    until: T,
) -> Result<(SpaceTimeField<T>, SpaceTimeField<T>, SpaceTimeField<T>)> {
    let g = y_x.grid();
    let evals = y_x
        .slices()
        .par_iter()
        .zip(omega.slices().par_iter())
        .zip(y_x.times().par_iter())
        .map(|((y, w), &t)| {
            if t > until {
                let z = SpectralField::zeros(g);
                Ok((z.clone(), z.clone(), z))
            } else {
                evaluate(y, w, atwood, backend, opts).map(|e| (e.f, e.g1, e.g2))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let times = y_x.times().to_vec();
    let mut f = Vec::with_capacity(evals.len());
    let mut g1 = Vec::with_capacity(evals.len());
    let mut g2 = Vec::with_capacity(evals.len());
    for (a, b, c) in evals {
        f.push(a);
        g1.push(b);
        g2.push(c);
    }
    Ok((
        SpaceTimeField::new(g, times.clone(), f)?,
        SpaceTimeField::new(g, times.clone(), g1)?,
        SpaceTimeField::new(g, times, g2)?,
    ))
}

/// Sweep counter for the divergence rule: three ratios `≥ 1` in a row.
pub(crate) struct ContractionMonitor {
    prev: Option<f64>,
    bad: usize,
    pub ratios: Vec<f64>,
}

impl ContractionMonitor {
    pub fn new() -> Self {
        Self { prev: None, bad: 0, ratios: Vec::new() }
    }

    /// Records a difference; returns the ratio, or the divergence error.
    pub fn push(&mut self, diff: f64) -> Result<Option<f64>> {
        if !diff.is_finite() {
            self.ratios.push(f64::INFINITY);
            return Err(Error::Divergence { ratios: self.ratios.clone() });
        }
        let ratio = self.prev.filter(|&p| p > 0.0).map(|p| diff / p);
        self.prev = Some(diff);
        if let Some(r) = ratio {
            self.ratios.push(r);
            if r >= 1.0 {
                self.bad += 1;
                if self.bad >= 3 {
                    return Err(Error::Divergence { ratios: self.ratios.clone() });
                }
            } else {
                self.bad = 0;
            }
        }
        Ok(ratio)
    }
}

/// Set-up shared by every sweep.
pub struct PicardProblem<T: Real> {
    pub config: SolverConfig<T>,
    pub grid: FrequencyGrid<T>,
    pub time: TimeGrid<T>,
    pub table: PropagatorTable<T>,
    pub y0x: SpectralField<T>,
    pub omega0_low: SpectralField<T>,
}

impl<T: Real> PicardProblem<T> {
    pub fn new(config: SolverConfig<T>) -> Result<Self> {
        config.validate()?;
        let grid = make_grid(config.n_modes, config.period_scale)?;
        let time = TimeGrid::uniform(config.t_max, config.steps)?;
        let table = match config.mode {
            SolverMode::LocalAneg => PropagatorTable::with_split(&grid, &time, &config.params)?,
            _ => PropagatorTable::new(&grid, &time, &config.params)?,
        };
        let y0x = config.profile.build(&grid, config.amplitude)?;
        let omega0_low = match &config.omega0_low {
            Some(p) => p.build(&grid, config.omega0_amplitude)?,
            None => SpectralField::zeros(&grid),
        };
        Ok(Self { config, grid, time, table, y0x, omega0_low })
    }

    fn horizon(&self) -> T {
        match self.config.mode {
            SolverMode::LocalAneg => self.config.horizon.unwrap_or(self.config.t_max),
            _ => self.config.t_max,
        }
    }

    /// Solution operator applied to given forcing.
    pub fn assemble(
        &self,
        f: &SpaceTimeField<T>,
        g1: &SpaceTimeField<T>,
        g2: &SpaceTimeField<T>,
    ) -> Result<AssemblyResult<T>> {
        match self.config.mode {
            SolverMode::LocalAneg => {
                assemble_aneg(&self.table, &self.y0x, &self.omega0_low, f, g1, g2, self.horizon())
            }
            _ => assemble_apos(
                &self.table,
                &self.y0x,
                f,
                g1,
                g2,
                &AssemblyOptions { tail_tolerance: self.config.tail_tol },
            ),
        }
    }

    /// Starting iterate: the solution with the nonlinear terms switched off.
    pub fn linear(&self) -> Result<AssemblyResult<T>> {
        let z = SpaceTimeField::zeros(&self.grid, self.time.nodes());
        self.assemble(&z, &z, &z)
    }

    /// One Picard sweep.
    pub fn sweep(&self, current: &AssemblyResult<T>) -> Result<AssemblyResult<T>> {
        let until = match self.config.mode {
            SolverMode::LocalAneg => self.horizon() + self.horizon(),
            _ => self.config.t_max,
        };
        let opts = SeriesOptions { tol: self.config.series_tol, ..SeriesOptions::default() };
        let (f, g1, g2) = forcing_fields(
            &current.y_x,
            &current.omega,
            self.config.params.atwood,
            self.config.backend,
            opts,
            until,
        )?;
        self.assemble(&f, &g1, &g2)
    }

    /// `𝓑_α` distance between two iterates, both unknowns.
    pub fn distance(&self, a: &AssemblyResult<T>, b: &AssemblyResult<T>) -> Result<f64> {
        let alpha = self.config.params.alpha;
        Ok(to_f64(balpha_norm(&a.y_x.sub(&b.y_x)?, alpha) + balpha_norm(&a.omega.sub(&b.omega)?, alpha)))
    }

    /// Iterates to the tolerance; see [`picard_solve`].
    pub fn solve(&self) -> Result<SolutionBundle<T>> {
        self.solve_with(|_| {})
    }

    /// As [`Self::solve`], reporting each sweep as it completes.
    pub fn solve_with(&self, mut on_record: impl FnMut(&IterationRecord)) -> Result<SolutionBundle<T>> {
        let start = Instant::now();
        let alpha = self.config.params.alpha;
        let mut cur = self.linear()?;
        let linear_balpha = to_f64(balpha_norm(&cur.y_x, alpha) + balpha_norm(&cur.omega, alpha));
        let mut monitor = ContractionMonitor::new();
        let mut records = Vec::new();
        let mut norms = Vec::new();
        let tol = to_f64(self.config.picard_tol);
        let mut converged = false;
        let mut last = f64::INFINITY;
        for n in 1..=self.config.max_iterations {
            let next = self.sweep(&cur)?;
            let diff = self.distance(&next, &cur)?;
            let ratio = monitor.push(diff)?;
            let norm = to_f64(balpha_norm(&next.y_x, alpha) + balpha_norm(&next.omega, alpha));
            let rec = IterationRecord {
                n,
                contraction_ratio: ratio,
                difference: diff,
                balpha_norm: norm,
                tail_estimate: to_f64(next.tail_estimate),
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
        let decay_profile = cur
            .y_x
            .slices()
            .iter()
            .zip(cur.omega.slices())
            .map(|(y, w)| (to_f64(y.sup_norm()), to_f64(w.sup_norm())))
            .collect();
        let mut bundle = SolutionBundle {
            omega0: Some(cur.omega.slice(0).clone()),
            y_x: cur.y_x,
            omega: Some(cur.omega),
            iterations: records.len(),
            contraction_ratios: monitor.ratios,
            residual_norm: f64::NAN,
            balpha_norms: norms,
            decay_profile,
            records,
            tail_estimate: to_f64(cur.tail_estimate),
            valid_until: cur.valid_until,
            alpha,
            linear_balpha,
        };
        bundle.residual_norm = residual_check(&bundle, &self.config)?;
        Ok(bundle)
    }
}

/// Full-trajectory Picard iteration from the linear solution; stops when a sweep
/// changes the iterate by less than the tolerance in `𝓑_α`.
pub fn picard_solve<T: Real>(config: &SolverConfig<T>) -> Result<SolutionBundle<T>> {
    PicardProblem::new(config.clone())?.solve()
}

/// The dominating measure of the solution dominates it at every node, and its
/// mass is at most `factor` times that of the linear solution.
pub fn balpha_envelope_check<T: Real>(bundle: &SolutionBundle<T>, alpha: T, factor: f64) -> bool {
    let mut mass = 0.0;
    let mut fields = vec![&bundle.y_x];
    if let Some(w) = &bundle.omega {
        fields.push(w);
    }
    for u in fields {
        let mu = dominating_measure(u, alpha);
        if !mu.dominates(u, alpha) {
            return false;
        }
        mass += to_f64(mu.mass());
    }
    mass.is_finite() && mass <= factor * bundle.linear_balpha
}
