use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinear::NonlinearBackend;
use crate::scalar::{lit, Real};
use crate::spectral::{b0_norm, FrequencyGrid, PhysParams, SpectralField};

/// Largest admissible `B_0` norm of the initial slope.
pub const AMPLITUDE_GUARD: f64 = 0.5;

/// Which representation drives the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    /// `a > 0`: global in time, `u_+` integrated back from infinity.
    GlobalApos,
    /// `a < 0`: up to a horizon `T`, low modes by the matrix exponential.
    LocalAneg,
    /// `a = 0`.
    KhAzero,
}

impl SolverMode {
    /// Checks the sign of `a` against the mode.
    pub fn check(&self, atwood: f64) -> Option<String> {
        match self {
            SolverMode::GlobalApos if !(atwood > 0.0) => Some(format!("mode global_apos needs a > 0, got {atwood}")),
            SolverMode::LocalAneg if !(atwood < 0.0) => Some(format!("mode local_aneg needs a < 0, got {atwood}")),
            SolverMode::KhAzero if atwood != 0.0 => Some(format!("mode kh_azero needs a = 0, got {atwood}")),
            _ => None,
        }
    }
}

/// Initial slope `y_{0x}`, scaled so that its `B_0` norm equals the amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    /// `ε cos(kx/L)`.
    SingleMode { k: i64 },
    /// `(ε/2)(cos(k_1x/L) + cos(k_2x/L))`.
    TwoMode { k1: i64, k2: i64 },
    /// Modes `1..=band` with seeded uniform amplitudes and phases.
    BandLimitedRandom { seed: u64, band: i64 },
    /// Explicit `(k, re, im)` coefficients for `k ≠ 0`, completed by conjugate symmetry;
    /// used as given, the amplitude is ignored.
    Coefficients { coefficients: Vec<(i64, f64, f64)> },
}

impl InitialProfile {
    pub fn build<T: Real>(&self, grid: &FrequencyGrid<T>, amplitude: T) -> Result<SpectralField<T>> {
        let raw = match self {
            InitialProfile::SingleMode { k } => SpectralField::from_cosines(grid, &[(*k, T::one(), T::zero())])?,
            InitialProfile::TwoMode { k1, k2 } => {
                if k1 == k2 {
                    return Err(Error::InvalidParameter("two_mode needs distinct modes".into()));
                }
                SpectralField::from_cosines(grid, &[(*k1, lit(0.5), T::zero()), (*k2, lit(0.5), T::zero())])?
            }
            InitialProfile::BandLimitedRandom { seed, band } => {
                if *band < 1 {
                    return Err(Error::InvalidParameter(format!("band must be >= 1, got {band}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let modes: Vec<(i64, T, T)> = (1..=*band)
                    .map(|k| (k, lit(rng.gen_range(0.1..1.0)), lit(rng.gen_range(0.0..std::f64::consts::TAU))))
                    .collect();
                let f = SpectralField::from_cosines(grid, &modes)?;
                let norm = b0_norm(&f);
                return Ok(f.scale(amplitude / norm));
            }
            InitialProfile::Coefficients { coefficients } => {
                let mut f = SpectralField::zeros(grid);
                for &(k, re, im) in coefficients {
                    if k == 0 {
                        return Err(Error::InvalidParameter("initial slope must have mean zero; drop k = 0".into()));
                    }
                    let c = num_complex::Complex::new(lit::<T>(re), lit::<T>(im));
                    f.set_coeff(k, c)?;
                    f.set_coeff(-k, c.conj())?;
                }
                return Ok(f);
            }
        };
        Ok(raw.scale(amplitude))
    }
}

/// Everything a vortex-sheet solve needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T: Real> {
    pub params: PhysParams<T>,
    pub n_modes: usize,
    pub period_scale: T,
    pub t_max: T,
    pub steps: usize,
    pub profile: InitialProfile,
    pub amplitude: T,
    /// Free `ω_0` on the low modes of the `a < 0` path; zero if absent.
    pub omega0_low: Option<InitialProfile>,
    pub omega0_amplitude: T,
    pub backend: NonlinearBackend,
    pub picard_tol: T,
    pub series_tol: f64,
    pub tail_tol: T,
    pub max_iterations: usize,
    pub mode: SolverMode,
    pub horizon: Option<T>,
}

impl<T: Real> SolverConfig<T> {
    /// Defaults for everything except physics, grid and data.
    pub fn new(params: PhysParams<T>, n_modes: usize, period_scale: T, t_max: T, steps: usize, mode: SolverMode) -> Self {
        Self {
            params,
            n_modes,
            period_scale,
            t_max,
            steps,
            profile: InitialProfile::SingleMode { k: 1 },
            amplitude: lit(0.01),
            omega0_low: None,
            omega0_amplitude: T::zero(),
            backend: NonlinearBackend::ClosedForm,
            picard_tol: lit(1e-10),
            series_tol: 1e-12,
            tail_tol: lit(1e-10),
            max_iterations: 50,
            mode,
            horizon: None,
        }
    }

    /// Every violated constraint.
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.params.violations();
        let a = self.params.atwood.to_f64().unwrap_or(f64::NAN);
        out.extend(self.mode.check(a));
        if !(self.amplitude >= T::zero() && self.amplitude <= lit(AMPLITUDE_GUARD)) {
            out.push(format!("amplitude must lie in [0, {AMPLITUDE_GUARD}], got {}", self.amplitude));
        }
        if !(self.t_max > T::zero()) {
            out.push(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.steps < 4 {
            out.push(format!("steps must be at least 4, got {}", self.steps));
        }
        if self.max_iterations == 0 {
            out.push("max_iterations must be positive".into());
        }
        if !(self.picard_tol > T::zero()) {
            out.push("picard tolerance must be positive".into());
        }
        match (self.mode, self.horizon) {
            (SolverMode::LocalAneg, None) => out.push("mode local_aneg needs a horizon T".into()),
            (SolverMode::LocalAneg, Some(h)) if !(h > T::zero()) || self.t_max < h + h => out.push(format!(
                "time grid must cover [0, 2T]: T = {h}, t_max = {}",
                self.t_max
            )),
            _ => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }
}
