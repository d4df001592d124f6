use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{from_i64, from_usize, Real};

/// Discrete frequency lattice of the torus of length `2πL`.
///
/// Coefficients are stored in FFT order: slot `i` holds wavenumber `i` for
/// `i < N/2` and `i - N` otherwise, so the unmatched mode `-N/2` sits at slot `N/2`.
#[derive(Clone)]
pub struct FrequencyGrid<T: Real> {
    n: usize,
    period_scale: T,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    fwd_padded: Arc<dyn Fft<T>>,
    inv_padded: Arc<dyn Fft<T>>,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(n_modes: usize, period_scale: T) -> Result<Self> {
        if n_modes < 8 || n_modes % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_modes must be even and >= 8, got {n_modes}"
            )));
        }
        if !(period_scale > T::zero()) || !period_scale.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "period_scale must be positive, got {period_scale}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n: n_modes,
            period_scale,
            fwd: planner.plan_fft_forward(n_modes),
            inv: planner.plan_fft_inverse(n_modes),
            fwd_padded: planner.plan_fft_forward(2 * n_modes),
            inv_padded: planner.plan_fft_inverse(2 * n_modes),
        })
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn period_scale(&self) -> T {
        self.period_scale
    }

    /// Domain length `2πL`.
    pub fn period(&self) -> T {
        T::TAU() * self.period_scale
    }

    /// Integer wavenumber stored at slot `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Slot holding wavenumber `k`, if it is on the grid.
    pub fn slot(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.n as i64) as usize)
        }
    }

    /// Frequency `ξ = k/L` at slot `i`.
    #[inline]
    pub fn xi(&self, i: usize) -> T {
        from_i64::<T>(self.wavenumber(i)) / self.period_scale
    }

    /// The unmatched mode `-N/2` never carries data.
    #[inline]
    pub fn is_excluded(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Slot of `-k` for the mode at slot `i` (meaningless for the excluded slot).
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    /// Frequencies in ascending order of wavenumber, `k = -N/2 .. N/2-1`.
    pub fn frequencies(&self) -> Vec<T> {
        let half = (self.n / 2) as i64;
        (-half..half).map(|k| from_i64::<T>(k) / self.period_scale).collect()
    }

    /// Collocation points `x_j = 2πL j / N`.
    pub fn points(&self) -> Vec<T> {
        let h = self.spacing();
        (0..self.n).map(|j| from_usize::<T>(j) * h).collect()
    }

    /// Node spacing `2πL/N`.
    pub fn spacing(&self) -> T {
        self.period() / from_usize(self.n)
    }

    /// Largest resolved `|ξ|`.
    pub fn xi_max(&self) -> T {
        from_usize::<T>(self.n / 2) / self.period_scale
    }

    pub(crate) fn fft_forward(&self) -> &Arc<dyn Fft<T>> {
        &self.fwd
    }

    pub(crate) fn fft_inverse(&self) -> &Arc<dyn Fft<T>> {
        &self.inv
    }

    pub(crate) fn fft_forward_padded(&self) -> &Arc<dyn Fft<T>> {
        &self.fwd_padded
    }

    pub(crate) fn fft_inverse_padded(&self) -> &Arc<dyn Fft<T>> {
        &self.inv_padded
    }
}

impl<T: Real> PartialEq for FrequencyGrid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.period_scale == other.period_scale
    }
}

impl<T: Real> fmt::Debug for FrequencyGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrequencyGrid")
            .field("n_modes", &self.n)
            .field("period_scale", &self.period_scale)
            .finish()
    }
}

/// Builds the torus frequency grid.
pub fn make_grid<T: Real>(n_modes: usize, period_scale: T) -> Result<FrequencyGrid<T>> {
    FrequencyGrid::new(n_modes, period_scale)
}
