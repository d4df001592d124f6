use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::field::SpectralField;
use crate::spectral::grid::FrequencyGrid;

/// A spectral field at every node of a shared time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField<T: Real> {
    grid: FrequencyGrid<T>,
    times: Vec<T>,
    slices: Vec<SpectralField<T>>,
}

impl<T: Real> SpaceTimeField<T> {
    pub fn new(grid: &FrequencyGrid<T>, times: Vec<T>, slices: Vec<SpectralField<T>>) -> Result<Self> {
        if times.len() != slices.len() {
            return Err(Error::LengthMismatch { expected: times.len(), got: slices.len() });
        }
        if times.is_empty() {
            return Err(Error::InvalidParameter("space-time field needs at least one node".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("time nodes must be strictly increasing".into()));
        }
        if slices.iter().any(|s| s.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid: grid.clone(), times, slices })
    }

    pub fn zeros(grid: &FrequencyGrid<T>, times: &[T]) -> Self {
        Self {
            grid: grid.clone(),
            times: times.to_vec(),
            slices: vec![SpectralField::zeros(grid); times.len()],
        }
    }

    /// Builds a field from a per-node generator.
    pub fn from_fn(grid: &FrequencyGrid<T>, times: &[T], mut f: impl FnMut(usize, T) -> SpectralField<T>) -> Result<Self> {
        let slices = times.iter().enumerate().map(|(n, &t)| f(n, t)).collect();
        Self::new(grid, times.to_vec(), slices)
    }

    #[inline]
    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn times(&self) -> &[T] {
        &self.times
    }

    #[inline]
    pub fn slices(&self) -> &[SpectralField<T>] {
        &self.slices
    }

    pub fn slices_mut(&mut self) -> &mut [SpectralField<T>] {
        &mut self.slices
    }

    pub fn slice(&self, n: usize) -> &SpectralField<T> {
        &self.slices[n]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Coefficient history of slot `i` across the time nodes.
    pub fn mode_history(&self, i: usize) -> Vec<num_complex::Complex<T>> {
        self.slices.iter().map(|s| s.coeffs()[i]).collect()
    }

    pub fn map(&self, f: impl Fn(&SpectralField<T>) -> SpectralField<T>) -> Self {
        Self { grid: self.grid.clone(), times: self.times.clone(), slices: self.slices.iter().map(f).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            times: self.times.clone(),
            slices: self.slices.iter().zip(&other.slices).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.times != other.times {
            return Err(Error::InvalidParameter("time grids differ".into()));
        }
        Ok(())
    }
}

/// Per-frequency envelope `μ_k ≥ sup_t e^{α t |ξ_k|} |û(ξ_k, t)|`.
#[derive(Clone, Debug, PartialEq)]
pub struct DominatingMeasure<T: Real> {
    pub weights: Vec<T>,
}

impl<T: Real> DominatingMeasure<T> {
    pub fn zeros(n: usize) -> Self {
        Self { weights: vec![T::zero(); n] }
    }

    /// Total mass, the space-time norm.
    pub fn mass(&self) -> T {
        self.weights.iter().fold(T::zero(), |s, &w| s + w)
    }

    /// Pointwise maximum with another measure.
    pub fn join(&self, other: &Self) -> Self {
        Self { weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a.max(*b)).collect() }
    }

    /// Whether this measure dominates `e^{α t|ξ|}|û(t)|` at every node.
    pub fn dominates(&self, u: &SpaceTimeField<T>, alpha: T) -> bool {
        let g = u.grid();
        u.times().iter().zip(u.slices()).all(|(&t, s)| {
            (0..g.n_modes()).all(|i| (alpha * t * g.xi(i).abs()).exp() * s.coeffs()[i].norm() <= self.weights[i])
        })
    }
}

/// Envelope of one space-time field, realised by the per-frequency maximum over nodes.
pub fn dominating_measure<T: Real>(u: &SpaceTimeField<T>, alpha: T) -> DominatingMeasure<T> {
    let g = u.grid();
    let mut w = vec![T::zero(); g.n_modes()];
    for (&t, s) in u.times().iter().zip(u.slices()) {
        for (i, wi) in w.iter_mut().enumerate() {
            let v = (alpha * t * g.xi(i).abs()).exp() * s.coeffs()[i].norm();
            if v > *wi {
                *wi = v;
            }
        }
    }
    DominatingMeasure { weights: w }
}

/// Space-time norm: mass of the dominating measure.
pub fn balpha_norm<T: Real>(u: &SpaceTimeField<T>, alpha: T) -> T {
    dominating_measure(u, alpha).mass()
}

/// Per-frequency `e^{ρ|ξ|}|û|` of a single slice, as a measure.
pub fn weighted_modulus<T: Real>(u: &SpectralField<T>, rho: T) -> DominatingMeasure<T> {
    let g = u.grid();
    DominatingMeasure {
        weights: (0..g.n_modes()).map(|i| (rho * g.xi(i).abs()).exp() * u.coeffs()[i].norm()).collect(),
    }
}
