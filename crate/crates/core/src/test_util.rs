use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::{FrequencyGrid, SpectralField};

/// Real field with modes `1..=band`, amplitudes uniform in `[0, scale)` and random phases.
pub(crate) fn random_band_limited(g: &FrequencyGrid<f64>, band: i64, scale: f64, seed: u64) -> SpectralField<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(i64, f64, f64)> = (1..=band)
        .map(|k| (k, scale * rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    SpectralField::from_cosines(g, &modes).unwrap()
}

/// Same as [`random_band_limited`], rescaled to the given `B_0` norm.
pub(crate) fn random_with_norm(g: &FrequencyGrid<f64>, band: i64, norm: f64, seed: u64) -> SpectralField<f64> {
    let f = random_band_limited(g, band, 1.0, seed);
    let s = norm / crate::spectral::b0_norm(&f);
    f.scale(s)
}
