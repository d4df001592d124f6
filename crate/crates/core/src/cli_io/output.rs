use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_point::IterationRecord;
use crate::spectral::{analyticity_fit, b0_norm, FrequencyGrid, SpaceTimeField, SpectralField};

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Signed wavenumbers that carry data, ascending.
fn wavenumbers(g: &FrequencyGrid<f64>) -> std::ops::RangeInclusive<i64> {
    let half = (g.n_modes() / 2) as i64;
    -(half - 1)..=half - 1
}

/// `t,k,re,im`, one row per time node and wavenumber.
pub fn write_solution_csv(path: &Path, u: &SpaceTimeField<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "k", "re", "im"]).map_err(csv_err)?;
    for (t, s) in u.times().iter().zip(u.slices()) {
        let ts = fmt(*t);
        for k in wavenumbers(u.grid()) {
            let c = s.coeff(k);
            w.write_record([ts.as_str(), &k.to_string(), &fmt(c.re), &fmt(c.im)]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct SolutionRow {
    t: f64,
    k: i64,
    re: f64,
    im: f64,
}

/// Inverse of [`write_solution_csv`] on a given grid.
pub fn read_solution_csv(path: &Path, grid: &FrequencyGrid<f64>) -> Result<SpaceTimeField<f64>> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut times: Vec<f64> = Vec::new();
    let mut slices: Vec<SpectralField<f64>> = Vec::new();
    for row in rd.deserialize::<SolutionRow>() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        if times.last() != Some(&row.t) {
            times.push(row.t);
            slices.push(SpectralField::zeros(grid));
        }
        let s = slices.last_mut().expect("pushed above");
        s.set_coeff(row.k, Complex::new(row.re, row.im))?;
    }
    SpaceTimeField::new(grid, times, slices)
}

/// `t,b0_y,b0_w,sup_y,sup_w,rho_hat`; `rho_hat` is the fitted strip width of the
/// first unknown, `nan` where too few modes rise above the floor.
pub fn write_norms_csv(path: &Path, y: &SpaceTimeField<f64>, w: Option<&SpaceTimeField<f64>>) -> Result<()> {
    let mut out = csv::Writer::from_path(path).map_err(csv_err)?;
    out.write_record(["t", "b0_y", "b0_w", "sup_y", "sup_w", "rho_hat"]).map_err(csv_err)?;
    for (n, (t, s)) in y.times().iter().zip(y.slices()).enumerate() {
        let (b0_w, sup_w) = w.map_or((0.0, 0.0), |w| (b0_norm(w.slice(n)), w.slice(n).sup_norm()));
        let rho = analyticity_fit(s).unwrap_or(f64::NAN);
        out.write_record([fmt(*t), fmt(b0_norm(s)), fmt(b0_w), fmt(s.sup_norm()), fmt(sup_w), fmt(rho)])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Physical-space profiles `t,x,y,y_x,omega` at up to `samples` evenly spaced nodes.
pub fn write_plotdata_csv(
    path: &Path,
    y_x: &SpaceTimeField<f64>,
    omega: Option<&SpaceTimeField<f64>>,
    samples: usize,
) -> Result<()> {
    let mut out = csv::Writer::from_path(path).map_err(csv_err)?;
    out.write_record(["t", "x", "y", "y_x", "omega"]).map_err(csv_err)?;
    let len = y_x.len();
    let stride = len.div_ceil(samples.max(1)).max(1);
    let xs = y_x.grid().points();
    for n in (0..len).step_by(stride) {
        let s = y_x.slice(n);
        let yv = s.antiderivative().values();
        let yxv = s.values();
        let wv = omega.map(|w| w.slice(n).values());
        let t = fmt(y_x.times()[n]);
        for (j, x) in xs.iter().enumerate() {
            let wj = wv.as_ref().map_or(0.0, |w| w[j]);
            out.write_record([t.clone(), fmt(*x), fmt(yv[j]), fmt(yxv[j]), fmt(wj)]).map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One JSON line per Picard sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub iteration: usize,
    pub contraction_ratio: Option<f64>,
    pub difference: f64,
    pub balpha_norm: f64,
    /// Present on the final record of a converged run.
    pub residual: Option<f64>,
    pub tail_estimate: f64,
    pub wall_time: f64,
}

impl From<&IterationRecord> for DiagnosticsRecord {
    fn from(r: &IterationRecord) -> Self {
        Self {
            iteration: r.n,
            contraction_ratio: r.contraction_ratio,
            difference: r.difference,
            balpha_norm: r.balpha_norm,
            residual: None,
            tail_estimate: r.tail_estimate,
            wall_time: r.wall_time,
        }
    }
}

pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
