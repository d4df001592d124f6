use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixed_point::{IterationRecord, PicardProblem, SolutionBundle};
use crate::muskat::MuskatProblem;

use super::config::{Emit, Problem, RunConfig};
use super::output::{
    write_diagnostics, write_json, write_norms_csv, write_plotdata_csv, write_solution_csv, DiagnosticsRecord,
};

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Exit code 0.
    Converged,
    /// Exit code 2: the iteration (or an oracle comparison) reported failure.
    Diverged,
    /// Exit code 1.
    Failed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Converged => 0,
            Outcome::Diverged => 2,
            Outcome::Failed => 1,
        }
    }

    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::Divergence { .. } | Error::NotConverged { .. } => Outcome::Diverged,
            _ => Outcome::Failed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub problem: &'static str,
    pub mode: String,
    pub converged: bool,
    pub outcome: Outcome,
    pub iterations: usize,
    pub contraction_ratios: Vec<f64>,
    pub final_contraction_ratio: Option<f64>,
    pub residual: Option<f64>,
    pub tail_estimate: Option<f64>,
    pub valid_until: Option<f64>,
    pub linear_balpha: Option<f64>,
    pub n_modes: usize,
    pub steps: usize,
    pub t_max: f64,
    pub seed: Option<u64>,
    pub solve_seconds: f64,
    pub write_seconds: f64,
    pub error: Option<String>,
}

/// Solves the configured problem, reporting every sweep.
pub fn solve(cfg: &RunConfig, on_record: impl FnMut(&IterationRecord)) -> Result<SolutionBundle<f64>> {
    match &cfg.problem {
        Problem::VortexSheet(c) => PicardProblem::new(c.clone())?.solve_with(on_record),
        Problem::Muskat(c) => MuskatProblem::new(c.clone())?.solve_with(on_record),
    }
}

fn mode_name(cfg: &RunConfig) -> String {
    match &cfg.problem {
        Problem::VortexSheet(c) => serde_json::to_value(c.mode)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
        Problem::Muskat(_) => "muskat".into(),
    }
}

fn grid_shape(cfg: &RunConfig) -> (usize, usize, f64) {
    match &cfg.problem {
        Problem::VortexSheet(c) => (c.n_modes, c.steps, c.t_max),
        Problem::Muskat(c) => (c.n_modes, c.steps, c.t_max),
    }
}

/// Runs the solver and writes the selected artifacts plus `summary.json` into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<Summary> {
    std::fs::create_dir_all(out)?;
    let mut diagnostics: Vec<DiagnosticsRecord> = Vec::new();
    let start = Instant::now();
    let result = solve(cfg, |r| diagnostics.push(r.into()));
    let solve_seconds = start.elapsed().as_secs_f64();
    let (n_modes, steps, t_max) = grid_shape(cfg);
    let mut summary = Summary {
        problem: cfg.name(),
        mode: mode_name(cfg),
        converged: false,
        outcome: Outcome::Failed,
        iterations: diagnostics.len(),
        contraction_ratios: diagnostics.iter().filter_map(|d| d.contraction_ratio).collect(),
        final_contraction_ratio: None,
        residual: None,
        tail_estimate: None,
        valid_until: None,
        linear_balpha: None,
        n_modes,
        steps,
        t_max,
        seed: cfg.seed,
        solve_seconds,
        write_seconds: 0.0,
        error: None,
    };
    let emit = &cfg.output.emit;
    let written = Instant::now();
    match result {
        Ok(bundle) => {
            if let Some(last) = diagnostics.last_mut() {
                last.residual = Some(bundle.residual_norm);
            }
            summary.converged = true;
            summary.outcome = Outcome::Converged;
            summary.iterations = bundle.iterations;
            summary.contraction_ratios = bundle.contraction_ratios.clone();
            summary.final_contraction_ratio = bundle.contraction_ratios.last().copied();
            summary.residual = Some(bundle.residual_norm);
            summary.tail_estimate = Some(bundle.tail_estimate);
            summary.valid_until = Some(bundle.valid_until);
            summary.linear_balpha = Some(bundle.linear_balpha);
            let first = match cfg.problem {
                Problem::VortexSheet(_) => "solution_y_x.csv",
                Problem::Muskat(_) => "solution_f_x.csv",
            };
            if emit.contains(&Emit::SolutionCsv) {
                write_solution_csv(&out.join(first), &bundle.y_x)?;
                if let Some(w) = &bundle.omega {
                    write_solution_csv(&out.join("solution_omega.csv"), w)?;
                }
            }
            if emit.contains(&Emit::NormsCsv) {
                write_norms_csv(&out.join("norms.csv"), &bundle.y_x, bundle.omega.as_ref())?;
            }
            if emit.contains(&Emit::PlotdataCsv) {
                write_plotdata_csv(&out.join("plotdata.csv"), &bundle.y_x, bundle.omega.as_ref(), 11)?;
            }
        }
        Err(e) => {
            summary.outcome = Outcome::of_error(&e);
            summary.error = Some(e.to_string());
        }
    }
    if emit.contains(&Emit::DiagnosticsJson) {
        write_diagnostics(&out.join("diagnostics.jsonl"), &diagnostics)?;
    }
    summary.write_seconds = written.elapsed().as_secs_f64();
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
