use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::fixed_point::{InitialProfile, SolverConfig, SolverMode};
use crate::muskat::{MuskatBackend, MuskatConfig};
use crate::nonlinear::NonlinearBackend;
use crate::singular::OperatorBackend;
use crate::spectral::PhysParams;

type Obj = Map<String, Value>;

const TOP_KEYS: &[&str] = &["problem", "mode", "physics", "grid", "time", "initial", "numerics", "output", "oracle", "operators"];
const PHYSICS_KEYS: &[&str] = &["a", "g", "density_gap"];
const GRID_KEYS: &[&str] = &["n_modes", "period_scale"];
const TIME_KEYS: &[&str] = &["t_max", "steps", "horizon_T"];
const INITIAL_KEYS: &[&str] = &["profile", "amplitude", "k", "k1", "k2", "seed", "band", "coefficients"];
const NUMERICS_KEYS: &[&str] =
    &["alpha", "backend", "picard_tol", "series_tol", "tail_tol", "j_max", "max_iterations"];
const OUTPUT_KEYS: &[&str] = &["dir", "emit"];
const ORACLE_KEYS: &[&str] = &["horizon", "dt", "threshold"];
const OPERATOR_KEYS: &[&str] = &["cases", "seed", "rho", "norm"];

/// Artifacts a run can write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    SolutionCsv,
    DiagnosticsJson,
    NormsCsv,
    PlotdataCsv,
}

impl Emit {
    const ALL: [Emit; 4] = [Emit::SolutionCsv, Emit::DiagnosticsJson, Emit::NormsCsv, Emit::PlotdataCsv];

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }

    pub fn name(self) -> &'static str {
        match self {
            Emit::SolutionCsv => "solution_csv",
            Emit::DiagnosticsJson => "diagnostics_json",
            Emit::NormsCsv => "norms_csv",
            Emit::PlotdataCsv => "plotdata_csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    VortexSheet(SolverConfig<f64>),
    Muskat(MuskatConfig<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
    pub emit: BTreeSet<Emit>,
}

/// Settings for `compare-oracle`; absent values are derived from the run.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub threshold: Option<f64>,
}

/// Settings for `validate-operators`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSettings {
    pub cases: usize,
    pub seed: u64,
    pub rho: Vec<f64>,
    /// `B_0` norm of the random inputs.
    pub norm: f64,
    pub j_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    /// Seed of the initial profile, echoed into the summary.
    pub seed: Option<u64>,
    pub output: OutputSettings,
    pub oracle: OracleSettings,
    pub operators: OperatorSettings,
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self.problem {
            Problem::VortexSheet(_) => "vortex_sheet",
            Problem::Muskat(_) => "muskat",
        }
    }
}

struct Reader {
    issues: Vec<String>,
}

impl Reader {
    fn check_keys(&mut self, path: &str, obj: &Obj, known: &[&str]) {
        for k in obj.keys() {
            if !known.contains(&k.as_str()) {
                let at = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                self.issues.push(format!("unknown key `{at}` (expected one of: {})", known.join(", ")));
            }
        }
    }

    fn section<'a>(&mut self, root: &'a Obj, name: &str, known: &[&str], required: bool) -> Option<&'a Obj> {
        match root.get(name) {
            None if required => {
                self.issues.push(format!("missing section `{name}`"));
                None
            }
            None => None,
            Some(Value::Object(o)) => {
                self.check_keys(name, o, known);
                Some(o)
            }
            Some(_) => {
                self.issues.push(format!("`{name}` must be an object"));
                None
            }
        }
    }

    fn get<'a>(&mut self, obj: Option<&'a Obj>, path: &str, key: &str, required: bool) -> Option<&'a Value> {
        match obj.and_then(|o| o.get(key)) {
            Some(Value::Null) | None => {
                if required && obj.is_some() {
                    self.issues.push(format!("missing required key `{path}.{key}`"));
                }
                None
            }
            v => v,
        }
    }

    fn f64(&mut self, obj: Option<&Obj>, path: &str, key: &str, required: bool) -> Option<f64> {
        let v = self.get(obj, path, key, required)?;
        let out = v.as_f64();
        if out.is_none() {
            self.issues.push(format!("`{path}.{key}` must be a number, got {v}"));
        }
        out
    }

    fn u64(&mut self, obj: Option<&Obj>, path: &str, key: &str, required: bool) -> Option<u64> {
        let v = self.get(obj, path, key, required)?;
        let out = v.as_u64();
        if out.is_none() {
            self.issues.push(format!("`{path}.{key}` must be a non-negative integer, got {v}"));
        }
        out
    }

    fn i64(&mut self, obj: Option<&Obj>, path: &str, key: &str, required: bool) -> Option<i64> {
        let v = self.get(obj, path, key, required)?;
        let out = v.as_i64();
        if out.is_none() {
            self.issues.push(format!("`{path}.{key}` must be an integer, got {v}"));
        }
        out
    }

    fn str<'a>(&mut self, obj: Option<&'a Obj>, path: &str, key: &str, required: bool) -> Option<&'a str> {
        let v = self.get(obj, path, key, required)?;
        let out = v.as_str();
        if out.is_none() {
            self.issues.push(format!("`{path}.{key}` must be a string, got {v}"));
        }
        out
    }

    fn forbid(&mut self, obj: Option<&Obj>, path: &str, key: &str, why: &str) {
        if obj.is_some_and(|o| o.contains_key(key)) {
            self.issues.push(format!("`{path}.{key}` {why}"));
        }
    }
}

fn syntax(e: serde_json::Error) -> Error {
    Error::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
}

/// Parses and validates a run configuration, reporting every violation at once.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: Value = serde_json::from_str(text).map_err(syntax)?;
    let Value::Object(root) = value else {
        return Err(Error::Violations(vec!["configuration must be a JSON object".into()]));
    };
    let mut r = Reader { issues: Vec::new() };
    r.check_keys("", &root, TOP_KEYS);
    let problem = r.str(Some(&root), "", "problem", true);
    let is_muskat = match problem {
        Some("vortex_sheet") => false,
        Some("muskat") => true,
        Some(other) => {
            r.issues.push(format!("`problem` must be \"vortex_sheet\" or \"muskat\", got \"{other}\""));
            false
        }
        None => false,
    };
    let physics = r.section(&root, "physics", PHYSICS_KEYS, true);
    let grid = r.section(&root, "grid", GRID_KEYS, true);
    let time = r.section(&root, "time", TIME_KEYS, true);
    let initial = r.section(&root, "initial", INITIAL_KEYS, true);
    let numerics = r.section(&root, "numerics", NUMERICS_KEYS, false);
    let output = r.section(&root, "output", OUTPUT_KEYS, false);
    let oracle = r.section(&root, "oracle", ORACLE_KEYS, false);
    let operators = r.section(&root, "operators", OPERATOR_KEYS, false);

    let n_modes = r.u64(grid, "grid", "n_modes", true).map(|n| n as usize);
    if let Some(n) = n_modes {
        if n < 8 || n % 2 == 1 {
            r.issues.push(format!("`grid.n_modes` must be even and at least 8, got {n}"));
        }
    }
    let period_scale = r.f64(grid, "grid", "period_scale", false).unwrap_or(1.0);
    if !(period_scale > 0.0) {
        r.issues.push(format!("`grid.period_scale` must be positive, got {period_scale}"));
    }
    let t_max = r.f64(time, "time", "t_max", true);
    let steps = r.u64(time, "time", "steps", true).map(|s| s as usize);
    let horizon = r.f64(time, "time", "horizon_T", false);

    let (profile, amplitude, seed) = read_initial(&mut r, initial);

    let alpha = r.f64(numerics, "numerics", "alpha", false);
    let backend = r.str(numerics, "numerics", "backend", false);
    let picard_tol = r.f64(numerics, "numerics", "picard_tol", false);
    let series_tol = r.f64(numerics, "numerics", "series_tol", false);
    let tail_tol = r.f64(numerics, "numerics", "tail_tol", false);
    let j_max = r.u64(numerics, "numerics", "j_max", false).map(|j| j as usize);
    let max_iterations = r.u64(numerics, "numerics", "max_iterations", false).map(|m| m as usize);

    let out = read_output(&mut r, output);
    let oracle = OracleSettings {
        horizon: r.f64(oracle, "oracle", "horizon", false),
        dt: r.f64(oracle, "oracle", "dt", false),
        threshold: r.f64(oracle, "oracle", "threshold", false),
    };
    let operators = read_operators(&mut r, operators, j_max.unwrap_or(6));

    let problem = if is_muskat {
        r.forbid(physics, "physics", "a", "belongs to the vortex-sheet problem");
        r.forbid(physics, "physics", "g", "belongs to the vortex-sheet problem");
        r.forbid(time, "time", "horizon_T", "is only used by mode local_aneg");
        if let Some(m) = r.str(Some(&root), "", "mode", false) {
            if m != "muskat" {
                r.issues.push(format!("`mode` must be absent or \"muskat\" for the Muskat problem, got \"{m}\""));
            }
        }
        let gap = r.f64(physics, "physics", "density_gap", true);
        let backend = match backend {
            None | Some("closed_form") => Some(MuskatBackend::ClosedForm),
            Some("series") => Some(MuskatBackend::Series),
            Some(b) => {
                r.issues.push(format!("`numerics.backend` for muskat must be \"closed_form\" or \"series\", got \"{b}\""));
                None
            }
        };
        match (gap, n_modes, t_max, steps, profile.clone(), backend) {
            (Some(gap), Some(n), Some(t), Some(s), Some(p), Some(b)) => {
                let mut c = MuskatConfig::new(gap, n, period_scale, t, s);
                c.profile = p;
                c.amplitude = amplitude.unwrap_or(0.0);
                c.backend = b;
                if let Some(a) = alpha {
                    c.alpha = a;
                }
                if let Some(v) = picard_tol {
                    c.picard_tol = v;
                }
                if let Some(v) = series_tol {
                    c.series_tol = v;
                }
                if let Some(v) = max_iterations {
                    c.max_iterations = v;
                }
                r.issues.extend(c.violations());
                Some(Problem::Muskat(c))
            }
            _ => None,
        }
    } else {
        r.forbid(physics, "physics", "density_gap", "belongs to the Muskat problem");
        let a = r.f64(physics, "physics", "a", true);
        let g = r.f64(physics, "physics", "g", true);
        let mode = match r.str(Some(&root), "", "mode", false) {
            None => a.map(|a| {
                if a > 0.0 {
                    SolverMode::GlobalApos
                } else if a < 0.0 {
                    SolverMode::LocalAneg
                } else {
                    SolverMode::KhAzero
                }
            }),
            Some("global_apos") => Some(SolverMode::GlobalApos),
            Some("local_aneg") => Some(SolverMode::LocalAneg),
            Some("kh_azero") => Some(SolverMode::KhAzero),
            Some(m) => {
                r.issues.push(format!("`mode` must be one of global_apos, local_aneg, kh_azero, got \"{m}\""));
                None
            }
        };
        let backend = match backend {
            None | Some("closed_form") => Some(NonlinearBackend::ClosedForm),
            Some("series") => Some(NonlinearBackend::Series(OperatorBackend::Quadrature)),
            Some("series_spectral") => Some(NonlinearBackend::Series(OperatorBackend::Spectral)),
            Some(b) => {
                r.issues.push(format!(
                    "`numerics.backend` must be \"closed_form\", \"series\" or \"series_spectral\", got \"{b}\""
                ));
                None
            }
        };
        match (a, g, mode, n_modes, t_max, steps, profile, backend) {
            (Some(a), Some(g), Some(mode), Some(n), Some(t), Some(s), Some(p), Some(b)) => {
                let alpha = alpha.unwrap_or_else(|| default_alpha(a));
                let params = PhysParams { atwood: a, gravity: g, alpha };
                let mut c = SolverConfig::new(params, n, period_scale, t, s, mode);
                c.profile = p;
                c.amplitude = amplitude.unwrap_or(0.0);
                c.backend = b;
                c.horizon = horizon;
                if let Some(v) = picard_tol {
                    c.picard_tol = v;
                }
                if let Some(v) = series_tol {
                    c.series_tol = v;
                }
                if let Some(v) = tail_tol {
                    c.tail_tol = v;
                }
                if let Some(v) = max_iterations {
                    c.max_iterations = v;
                }
                r.issues.extend(c.violations());
                Some(Problem::VortexSheet(c))
            }
            _ => None,
        }
    };
    match problem {
        Some(problem) if r.issues.is_empty() => {
            Ok(RunConfig { problem, seed, output: out, oracle, operators })
        }
        _ => Err(Error::Violations(r.issues)),
    }
}

/// `0.4·√(1-a²)/2` for `a ≥ 0`; the `a < 0` path has no such constraint.
fn default_alpha(a: f64) -> f64 {
    if a >= 0.0 && a.abs() < 1.0 {
        0.2 * (1.0 - a * a).sqrt()
    } else {
        0.1
    }
}

fn read_initial(r: &mut Reader, initial: Option<&Obj>) -> (Option<InitialProfile>, Option<f64>, Option<u64>) {
    let p = "initial";
    let name = r.str(initial, p, "profile", true);
    let seed = r.u64(initial, p, "seed", false);
    let needs_amplitude = name != Some("coefficients");
    let amplitude = r.f64(initial, p, "amplitude", needs_amplitude);
    let profile = match name {
        None => None,
        Some("single_mode") => r.i64(initial, p, "k", true).map(|k| InitialProfile::SingleMode { k }),
        Some("two_mode") => {
            let k1 = r.i64(initial, p, "k1", true);
            let k2 = r.i64(initial, p, "k2", true);
            k1.zip(k2).map(|(k1, k2)| InitialProfile::TwoMode { k1, k2 })
        }
        Some("band_limited_random") => {
            let s = r.u64(initial, p, "seed", true);
            let band = r.i64(initial, p, "band", true);
            s.zip(band).map(|(seed, band)| InitialProfile::BandLimitedRandom { seed, band })
        }
        Some("coefficients") => {
            let v = r.get(initial, p, "coefficients", true).cloned();
            v.and_then(|v| match serde_json::from_value::<Vec<(i64, f64, f64)>>(v) {
                Ok(coefficients) => Some(InitialProfile::Coefficients { coefficients }),
                Err(e) => {
                    r.issues.push(format!("`initial.coefficients` must be a list of [k, re, im]: {e}"));
                    None
                }
            })
        }
        Some(other) => {
            r.issues.push(format!(
                "`initial.profile` must be one of single_mode, two_mode, band_limited_random, coefficients, got \"{other}\""
            ));
            None
        }
    };
    (profile, amplitude, seed)
}

fn read_output(r: &mut Reader, output: Option<&Obj>) -> OutputSettings {
    let dir = r.str(output, "output", "dir", false).map(PathBuf::from);
    let emit = match r.get(output, "output", "emit", false) {
        None => Emit::ALL.into_iter().collect(),
        Some(Value::Array(items)) => {
            let mut set = BTreeSet::new();
            for it in items {
                match it.as_str().and_then(Emit::parse) {
                    Some(e) => {
                        set.insert(e);
                    }
                    None => r.issues.push(format!(
                        "`output.emit` entries must be solution_csv, diagnostics_json, norms_csv or plotdata_csv, got {it}"
                    )),
                }
            }
            set
        }
        Some(v) => {
            r.issues.push(format!("`output.emit` must be a list, got {v}"));
            BTreeSet::new()
        }
    };
    OutputSettings { dir, emit }
}

fn read_operators(r: &mut Reader, ops: Option<&Obj>, j_max: usize) -> OperatorSettings {
    let p = "operators";
    let rho = match r.get(ops, p, "rho", false) {
        None => vec![0.0, 0.05, 0.1],
        Some(v) => match serde_json::from_value::<Vec<f64>>(v.clone()) {
            Ok(list) => list,
            Err(_) => {
                r.issues.push(format!("`operators.rho` must be a list of numbers, got {v}"));
                Vec::new()
            }
        },
    };
    let s = OperatorSettings {
        cases: r.u64(ops, p, "cases", false).unwrap_or(100) as usize,
        seed: r.u64(ops, p, "seed", false).unwrap_or(1),
        rho,
        norm: r.f64(ops, p, "norm", false).unwrap_or(0.1),
        j_max,
    };
    if !(s.norm > 0.0 && s.norm < 1.0) {
        r.issues.push(format!("`operators.norm` must lie in (0, 1), got {}", s.norm));
    }
    if s.rho.iter().any(|&x| !(x >= 0.0)) {
        r.issues.push("`operators.rho` entries must be non-negative".into());
    }
    s
}
