//! Configuration files, run orchestration and on-disk artifacts.

mod checks;
mod config;
mod output;
mod run;


pub use checks::{
    compare_oracle, random_field, validate_operators, OperatorReport, OracleReport, PropertyResult, EQUIVALENCE_TOL,
    INEQUALITY_SLACK,
};
pub use config::{parse_config, Emit, OperatorSettings, OracleSettings, OutputSettings, Problem, RunConfig};
pub use output::{
    read_solution_csv, write_diagnostics, write_json, write_norms_csv, write_plotdata_csv, write_solution_csv,
    DiagnosticsRecord,
};
pub use run::{run, solve, Outcome, Summary};

/// Environment variable that overrides the worker-thread count.
pub const THREADS_ENV: &str = "VSHEET_THREADS";
