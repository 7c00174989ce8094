//! Train/test sweeps: sample parameters, run full-order training cases,
//! build POD bases, run every (case, preconditioner, dimension) reduced
//! model and tabulate the results.

mod config;
mod lhc;
mod pareto;
mod study;

pub use config::StudyConfig;
pub use lhc::lhc_sample;
pub use pareto::{pareto_front, ParetoPoint};
pub use study::{
    cell_dir, collect_reports, pareto_points, run_study, sample_cases, summarize, CellReport, CellResult, ParamCase,
    StudyOutcome, CELL_HEADER,
};
