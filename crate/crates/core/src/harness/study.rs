use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fom::{run_continuation, write_snapshots, FomProblem, ProblemSpec, Trajectory};
use crate::harness::config::StudyConfig;
use crate::harness::lhc::lhc_sample;
use crate::harness::pareto::{pareto_front, ParetoPoint};
use crate::lspg::{error_metric, run_lspg, IterationRecord, RomRunReport};
use crate::pod::{assemble_labelled_snapshots, basis_from_modes, pod_modes, SnapshotSet};
use crate::precond::PreconditionerKind;

pub const CELL_HEADER: &str = "case,kind,M,eps,avg_cond,total_nonlinear_iters,wall_seconds,converged";

/// One parameter point of the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamCase {
    pub name: String,
    pub values: BTreeMap<String, f64>,
}

impl ParamCase {
    pub fn apply(&self, spec: &ProblemSpec) -> Result<ProblemSpec> {
        let mut s = spec.clone();
        for (k, v) in &self.values {
            s.materials.set(k, *v)?;
        }
        Ok(s)
    }
}

/// Outcome of one (case, kind, M) ROM run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub case: String,
    pub kind: PreconditionerKind,
    pub m: usize,
    pub eps: Option<f64>,
    pub avg_cond: Option<f64>,
    pub total_nonlinear_iters: usize,
    pub wall_seconds: f64,
    pub converged: bool,
    pub failure: Option<String>,
}

impl CellResult {
    fn failed(case: &str, kind: PreconditionerKind, m: usize, why: String) -> Self {
        Self {
            case: case.to_string(),
            kind,
            m,
            eps: None,
            avg_cond: None,
            total_nonlinear_iters: 0,
            wall_seconds: 0.0,
            converged: false,
            failure: Some(why),
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.case,
            self.kind,
            self.m,
            opt(self.eps),
            opt(self.avg_cond),
            self.total_nonlinear_iters,
            self.wall_seconds,
            self.converged
        )
    }

    fn sort_key(&self) -> (String, PreconditionerKind, usize) {
        (self.case.clone(), self.kind, self.m)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Per-cell record written to `report.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: CellResult,
    pub parameters: BTreeMap<String, f64>,
    pub times: Vec<f64>,
    pub iterations: Vec<Vec<IterationRecord>>,
}

#[derive(Clone, Debug)]
pub struct StudyOutcome {
    pub cells: Vec<CellResult>,
    pub snapshot_count: usize,
    pub singular_values: Vec<f64>,
    /// Stage failures outside ROM cells (training or testing FOM runs).
    pub failures: Vec<String>,
}

/// Training and testing parameter points; testing uses `seed + 1`.
pub fn sample_cases(config: &StudyConfig) -> Result<(Vec<ParamCase>, Vec<ParamCase>)> {
    let names: Vec<&String> = config.ranges.keys().collect();
    let bounds: Vec<(f64, f64)> = config.ranges.values().map(|r| (r[0], r[1])).collect();
    let make = |prefix: &str, n: usize, seed: u64| -> Result<Vec<ParamCase>> {
        let pts = if bounds.is_empty() {
            vec![Vec::new(); n]
        } else {
            lhc_sample(&bounds, n, seed)?
        };
        Ok(pts
            .into_iter()
            .enumerate()
            .map(|(i, p)| ParamCase {
                name: format!("{prefix}_{i}"),
                values: names.iter().map(|n| n.to_string()).zip(p).collect(),
            })
            .collect())
    };
    let training = make("train", config.training_cases, config.seed)?;
    let testing = if config.replay_training {
        training.clone()
    } else {
        make("test", config.testing_cases, config.seed.wrapping_add(1))?
    };
    Ok((training, testing))
}

fn run_fom(spec: &ProblemSpec, case: &ParamCase) -> Result<(crate::fom::SolidProblem, ProblemSpec, Trajectory)> {
    let s = case.apply(spec)?;
    let p = s.build()?;
    let tr = run_continuation(&p, &s.schedule, &s.newton)?;
    Ok((p, s, tr))
}

/// Runs the whole train/basis/test sweep and writes every artifact under `out`.
pub fn run_study(config: &StudyConfig, out: &Path) -> Result<StudyOutcome> {
    config.validate()?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = config.threads {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Error::Config(e.to_string()))?
    };
    pool.install(|| run_study_inner(config, out))
}

fn run_study_inner(config: &StudyConfig, out: &Path) -> Result<StudyOutcome> {
    let spec = config.problem_spec();
    let (training, testing) = sample_cases(config)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("config.toml"), config.to_toml_string()?)?;
    let fom_dir = out.join("fom");
    let mut failures = Vec::new();

    let train_runs: Vec<_> = training.par_iter().map(|c| run_fom(&spec, c)).collect();
    let mut sets = Vec::new();
    for (case, run) in training.iter().zip(train_runs) {
        match run {
            Ok((p, s, tr)) => {
                write_snapshots(&fom_dir, &case.name, &p, &s.schedule, &tr)?;
                let initial = p.initial_state();
                let reference = config.reference.reference(&initial, &tr.states);
                let labels = tr.times.iter().map(|t| format!("{}@{t}", case.name)).collect();
                sets.push(assemble_labelled_snapshots(&tr.states, p.layout(), &reference, labels)?);
            }
            Err(e) => {
                log::warn!("training case {} failed: {e}", case.name);
                failures.push(format!("{}: {e}", case.name));
            }
        }
    }
    if sets.is_empty() {
        return Err(Error::InvalidInput("every training run failed".into()));
    }
    let snapshots = pooled_with_common_reference(sets, config)?;
    let modes = pod_modes(&snapshots)?;
    let max_dim = config.dims.iter().copied().filter(|&m| m <= modes.rank_count()).max();
    if let Some(m) = max_dim {
        basis_from_modes(&modes, &snapshots, m)?.save(&out.join("basis"), "pod")?;
    }

    let test_runs: Vec<_> = testing.par_iter().map(|c| run_fom(&spec, c)).collect();
    let mut jobs = Vec::new();
    let mut tests = Vec::new();
    for (case, run) in testing.iter().zip(test_runs) {
        match run {
            Ok((p, s, tr)) => {
                write_snapshots(&fom_dir, &case.name, &p, &s.schedule, &tr)?;
                tests.push((case.clone(), p, s, tr));
            }
            Err(e) => {
                failures.push(format!("{}: {e}", case.name));
                for &kind in &config.kinds {
                    for &m in &config.dims {
                        jobs.push(Job::Failed(CellResult::failed(&case.name, kind, m, format!("full-order run failed: {e}"))));
                    }
                }
            }
        }
    }
    for (ti, _) in tests.iter().enumerate() {
        for &kind in &config.kinds {
            for &m in &config.dims {
                jobs.push(Job::Run { test: ti, kind, m });
            }
        }
    }

    let reports: Vec<(CellResult, Option<CellReport>)> = jobs
        .par_iter()
        .map(|job| match *job {
            Job::Failed(ref c) => (c.clone(), None),
            Job::Run { test, kind, m } => {
                let (case, p, s, fom) = &tests[test];
                run_cell(config, &snapshots, &modes, case, p, s, fom, kind, m)
            }
        })
        .collect();

    let mut cells = Vec::with_capacity(reports.len());
    for (cell, report) in reports {
        let report = report.unwrap_or_else(|| CellReport {
            cell: cell.clone(),
            parameters: BTreeMap::new(),
            times: Vec::new(),
            iterations: Vec::new(),
        });
        write_cell(out, &report)?;
        cells.push(cell);
    }
    cells.sort_by_key(|c| c.sort_key());
    write_summaries(out, &cells)?;
    write_pareto(out, &cells)?;
    Ok(StudyOutcome {
        cells,
        snapshot_count: snapshots.len(),
        singular_values: modes.singular_values,
        failures,
    })
}

enum Job {
    Failed(CellResult),
    Run {
        test: usize,
        kind: PreconditionerKind,
        m: usize,
    },
}

/// Pools per-case snapshot sets; a mean reference is recomputed over the pool.
fn pooled_with_common_reference(sets: Vec<SnapshotSet>, config: &StudyConfig) -> Result<SnapshotSet> {
    if config.reference != crate::pod::ReferenceChoice::Mean {
        return SnapshotSet::pool(&sets);
    }
    let layout = sets[0].layout.clone();
    let states: Vec<Vec<f64>> = sets
        .iter()
        .flat_map(|s| {
            s.free_snapshots.columns().map(move |c| {
                let mut w = s.reference_state.clone();
                for (&d, v) in s.layout.free_dofs().iter().zip(c) {
                    w[d] += v;
                }
                w
            })
        })
        .collect();
    let labels = sets.iter().flat_map(|s| s.labels.clone()).collect();
    let reference = crate::pod::ReferenceChoice::Mean.reference(&sets[0].reference_state, &states);
    assemble_labelled_snapshots(&states, &layout, &reference, labels)
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    config: &StudyConfig,
    snapshots: &SnapshotSet,
    modes: &crate::linalg::SvdResult,
    case: &ParamCase,
    problem: &crate::fom::SolidProblem,
    spec: &ProblemSpec,
    fom: &Trajectory,
    kind: PreconditionerKind,
    m: usize,
) -> (CellResult, Option<CellReport>) {
    let basis = match basis_from_modes(modes, snapshots, m) {
        Ok(b) => b,
        Err(e) => return (CellResult::failed(&case.name, kind, m, e.to_string()), None),
    };
    let report: RomRunReport = match run_lspg(problem, &basis, kind, &spec.schedule, &config.gauss_newton) {
        Ok(r) => r,
        Err(e) => return (CellResult::failed(&case.name, kind, m, e.to_string()), None),
    };
    let rom = report.full_states();
    let eps = error_metric(&fom.states[..rom.len()], &rom).ok();
    let cell = CellResult {
        case: case.name.clone(),
        kind,
        m,
        eps,
        avg_cond: report.average_condition(),
        total_nonlinear_iters: report.total_nonlinear_iterations,
        wall_seconds: report.wall_seconds,
        converged: report.converged,
        failure: report.failure.clone(),
    };
    let full = CellReport {
        cell: cell.clone(),
        parameters: problem.parameters(),
        times: report.times.clone(),
        iterations: report.iterations,
    };
    (cell, Some(full))
}

pub fn cell_dir(out: &Path, case: &str, kind: PreconditionerKind, m: usize) -> PathBuf {
    out.join("study").join(case).join(kind.as_str()).join(format!("M{m}"))
}

fn write_cell(out: &Path, report: &CellReport) -> Result<()> {
    let c = &report.cell;
    let dir = cell_dir(out, &c.case, c.kind, c.m);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    fs::write(dir.join("report.csv"), format!("{CELL_HEADER}\n{}\n", c.csv_row()))?;
    Ok(())
}

/// Reads every `study/<case>/<kind>/M<dim>/report.json` below `out`.
pub fn collect_reports(out: &Path) -> Result<Vec<CellReport>> {
    let mut reports = Vec::new();
    let root = out.join("study");
    if !root.is_dir() {
        return Ok(reports);
    }
    for case in sorted_dirs(&root)? {
        for kind in sorted_dirs(&case)? {
            for cell in sorted_dirs(&kind)? {
                let path = cell.join("report.json");
                if path.is_file() {
                    reports.push(serde_json::from_str(&fs::read_to_string(&path)?)?);
                }
            }
        }
    }
    reports.sort_by_key(|r: &CellReport| r.cell.sort_key());
    Ok(reports)
}

fn sorted_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    v.sort();
    Ok(v)
}

/// Regenerates the summary tables from the per-cell reports under `out`.
pub fn summarize(out: &Path) -> Result<Vec<PathBuf>> {
    let cells: Vec<CellResult> = collect_reports(out)?.into_iter().map(|r| r.cell).collect();
    let mut written = write_summaries(out, &cells)?;
    written.extend(write_pareto(out, &cells)?);
    Ok(written)
}

/// Figure families: file tag, column name, value extractor.
type Family = (&'static str, &'static str, fn(&CellResult) -> String);

const FAMILIES: [Family; 4] = [
    ("error", "eps", |c| opt(c.eps)),
    ("walltime", "wall_seconds", |c| c.wall_seconds.to_string()),
    ("cond", "avg_cond", |c| opt(c.avg_cond)),
    ("iters", "total_nonlinear_iters", |c| c.total_nonlinear_iters.to_string()),
];

fn write_summaries(out: &Path, cells: &[CellResult]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let mut all = format!("{CELL_HEADER}\n");
    for c in cells {
        writeln!(all, "{}", c.csv_row()).expect("string write");
    }
    let path = out.join("summary_cells.csv");
    fs::write(&path, all)?;
    written.push(path);

    let mut by_case: BTreeMap<&str, Vec<&CellResult>> = BTreeMap::new();
    for c in cells {
        by_case.entry(&c.case).or_default().push(c);
    }
    for (case, rows) in by_case {
        for (tag, column, value) in FAMILIES {
            let mut text = format!("kind,M,{column},converged\n");
            for c in &rows {
                writeln!(text, "{},{},{},{}", c.kind, c.m, value(c), c.converged).expect("string write");
            }
            let path = out.join(format!("summary_{tag}_{case}.csv"));
            fs::write(&path, text)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Pareto points of the converged cells, per case.
pub fn pareto_points(cells: &[CellResult]) -> BTreeMap<String, Vec<ParetoPoint>> {
    let mut by_case: BTreeMap<String, Vec<ParetoPoint>> = BTreeMap::new();
    for c in cells {
        if let (true, Some(eps)) = (c.converged, c.eps) {
            by_case.entry(c.case.clone()).or_default().push(ParetoPoint {
                kind: c.kind,
                m: c.m,
                eps,
                wall_seconds: c.wall_seconds,
            });
        }
    }
    by_case
}

fn write_pareto(out: &Path, cells: &[CellResult]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (case, points) in pareto_points(cells) {
        let mut text = String::from("kind,M,eps,wall_seconds\n");
        for p in pareto_front(&points) {
            writeln!(text, "{},{},{:e},{}", p.kind, p.m, p.eps, p.wall_seconds).expect("string write");
        }
        let path = out.join(format!("pareto_{case}.csv"));
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
