use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lspg_rom::fom::{self, FomProblem, Physics, ProblemSpec};
use lspg_rom::harness::{self, StudyConfig};
use lspg_rom::lspg::{error_metric, run_lspg, GaussNewtonConfig};
use lspg_rom::pod::{self, ReducedBasis, ReferenceChoice};
use lspg_rom::precond::PreconditionerKind;

#[derive(Parser)]
#[command(name = "lspg-rom", version, about = "POD bases and preconditioned LSPG reduced-order models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full-order continuation and write its snapshots.
    Fom {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Snapshot file stem.
        #[arg(long, default_value = "snapshots")]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a POD basis with blocking vectors from snapshot files.
    Basis {
        /// Snapshot directory.
        #[arg(long)]
        snapshots: PathBuf,
        /// Snapshot stems to pool; every stem in the directory when empty.
        #[arg(long, value_delimiter = ',')]
        stems: Vec<String>,
        /// Basis size; overrides --energy.
        #[arg(long)]
        dim: Option<usize>,
        /// Energy fraction used to pick the size.
        #[arg(long, default_value_t = 0.999999)]
        energy: f64,
        #[arg(long, value_enum, default_value_t = Reference::Initial)]
        reference: Reference,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one reduced-order model.
    Rom {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Directory holding `pod.*` basis files.
        #[arg(long)]
        basis: PathBuf,
        #[arg(long, default_value = "jacobi")]
        kind: PreconditionerKind,
        /// Leading basis vectors to use; all when absent.
        #[arg(long)]
        dim: Option<usize>,
        /// Full-order snapshot file (dir/stem) to measure the error against.
        #[arg(long)]
        reference_run: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full train/test sweep.
    Study(StudyArgs),
    /// Rebuild the summary tables of a study directory.
    Summarize {
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the Pareto front of each test case.
    Pareto {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem description (TOML); a built-in beam when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PhysicsArg::Thermomechanical)]
    physics: PhysicsArg,
    /// Parameter override, e.g. `E_b=1.5e9`; repeatable.
    #[arg(long = "set", value_parser = parse_assignment)]
    set: Vec<(String, f64)>,
}

#[derive(Args)]
struct StudyArgs {
    /// Study description (TOML); the built-in preset for --physics when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    physics: Option<PhysicsArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    kinds: Vec<PreconditionerKind>,
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhysicsArg {
    Mechanical,
    Thermomechanical,
}

impl From<PhysicsArg> for Physics {
    fn from(p: PhysicsArg) -> Physics {
        match p {
            PhysicsArg::Mechanical => Physics::Mechanical,
            PhysicsArg::Thermomechanical => Physics::Thermomechanical,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Reference {
    Initial,
    Zero,
    Mean,
}

fn parse_assignment(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in {s}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

impl ProblemArgs {
    fn spec(&self) -> Result<ProblemSpec> {
        let mut spec = match &self.config {
            Some(path) => ProblemSpec::from_toml_str(
                &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            )?,
            None => match Physics::from(self.physics) {
                Physics::Mechanical => ProblemSpec::mechanical_beam(),
                Physics::Thermomechanical => ProblemSpec::thermomechanical_beam(),
            },
        };
        for (k, v) in &self.set {
            spec.materials.set(k, *v)?;
        }
        Ok(spec)
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fom { problem, name, out } => {
            let spec = problem.spec()?;
            let p = spec.build()?;
            let tr = fom::run_continuation(&p, &spec.schedule, &spec.newton)?;
            fom::write_snapshots(&out, &name, &p, &spec.schedule, &tr)?;
            println!(
                "{} states of {} dofs written to {}",
                tr.states.len(),
                p.layout().total_dofs(),
                out.join(format!("{name}.txt")).display()
            );
        }
        Command::Basis {
            snapshots,
            stems,
            dim,
            energy,
            reference,
            out,
        } => build_basis(&snapshots, stems, dim, energy, reference, &out)?,
        Command::Rom {
            problem,
            basis,
            kind,
            dim,
            reference_run,
            out,
        } => {
            let spec = problem.spec()?;
            let p = spec.build()?;
            let mut b = ReducedBasis::load(&basis, "pod", p.layout())?;
            if let Some(m) = dim {
                b = b.truncate(m)?;
            }
            let report = run_lspg(&p, &b, kind, &spec.schedule, &GaussNewtonConfig::default())?;
            let eps = match reference_run {
                Some(path) => {
                    let (dir, stem) = split_stem(&path)?;
                    let (states, _) = fom::read_snapshots(dir, stem)?;
                    let rom = report.full_states();
                    if rom.len() > states.len() {
                        bail!("reference run has {} states, ROM produced {}", states.len(), rom.len());
                    }
                    Some(error_metric(&states[..rom.len()], &rom)?)
                }
                None => None,
            };
            fs::create_dir_all(&out)?;
            fs::write(out.join("report.json"), serde_json::to_string_pretty(&report)?)?;
            println!(
                "{kind} M={} converged={} iterations={} avg_cond={} eps={}",
                b.dim(),
                report.converged,
                report.total_nonlinear_iterations,
                report.average_condition().map(|c| format!("{c:e}")).unwrap_or_default(),
                eps.map(|e| format!("{e:e}")).unwrap_or_default()
            );
        }
        Command::Study(args) => {
            let mut cfg = match (&args.config, args.physics) {
                (Some(path), _) => StudyConfig::from_file(path)?,
                (None, Some(p)) => StudyConfig::for_physics(p.into()),
                (None, None) => StudyConfig::default(),
            };
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            if !args.kinds.is_empty() {
                cfg.kinds = args.kinds;
            }
            if !args.dims.is_empty() {
                cfg.dims = args.dims;
            }
            if args.threads.is_some() {
                cfg.threads = args.threads;
            }
            let outcome = harness::run_study(&cfg, &args.out)?;
            let failed = outcome.cells.iter().filter(|c| !c.converged).count();
            println!(
                "{} cells ({} non-converged) from {} pooled snapshots; summaries in {}",
                outcome.cells.len(),
                failed,
                outcome.snapshot_count,
                args.out.display()
            );
            for f in &outcome.failures {
                println!("stage failure: {f}");
            }
        }
        Command::Summarize { out } => {
            for p in harness::summarize(&out)? {
                println!("{}", p.display());
            }
        }
        Command::Pareto { out } => {
            let cells: Vec<_> = harness::collect_reports(&out)?.into_iter().map(|r| r.cell).collect();
            for (case, points) in harness::pareto_points(&cells) {
                println!("{case}");
                for p in harness::pareto_front(&points) {
                    println!("  {:<6} M={:<4} eps={:.3e} wall={:.3e}s", p.kind, p.m, p.eps, p.wall_seconds);
                }
            }
        }
    }
    Ok(())
}

fn split_stem(path: &Path) -> Result<(&Path, &str)> {
    let stem = path
        .file_name()
        .and_then(|s| s.to_str())
        .context("snapshot path needs a file stem")?;
    Ok((path.parent().unwrap_or(Path::new(".")), stem))
}

fn build_basis(
    dir: &Path,
    mut stems: Vec<String>,
    dim: Option<usize>,
    energy: f64,
    reference: Reference,
    out: &Path,
) -> Result<()> {
    if stems.is_empty() {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                if let Some(s) = path.file_stem().and_then(|s| s.to_str()) {
                    stems.push(s.to_string());
                }
            }
        }
        stems.sort();
    }
    if stems.is_empty() {
        bail!("no snapshot files in {}", dir.display());
    }
    let choice = match reference {
        Reference::Initial => ReferenceChoice::Initial,
        Reference::Zero => ReferenceChoice::Zero,
        Reference::Mean => ReferenceChoice::Mean,
    };
    let mut all_states = Vec::new();
    let mut labels = Vec::new();
    let mut meta0 = None;
    for stem in &stems {
        let (states, meta) = fom::read_snapshots(dir, stem)?;
        if let Some(m0) = &meta0 {
            let m0: &fom::SnapshotMetadata = m0;
            if m0.layout_hash != meta.layout_hash {
                bail!("snapshot file {stem} has a different dof layout");
            }
        }
        labels.extend(meta.times.iter().map(|t| format!("{stem}@{t}")));
        all_states.extend(states);
        meta0.get_or_insert(meta);
    }
    let meta = meta0.expect("at least one stem");
    let reference = choice.reference(&meta.initial_state, &all_states);
    let set = pod::assemble_labelled_snapshots(&all_states, &meta.layout, &reference, labels)?;
    let modes = pod::pod_modes(&set)?;
    let m = match dim {
        Some(m) => m,
        None => pod::energy_truncation(&modes.singular_values, energy)?,
    };
    let basis = pod::basis_from_modes(&modes, &set, m)?;
    basis.save(out, "pod")?;
    println!(
        "basis M={} (+{} blocking vectors) from {} snapshots written to {}",
        basis.dim(),
        basis.dbc_dim(),
        set.len(),
        out.display()
    );
    Ok(())
}
