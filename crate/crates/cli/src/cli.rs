//! Command-line verbs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use bois_core::orchestrator::reference_energies;
use clap::{Args, Parser, Subcommand};

use crate::experiment::{self, KernelName, Knobs, Mode, StrategyName, SweepSummary};
use crate::family_file::{load_family, LoadedFamily};
use crate::record::{write_traces, RunRecord, SchemeName};
use crate::report;

/// Environment variable naming the directory searched for family files.
pub const DATA_DIR_ENV: &str = "BOIS_DATA_DIR";

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CAP_REACHED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bois", version, about = "Bayesian optimisation with information sharing across VQE geometries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a family file and print per-geometry word counts.
    Validate {
        #[arg(long)]
        family: PathBuf,
    },
    /// Exact ground energies by dense diagonalisation.
    Reference {
        #[arg(long)]
        family: PathBuf,
        /// CSV output file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One optimisation run.
    Run(RunArgs),
    /// Seeded repetitions of one or more schemes with paired initial points.
    Sweep(SweepArgs),
    /// Merge run files into trace, demand and histogram tables.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long, value_enum, default_value = "matern52")]
    pub kernel: KernelName,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    /// Iteration cap.
    #[arg(long, default_value_t = 100)]
    pub iters: u32,
    /// Relative convergence threshold [default: 1e-3 exact, 2e-2 shots].
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa0: f64,
    /// Denominator of the acquisition-weight decay.
    #[arg(long, default_value_t = 100)]
    pub nmax_schedule: u32,
    /// Number of random initial points.
    #[arg(long, default_value_t = 30)]
    pub n_init: usize,
    /// `random` skips the surrogate; demand counts are unchanged.
    #[arg(long, value_enum, default_value = "bo")]
    pub strategy: StrategyName,
}

impl CommonArgs {
    fn knobs(&self) -> Knobs {
        Knobs {
            kernel: self.kernel,
            mode: self.mode,
            iters: self.iters,
            epsilon: self.epsilon,
            kappa0: self.kappa0,
            nmax_schedule: self.nmax_schedule,
            n_init: self.n_init,
            strategy: self.strategy,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "immediate-all")]
    pub scheme: SchemeName,
    /// Output directory for `run.json` and `traces.csv`.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// One or more schemes; repetitions are paired across them.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "immediate-all")]
    pub scheme: Vec<SchemeName>,
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    #[arg(long, default_value = "sweep")]
    pub out: PathBuf,
}

/// Finds a family file as given, or inside the data directory.
pub fn resolve_family(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    let dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"));
    let candidate = dir.join(path);
    if candidate.exists() {
        candidate
    } else {
        path.to_path_buf()
    }
}

fn open_family(path: &Path) -> anyhow::Result<LoadedFamily> {
    Ok(load_family(&resolve_family(path))?)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    match cli.command {
        Command::Validate { family } => validate(&family, stdout),
        Command::Reference { family, out } => reference(&family, out.as_deref(), stdout),
        Command::Run(args) => run(&args, stdout),
        Command::Sweep(args) => sweep(&args, stdout),
        Command::Report { runs, out } => report_cmd(&runs, &out, stdout),
    }
}

fn validate(path: &Path, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let f = open_family(path)?;
    let fam = &f.family;
    writeln!(
        stdout,
        "{}: {} geometries, {} qubits, grid {:?}, {} distinct words",
        fam.molecule,
        fam.len(),
        fam.ansatz.n_qubits,
        fam.grid_shape,
        fam.union_required().len()
    )?;
    for g in &fam.geometries {
        writeln!(stdout, "geometry {:>3}  words {:>4}  {}", g.geometry_id(), g.terms().len(), g.label())?;
    }
    Ok(EXIT_CONVERGED)
}

fn reference(path: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let f = open_family(path)?;
    let energies = reference_energies(&f.family)?;
    let mut rows = Vec::new();
    for (g, e) in f.family.geometries.iter().zip(&energies) {
        writeln!(stdout, "{:>3}  {:+.12}  {}", g.geometry_id(), e, g.label())?;
        rows.push((g.geometry_id(), *e));
    }
    if let Some(out) = out {
        let mut w = csv::Writer::from_writer(create(out)?);
        w.write_record(["geometry_id", "reference_energy"])?;
        for (id, e) in rows {
            w.write_record([id.to_string(), e.to_string()])?;
        }
        w.flush()?;
    }
    Ok(EXIT_CONVERGED)
}

fn run(args: &RunArgs, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let f = open_family(&args.common.family)?;
    let references = reference_energies(&f.family)?;
    let knobs = args.common.knobs();
    let record = experiment::run_one(&f, &references, args.scheme, &knobs, args.common.seed)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    record.save(&args.out.join("run.json"))?;
    write_traces(&record.result, create(&args.out.join("traces.csv"))?)?;
    let r = &record.result;
    writeln!(
        stdout,
        "{} {} seed {}: {} iterations, converged at {}, {} pauli evaluations ({} init)",
        f.family.molecule,
        args.scheme.as_str(),
        args.common.seed,
        r.iterations_run,
        r.iteration_of_convergence.map_or("-".to_string(), |v| v.to_string()),
        r.ledger.total_pauli_evals,
        r.ledger.init_pauli_evals,
    )?;
    Ok(if r.iteration_of_convergence.is_some() {
        EXIT_CONVERGED
    } else {
        EXIT_CAP_REACHED
    })
}

fn sweep(args: &SweepArgs, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    if args.reps == 0 {
        bail!("--reps must be at least 1");
    }
    let f = open_family(&args.common.family)?;
    let references = reference_energies(&f.family)?;
    let knobs = args.common.knobs();
    let records = experiment::sweep(&f, &references, &args.scheme, &knobs, args.common.seed, args.reps)?;
    let runs_dir = args.out.join("runs");
    std::fs::create_dir_all(&runs_dir).with_context(|| format!("creating {}", runs_dir.display()))?;
    for r in &records {
        r.save(&runs_dir.join(format!("{}_seed{}.json", r.metadata.scheme.as_str(), r.metadata.seed)))?;
    }
    let summaries = experiment::summarise(&records)?;
    std::fs::write(args.out.join("summary.json"), serde_json::to_string_pretty(&summaries)? + "\n")?;
    report::write_histogram(&summaries, create(&args.out.join("histogram.csv"))?)?;
    report::write_summary_table(&summaries, create(&args.out.join("summary.csv"))?)?;
    print_summaries(&summaries, stdout)?;
    let all = summaries.iter().all(|s| s.did_not_converge == 0);
    Ok(if all { EXIT_CONVERGED } else { EXIT_CAP_REACHED })
}

fn print_summaries(summaries: &[SweepSummary], stdout: &mut dyn Write) -> anyhow::Result<()> {
    for s in summaries {
        writeln!(
            stdout,
            "{:<14} {:<9} reps {:>3}  converged {:>3}  did-not-converge {:>3}  mean {}  median {}",
            s.scheme.as_str(),
            s.kernel,
            s.iterations.len(),
            s.converged,
            s.did_not_converge,
            s.mean.map_or("-".into(), |v| format!("{v:.2}")),
            s.median.map_or("-".into(), |v| format!("{v:.1}")),
        )?;
    }
    Ok(())
}

fn report_cmd(runs: &[PathBuf], out: &Path, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let records = runs.iter().map(|p| RunRecord::load(p)).collect::<anyhow::Result<Vec<_>>>()?;
    report::check_same_family(&records)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let rows = report::write_merged_traces(&records, create(&out.join("traces.csv"))?)?;
    report::write_demand(&records, create(&out.join("demand.csv"))?)?;
    let summaries = experiment::summarise(&records)?;
    report::write_histogram(&summaries, create(&out.join("histogram.csv"))?)?;
    report::write_summary_table(&summaries, create(&out.join("summary.csv"))?)?;
    writeln!(stdout, "{} runs, {} trace rows written to {}", records.len(), rows, out.display())?;
    print_summaries(&summaries, stdout)?;
    Ok(EXIT_CONVERGED)
}
