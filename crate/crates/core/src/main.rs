use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Stdio};
use std::time::Duration;

use clap::{Parser, Subcommand};

use evos::diagnostics::EigenFrame;
use evos::harness::{
    analyze, export_summary_csv, export_trajectories_csv, load_records, run_grid, run_once,
    summarize, Analysis, BenchmarkConfig, GridOptions, HarnessError, OptimizerSpec,
};
use evos::objectives::external::run_peer;
use evos::objectives::{ChildTransport, ExternalObjective, NoiseSpec, PeerMode};
use evos::optimizers::OptimizerKind;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "evos",
    version,
    about = "Benchmark and analyze evolutionary optimizers"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a benchmark grid.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the one in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Skip runs already persisted with the same configuration.
        #[arg(long)]
        resume: bool,
    },
    /// Trajectory diagnostics over a run directory.
    Analyze {
        #[arg(long)]
        runs: PathBuf,
        /// Comma-separated: pca, cosfit, normgrowth, covmetrics, align.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "pca,cosfit,normgrowth,covmetrics"
        )]
        analyses: Vec<Analysis>,
        /// Eigenframe file, needed by `align`.
        #[arg(long)]
        frame: Option<PathBuf>,
        /// Number of leading eigenvectors used by `align`.
        #[arg(long)]
        cutoff: Option<usize>,
        /// Where the report and CSVs go; defaults to `<runs>/analysis`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score summary table for a run directory.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long, default_value = "report.md")]
        out: PathBuf,
        /// Also export per-generation trajectories to this CSV file.
        #[arg(long)]
        trajectories: Option<PathBuf>,
    },
    /// Drive a reference peer process over the external-objective protocol.
    ExternDemo {
        #[arg(long, default_value_t = 256)]
        dim: usize,
        #[arg(long, default_value_t = 40)]
        population: usize,
        #[arg(long, default_value_t = 75)]
        generations: usize,
        #[arg(long, default_value = "cholesky-cma")]
        optimizer: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Peer mode (echo or a fault such as wrong-length, crash-after-3).
        #[arg(long, default_value = "echo")]
        mode: String,
        #[arg(long, default_value_t = 10.0)]
        timeout_secs: f64,
    },
    /// Reference peer serving stdin/stdout.
    #[command(hide = true)]
    Peer {
        #[arg(long, default_value = "echo")]
        mode: PeerMode,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::Config(_) => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::from(EXIT_FAILURE),
            }
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode, HarnessError> {
    match cmd {
        Cmd::Run {
            config,
            out,
            threads,
            resume,
        } => run(&config, out, threads, resume),
        Cmd::Analyze {
            runs,
            analyses,
            frame,
            cutoff,
            out,
        } => {
            let records = load_run_dir(&runs)?;
            let frame = frame.map(|p| EigenFrame::load(&p)).transpose()?;
            let out = out.unwrap_or_else(|| runs.join("analysis"));
            let rep = analyze(&records, &analyses, frame.as_ref(), cutoff, &out)?;
            let path = out.join("report.md");
            std::fs::write(&path, &rep.markdown)?;
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            for (a, why) in &rep.failures {
                eprintln!("{a:?} failed: {why}");
            }
            println!(
                "wrote {} and {} csv files",
                path.display(),
                rep.csv_files.len()
            );
            Ok(if rep.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILURE)
            })
        }
        Cmd::Report {
            runs,
            out,
            trajectories,
        } => {
            let records = load_run_dir(&runs)?;
            let table = summarize(&records)?;
            std::fs::write(&out, table.to_markdown())?;
            let csv = out.with_extension("csv");
            export_summary_csv(&table, &csv)?;
            println!("wrote {} and {}", out.display(), csv.display());
            if let Some(path) = trajectories {
                let rows = export_trajectories_csv(&records, &path)?;
                println!("wrote {rows} trajectory rows to {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ExternDemo {
            dim,
            population,
            generations,
            optimizer,
            seed,
            mode,
            timeout_secs,
        } => {
            let kind: OptimizerKind = serde_json::from_value(serde_json::Value::String(
                optimizer.clone(),
            ))
            .map_err(|_| HarnessError::Config(format!("unknown optimizer {optimizer:?}")))?;
            extern_demo(
                kind,
                dim,
                population,
                generations,
                seed,
                &mode,
                Duration::from_secs_f64(timeout_secs),
            )
        }
        Cmd::Peer { mode } => {
            let stdin = io::stdin().lock();
            run_peer(stdin, BufWriter::new(io::stdout().lock()), mode)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_run_dir(dir: &Path) -> Result<Vec<evos::harness::RunRecord>, HarnessError> {
    if !dir.is_dir() {
        return Err(HarnessError::Io(io::Error::new(
            io::ErrorKind::NotFound,
            format!("run directory {} does not exist", dir.display()),
        )));
    }
    load_records(dir)
}

fn run(
    config: &Path,
    out: Option<PathBuf>,
    threads: Option<usize>,
    resume: bool,
) -> Result<ExitCode, HarnessError> {
    let cfg = BenchmarkConfig::load(config)?.validated()?;
    let outcome = run_grid(
        &cfg,
        &GridOptions {
            threads,
            resume,
            out_dir: out,
        },
    )?;
    let failed: Vec<_> = outcome.failures().collect();
    println!(
        "{} runs ({} resumed) in {}",
        outcome.records.len(),
        outcome.resumed,
        outcome.out_dir.display()
    );
    for r in &failed {
        if let evos::harness::RunStatus::Failed { message } = &r.status {
            eprintln!("run {} failed: {message}", r.run_id);
        }
    }
    Ok(if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    })
}

fn extern_demo(
    kind: OptimizerKind,
    dim: usize,
    population: usize,
    generations: usize,
    seed: u64,
    mode: &str,
    timeout: Duration,
) -> Result<ExitCode, HarnessError> {
    mode.parse::<PeerMode>().map_err(HarnessError::Config)?;
    let mut cmd = Command::new(std::env::current_exe()?);
    cmd.args(["peer", "--mode", mode]).stderr(Stdio::inherit());
    let transport = ChildTransport::spawn(cmd)?;
    let mut objective =
        ExternalObjective::connect(Box::new(transport), dim, timeout, NoiseSpec::noiseless())?;
    let mut opt = OptimizerSpec::new(kind).build(dim, population, generations, seed)?;
    let out = run_once(opt.as_mut(), &mut objective, generations);
    let requests = objective.requests();
    if out.error.is_none() {
        objective.close()?;
    }
    println!("generations: {}", out.generations.len());
    println!("eval requests: {requests}");
    println!(
        "evaluations: {}",
        out.generations.iter().map(|g| g.raw.len()).sum::<usize>()
    );
    if let Some(best) = out.clean_best() {
        println!("best score: {best:.6}");
    }
    match out.error {
        Some(e) => {
            eprintln!("run aborted: {e}");
            Ok(ExitCode::from(EXIT_FAILURE))
        }
        None => Ok(ExitCode::SUCCESS),
    }
}
