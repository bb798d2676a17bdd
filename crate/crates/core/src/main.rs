use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use driftforge::experiment::{self, cmd_evaluate, cmd_generate, cmd_report, ExperimentConfig, Failure};

/// Labeled concept-drift stream generation and prequential evaluation.
#[derive(Debug, Parser)]
#[command(name = "driftforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample subsets and write one drifted stream per scenario and seed.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to one per core.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run every configured learner on the generated streams.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// L2-normalize precomputed embedding vectors before use.
        #[arg(long)]
        normalize_embeddings: bool,
    },
    /// Merge windowed metrics and drift markers into one table.
    Report {
        #[arg(long)]
        out: PathBuf,
        /// Metrics directories to merge; defaults to `<out>/metrics`.
        #[arg(long)]
        metrics: Vec<PathBuf>,
    },
}

fn report_failures(failures: &[Failure]) -> ExitCode {
    if failures.is_empty() {
        return ExitCode::SUCCESS;
    }
    eprintln!("{} task(s) failed:", failures.len());
    for f in failures {
        eprintln!("  {}: {}", f.what, f.error);
    }
    ExitCode::FAILURE
}

fn run(cli: Cli) -> Result<ExitCode, experiment::ExperimentError> {
    match cli.command {
        Command::Generate { config, out, jobs } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = cmd_generate(&cfg, &out, jobs)?;
            println!("wrote {} stream(s) to {}", summary.written.len(), experiment::streams_dir(&out).display());
            Ok(report_failures(&summary.failures))
        }
        Command::Evaluate {
            config,
            out,
            jobs,
            normalize_embeddings,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = cmd_evaluate(&cfg, &out, jobs, normalize_embeddings)?;
            println!("finished {} run(s); metrics in {}", summary.runs, experiment::metrics_dir(&out).display());
            Ok(report_failures(&summary.failures))
        }
        Command::Report { out, metrics } => {
            let dirs = if metrics.is_empty() {
                vec![experiment::metrics_dir(&out)]
            } else {
                metrics
            };
            let summary = cmd_report(&dirs, &experiment::report_dir(&out))?;
            println!(
                "merged {} window row(s) across {} series and {} marker(s) into {}",
                summary.rows,
                summary.series,
                summary.markers,
                experiment::report_dir(&out).display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
