//! `detseg`: pipeline runs, benchmarking, metric evaluation, condition
//! analysis, dataset audits, and fixture generation.
//!
//! Machine output (JSON or CSV) goes to stdout; human logs go to stderr.
//! Exit codes: 0 success, 1 validation failure (bad inputs, split leaks),
//! 2 runtime error (stage failure, I/O).

mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Parser)]
#[command(name = "detseg", version, about = "Two-stage detection/segmentation pipeline toolkit")]
struct Cli {
    /// Machine output format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for stub backends, synthetic sources, and generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline over a frame source and report timings.
    Run(commands::run::RunArgs),
    /// Compare sequential and threaded throughput on the same workload.
    Bench(commands::bench::BenchArgs),
    /// Evaluate a predictions file against a ground-truth manifest.
    Metrics(commands::metrics::MetricsArgs),
    /// Per-condition error breakdown over a manifest, its images, and predictions.
    Analyze(commands::analyze::AnalyzeArgs),
    /// Dataset statistics and split audits.
    Dataset {
        #[command(subcommand)]
        cmd: commands::dataset::DatasetCmd,
    },
    /// Generate a deterministic synthetic image corpus with manifests.
    Fixture(commands::fixture::FixtureArgs),
}

/// Validation failure (exit 1) or runtime failure (exit 2) with a message
/// that already explains itself.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.msg)
    }
}

impl std::error::Error for Failure {}

pub fn fail_validation(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Failure {
        code: 1,
        msg: msg.into(),
    })
}

pub fn fail_runtime(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Failure {
        code: 2,
        msg: msg.into(),
    })
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return f.code;
    }
    if let Some(e) = err.downcast_ref::<detseg_core::Error>() {
        use detseg_core::Error::*;
        return match e {
            Parse { .. } | Validation(_) | Domain(_) | Dimension(_) => 1,
            Io(_) | Stage { .. } | Watchdog { .. } => 2,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 2;
    }
    2
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes (e.g. `detseg ... | head`)
    // instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = match cli.command {
        Command::Run(ref args) => commands::run::execute(args, cli.seed, cli.format),
        Command::Bench(ref args) => commands::bench::execute(args, cli.seed, cli.format),
        Command::Metrics(ref args) => commands::metrics::execute(args, cli.format),
        Command::Analyze(ref args) => commands::analyze::execute(args, cli.format),
        Command::Dataset { ref cmd } => commands::dataset::execute(cmd, cli.format),
        Command::Fixture(ref args) => commands::fixture::execute(args, cli.seed, cli.format),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// Pipeline mode flag shared by `run` and `bench`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Sequential,
    Pipelined,
    ParallelIndependent,
}

impl From<ModeArg> for detseg_core::pipeline::PipelineMode {
    fn from(m: ModeArg) -> Self {
        use detseg_core::pipeline::PipelineMode::*;
        match m {
            ModeArg::Sequential => Sequential,
            ModeArg::Pipelined => Pipelined,
            ModeArg::ParallelIndependent => ParallelIndependent,
        }
    }
}
