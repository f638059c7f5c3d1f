//! Batch runner behind the `aclab` binary.

pub mod config;
pub mod output;
mod run;

pub use config::RunConfig;
pub use run::{run, run_config, RunError, RunOptions, RunReport};

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "aclab", version, about = "Agnostic-control experiment runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Run the experiment described by a JSON config.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "ACLAB_THREADS")]
    pub threads: Option<usize>,
    /// Master seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// No per-cell progress lines.
    #[arg(long)]
    pub quiet: bool,
}

/// Parse arguments, run, print errors, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let CliCommand::Run(a) = cli.command;
    let opts = RunOptions { config: a.config, out: a.out, threads: a.threads, seed: a.seed, quiet: a.quiet };
    match run(&opts) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("aclab: {e}");
            if let RunError::Lab(crate::LabError::Path { path, seed, .. }) = &e {
                eprintln!("aclab: replay with --seed {seed} (failing path {path})");
            }
            e.exit_code()
        }
    }
}
