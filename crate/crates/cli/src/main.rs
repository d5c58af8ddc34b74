//! `ctlab <gen|analyze|classify|catalog> --config <path> [--out <dir>] [--threads <n>]`

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Command, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "ctlab", version, about = "Cover times of random walks on weighted graphs")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "CTLAB_THREADS")]
    threads: Option<usize>,
}

fn run(cli: &Cli) -> ctlab_core::Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ctlab_core::Error::InvalidParameters("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ctlab_core::Error::InvalidParameters(format!("thread pool: {e}")))?;
    }
    let config = RunConfig::load(&cli.config)?;
    let out_dir = cli.out.clone().or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("ctlab_out"));
    let run = commands::execute(cli.command, &config)?;
    let written = run.outputs.commit(&out_dir)?;
    println!("{}", run.summary);
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(run.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(output::EXIT_CATALOG_FAILURE as u8),
        Err(e) => {
            eprintln!("{}", output::error_object(&e));
            ExitCode::from(output::exit_code(&e) as u8)
        }
    }
}
