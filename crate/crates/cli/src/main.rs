use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use persson_cli::job::{run, Command, Overrides};

#[derive(Parser)]
#[command(
    name = "persson",
    version,
    about = "Essential-spectrum edge estimates from finite compressions"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// JSON job file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output` in the job file).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the ladder.
    #[arg(long)]
    threads: Option<usize>,
    /// RNG seed for sampled checks.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the compression ladder and report the edge estimates.
    Estimate(Common),
    /// Check self-adjointness, covariance, coherence and the defect identity.
    Verify(Common),
    /// Print dictionary, shell and space statistics.
    Info(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Cmd::Estimate(c) => (Command::Estimate, c),
        Cmd::Verify(c) => (Command::Verify, c),
        Cmd::Info(c) => (Command::Info, c),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let overrides = Overrides {
        out: common.out,
        seed: common.seed,
    };
    match run(cmd, &common.config, &overrides) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            println!("wrote {}", outcome.out_dir.display());
            if outcome.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
