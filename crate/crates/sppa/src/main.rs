use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sppa::{cmd_run, cmd_verify, RunArgs};

#[derive(Parser)]
#[command(name = "sppa", version, about = "Stochastic proximal point experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replica and write traces plus a summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides iterations.
        #[arg(long)]
        iters: Option<u64>,
    },
    /// Check the reference solution and its certificates without running.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, seed, iters } => cmd_run(&RunArgs { config, out, seed, iters }).map(|outcome| {
            println!(
                "wrote {} trace file(s) and {}",
                outcome.trace_files.len(),
                outcome.summary_file.display()
            );
        }),
        Command::Verify { config } => cmd_verify(&config).map(|report| print!("{report}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
