use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use msflow::io::{self, Mode};

#[derive(Parser)]
#[command(name = "msflow", version, about = "Fine-scale DG and multiscale flow solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `run.output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random inclusion layouts (overrides `run.seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or load the mesh and write it with an empty state.
    Mesh(Common),
    /// Fine-scale reference run.
    Fine(Common),
    /// Multiscale runs for the configured basis counts.
    Ms(Common),
    /// Error tables over Darcy numbers, basis counts and oversampling.
    Sweep(Common),
    /// Relative errors between two exported states.
    Compare(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match try_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn try_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Mesh(a) => (Mode::Mesh, a),
        Command::Fine(a) => (Mode::Fine, a),
        Command::Ms(a) => (Mode::Ms, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Compare(a) => (Mode::Compare, a),
    };
    let mut spec =
        io::parse_config_as(&args.config, Some(mode)).with_context(|| format!("reading {}", args.config.display()))?;
    if let Some(out) = args.out {
        spec.output = out;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let summary = io::run(&spec).with_context(|| format!("{} run failed", mode.name()))?;
    for m in &summary.messages {
        println!("{m}");
    }
    for p in &summary.artifacts {
        println!("wrote {}", p.display());
    }
    Ok(())
}
