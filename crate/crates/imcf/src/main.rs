use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use imcf::commands;

/// Inverse mean curvature flow of convex caps meeting the unit sphere perpendicularly.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow from a JSON config and persist the trajectory.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute all checks from a persisted run and compare with its manifest.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Run a λ₀ × amplitude × m sweep and write summary.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Per-node geometry of a profile CSV (`r,u` or `x,u`).
    Geometry {
        #[arg(long)]
        profile: PathBuf,
        /// Also write a JSON summary here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Evaluate the chart on points (`x1,x2,lambda`) or invert it (`q0,q1,q2`).
    Chart {
        #[arg(long)]
        points: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { imcf::exit::CONFIG as u8 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Run { config } => commands::cmd_run(&config),
        Command::Verify { manifest } => commands::cmd_verify(&manifest),
        Command::Sweep { config } => commands::cmd_sweep(&config),
        Command::Geometry { profile, summary } => commands::cmd_geometry(&profile, summary.as_deref()),
        Command::Chart { points } => commands::cmd_chart(&points),
    };
    ExitCode::from(code as u8)
}
