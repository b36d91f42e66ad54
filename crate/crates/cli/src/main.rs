use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

mod commands;
mod grid;
mod output;

use output::Format;

/// Slot-level CSMA/CA, CSMA/ECA and CSMA/E2CA experiments.
#[derive(Debug, Parser)]
#[command(name = "ecasim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single configuration and report slot counts and beacon intervals.
    Simulate {
        #[command(flatten)]
        flags: Flags,
        /// Write one JSON line per slot to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Expected slots to collision-free operation from the absorbing chain,
    /// optionally alongside Monte Carlo estimates (`--runs`).
    Analyze {
        #[command(flatten)]
        flags: Flags,
    },
    /// Slot-class fractions over a protocol x contenders x drop-probability grid.
    Sweep {
        #[command(flatten)]
        flags: Flags,
    },
    /// Per-beacon efficiency with dynamic CW_min when contenders join at once.
    Adapt {
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Protocol name or comma-separated list: ca, ca-beb, eca, e2ca.
    #[arg(long)]
    pub protocol: Option<String>,
    /// Number of contenders: a value, a list (2,4,8) or a range (2-16).
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub cw_min: Option<u32>,
    #[arg(long)]
    pub cw_max: Option<u32>,
    /// Deterministic backoffs per success for e2ca.
    #[arg(long)]
    pub stickiness: Option<u32>,
    /// Loss probability of a lone transmission (list allowed for sweep).
    #[arg(long)]
    pub drop_prob: Option<String>,
    /// Slots per run (slot cap for absorption runs).
    #[arg(long)]
    pub slots: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub beacon_ms: Option<u64>,
    /// Enable beacon-driven CW_min adaptation.
    #[arg(long)]
    pub adapt: bool,
    /// Beacon intervals to run (simulate with --adapt, adapt).
    #[arg(long)]
    pub intervals: Option<u32>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML grid file; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn execute(cli: Cli) -> Result<()> {
    let (flags, doc, trace) = match cli.command {
        Command::Simulate { flags, trace } => {
            let (doc, lines) = commands::simulate(&flags, trace.is_some())?;
            (flags, doc, trace.zip(lines))
        }
        Command::Analyze { flags } => (flags.clone(), commands::analyze(&flags)?, None),
        Command::Sweep { flags } => (flags.clone(), commands::sweep(&flags)?, None),
        Command::Adapt { flags } => (flags.clone(), commands::adapt(&flags)?, None),
    };
    let format = commands::resolve_format(&flags)?;
    let text = doc.render(format)?;
    // Everything is computed before anything is written.
    if let Some((path, bytes)) = trace {
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    }
    match &flags.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
