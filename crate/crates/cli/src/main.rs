use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pivotcost::commands;
use pivotcost::config::{Flags, RunConfig};

#[derive(Parser)]
#[command(name = "pivotcost", version, about = "Combine learned operator costs with optimizer estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Synthesize executed plans from ground-truth operator costs.
    Generate,
    /// Ingest plans into feedback and fit per-kind models.
    Train,
    /// Combined cost of each plan.
    Estimate,
    /// Correlation statistics, bounds and curve data.
    Analyze,
    /// Simulated index tuning with both estimators.
    Tune,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Train => "train",
            Command::Estimate => "estimate",
            Command::Analyze => "analyze",
            Command::Tune => "tune",
        }
    }
}

fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    match cli.command {
        Command::Generate => commands::generate(&cfg, out),
        Command::Train => commands::train(&cfg, out),
        Command::Estimate => commands::estimate(&cfg, out),
        Command::Analyze => commands::analyze(&cfg, out),
        Command::Tune => commands::tune(&cfg, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({
                "status": "error",
                "command": cli.command.name(),
                "error": format!("{e:#}"),
            });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
