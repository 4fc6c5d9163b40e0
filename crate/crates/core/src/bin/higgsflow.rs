use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use higgsflow::harness::{self, Command, RunConfig, RunError};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Residual of every identity at each scenario's metric.
    Verify,
    /// Functionals of each scenario as CSV.
    Evaluate,
    /// Descent of J from each scenario's metric.
    Flow,
    /// Analytic against difference-quotient first variation.
    Variation,
    /// `evaluate` over scenarios × seeds, in parallel.
    Sweep,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Verify => Command::Verify,
            Cmd::Evaluate => Command::Evaluate,
            Cmd::Flow => Command::Flow,
            Cmd::Variation => Command::Variation,
            Cmd::Sweep => Command::Sweep,
        }
    }
}

/// Hitchin–Simpson curvature and Kobayashi functional on flat tori.
#[derive(Debug, Parser)]
#[command(name = "higgsflow", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides HIGGSFLOW_OUT_DIR and the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("higgsflow: {}", RunError::Input(e));
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cfg.output_dir(cli.out.as_deref());
    match harness::run(cli.command.into(), &cfg, &out) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("higgsflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
