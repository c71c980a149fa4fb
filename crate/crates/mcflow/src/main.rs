use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mcflow::config::RunConfig;
use mcflow::{pipeline, verify};

/// Level-set mean curvature flow and arrival-time singularity analysis.
#[derive(Parser)]
#[command(name = "mcflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Configuration file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set grid.n=128 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampling seed (overrides seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

impl CommonOpts {
    fn resolve(&self) -> mcflow::Result<RunConfig> {
        let mut cfg = RunConfig::resolve(self.config.as_deref(), &self.sets)?;
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.analyzer.seed = seed;
        }
        cfg.quiet = self.quiet;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario, extract the arrival time, and analyze it.
    Run {
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Analyze a stored arrival field (MCAF with the arrival flag).
    Analyze {
        /// Path to the MCAF field.
        field: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Dump a stored field as CSV and a PGM heatmap.
    Export {
        /// Path to the MCAF field.
        field: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Run the acceptance criteria end to end.
    Verify {
        #[command(flatten)]
        opts: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run { opts } => match opts.resolve() {
            Ok(cfg) => pipeline::cmd_run(&cfg),
            Err(e) => {
                eprintln!("config: {e}");
                e.exit_code()
            }
        },
        Command::Analyze { field, opts } => match opts.resolve() {
            Ok(cfg) => pipeline::cmd_analyze(field, &cfg),
            Err(e) => {
                eprintln!("config: {e}");
                e.exit_code()
            }
        },
        Command::Export { field, opts } => {
            let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            pipeline::cmd_export(field, &dir, opts.quiet)
        }
        Command::Verify { opts } => verify::cmd_verify(opts.quiet),
    };
    ExitCode::from(code.clamp(0, 255) as u8)
}
