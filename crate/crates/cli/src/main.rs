//! `pdflow` experiment runner.
//!
//! Exit codes: 0 when every enabled check passes, 1 on numerical failure or a
//! failed check, 2 on config errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pdflow::experiment::{self, ExperimentConfig, Outcome};
use pdflow::Error;

#[derive(Parser)]
#[command(name = "pdflow", version, about = "Accelerated primal-dual flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed, overriding `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(out) = &self.out {
            cfg.output.dir = Some(out.clone());
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a built-in experiment.
    Preset {
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the alpha sweep described by a JSON config.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List the built-in experiments.
    ListPresets,
}

fn report(outcome: &Outcome) -> ExitCode {
    let dir = match outcome {
        Outcome::Run(r) => &r.dir,
        Outcome::Sweep(s) => &s.dir,
    };
    for c in outcome.checks() {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        match c.observed {
            Some(v) => println!("{mark}  {}  (observed {v:.6e})", c.name),
            None => println!("{mark}  {}  ({})", c.name, c.detail),
        }
    }
    println!("artifacts written to {}", dir.display());
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::ListPresets => {
            for p in experiment::list_presets() {
                println!("{:<18}{}", p.name, p.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, overrides } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            overrides.apply(&mut cfg);
            Ok(report(&experiment::execute(&cfg)?))
        }
        Command::Preset { name, overrides } => {
            let mut cfg = experiment::preset(&name)?;
            overrides.apply(&mut cfg);
            Ok(report(&experiment::execute(&cfg)?))
        }
        Command::Sweep { config, overrides } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            overrides.apply(&mut cfg);
            Ok(report(&Outcome::Sweep(experiment::execute_sweep(&cfg)?)))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
