use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qmlint::experiment::{
    run_compare, run_convergence, run_cost, run_suites, write_compare, write_cost, write_rows, ExperimentConfig, ExperimentError,
    ValidateOptions,
};
use qmlint::mean::Mode;

#[derive(Parser)]
#[command(name = "qmlint", version, about = "Quantum query model simulator and multilevel integration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every invariant suite and print a pass/fail table.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Median error against budget, with a log-log slope fit.
    Convergence(RunArgs),
    /// Deterministic, Monte Carlo and quantum errors side by side.
    Compare(RunArgs),
    /// Qubits, queries and measurements per level.
    Cost(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    Codec,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// CSV output; a `.dat` companion is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Statevec,
    Semantic,
}

impl RunArgs {
    fn config(&self, command: &str) -> Result<(ExperimentConfig, PathBuf), ExperimentError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(mode) = self.mode {
            cfg.mode = match mode {
                ModeArg::Statevec => Mode::Statevec,
                ModeArg::Semantic => Mode::Semantic,
            };
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(format!("{command}.csv")));
        Ok((cfg, out))
    }
}

fn validate(seed: u64, fault: Option<Fault>) -> ExitCode {
    let opts = ValidateOptions { seed, codec_fault: matches!(fault, Some(Fault::Codec)) };
    let outcomes = run_suites(&opts);
    println!("{:<22} {:<6} {:>8}  detail", "suite", "result", "ms");
    for o in &outcomes {
        println!("{:<22} {:<6} {:>8}  {}", o.name, if o.passed { "PASS" } else { "FAIL" }, o.millis, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} suites passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(command: Command) -> Result<ExitCode, ExperimentError> {
    match command {
        Command::Validate { seed, inject_fault } => Ok(validate(seed, inject_fault)),
        Command::Convergence(args) => {
            let (cfg, out) = args.config("convergence")?;
            let report = run_convergence(&cfg)?;
            write_rows(&out, &report.rows, &report.points)?;
            println!("{report}");
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare(args) => {
            let (cfg, out) = args.config("compare")?;
            let report = run_compare(&cfg)?;
            write_compare(&out, &report)?;
            println!("{report}");
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Cost(args) => {
            let (cfg, out) = args.config("cost")?;
            let report = run_cost(&cfg)?;
            write_cost(&out, &report)?;
            println!("{report}");
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
