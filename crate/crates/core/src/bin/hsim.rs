use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use humanoid_soccer::harness::{report, run_batch, run_scenario, HarnessError, Scenario};

/// Runs humanoid soccer simulation scenarios.
#[derive(Parser)]
#[command(name = "hsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        scenario: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory [default: out/<scenario name>].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every *.toml scenario in a directory.
    Batch {
        dir: PathBuf,
        /// Output root [default: <dir>/out].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate the metrics of a batch output directory.
    Report { out_dir: PathBuf },
}

const FAILED: u8 = 1;
const CONFIG: u8 = 2;

fn error_code(e: &HarnessError) -> u8 {
    if e.is_config() {
        CONFIG
    } else {
        FAILED
    }
}

fn run(file: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<bool, HarnessError> {
    let mut scenario = Scenario::from_file(file)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let output = run_scenario(&scenario)?;
    let dir = out.unwrap_or_else(|| Path::new("out").join(&scenario.name));
    output.write_outputs(&dir)?;
    let passed = output.passed(&scenario);
    println!(
        "{} {} (success={}) -> {}",
        if passed { "PASS" } else { "FAIL" },
        scenario.name,
        output.metrics.success,
        dir.display()
    );
    for v in &output.metrics.violations {
        println!("  violation: {v}");
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, seed, out } => match run(&scenario, seed, out) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(FAILED),
            Err(e) => {
                eprintln!("{}: {e}", scenario.display());
                ExitCode::from(error_code(&e))
            }
        },
        Command::Batch { dir, out } => {
            let out = out.unwrap_or_else(|| dir.join("out"));
            let entries = match run_batch(&dir, &out) {
                Ok(entries) => entries,
                Err(e) => {
                    eprintln!("{}: {e}", dir.display());
                    return ExitCode::from(CONFIG);
                }
            };
            let mut code = 0;
            for entry in &entries {
                match &entry.result {
                    Ok(passed) => {
                        println!("{} {}", if *passed { "PASS" } else { "FAIL" }, entry.file.display());
                        if !passed {
                            code = code.max(FAILED);
                        }
                    }
                    Err(e) => {
                        println!("ERROR {}: {e}", entry.file.display());
                        code = code.max(error_code(e));
                    }
                }
            }
            ExitCode::from(code)
        }
        Command::Report { out_dir } => match report(&out_dir) {
            Ok(summary) => {
                println!("{}", serde_json::to_string_pretty(&summary).expect("json value"));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", out_dir.display());
                ExitCode::from(CONFIG)
            }
        },
    }
}
