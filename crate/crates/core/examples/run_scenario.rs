//! Runs a scenario file through the library and prints its metrics.
//!
//!     cargo run --example run_scenario -- scenarios/walk.toml

use std::path::PathBuf;

use humanoid_soccer::harness::{run_scenario, HarnessError, Scenario};

fn main() -> Result<(), HarnessError> {
    let path: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/walk.toml"));
    let scenario = Scenario::from_file(&path)?;
    let output = run_scenario(&scenario)?;
    println!("{}", serde_json::to_string_pretty(&output.metrics)?);
    println!("{} log rows, passed: {}", output.log.len(), output.passed(&scenario));
    Ok(())
}
