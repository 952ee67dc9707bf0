//! Deterministic scenario runner: scenario files, closed-loop trials, and
//! their CSV/JSON artifacts.
//!
//! A run is a pure function of the scenario (including its seed). Batches
//! run scenarios in parallel, each with its own random source and output
//! directory.

mod jump;
mod log;
mod metrics;
mod moving_ball;
mod push;
mod scenario;
mod team_play;
mod walk;
mod walker;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::ball::{BallDetection, BallError};
use crate::behavior::NegotiationError;
use crate::kick::KickError;
use crate::lipm::LipmError;

pub use jump::{flight_time, run_high_jump, takeoff_velocity};
pub use log::{TrajectoryLog, Value};
pub use metrics::{
    AttemptRecord, Details, JumpMetrics, Metrics, MovingBallMetrics, PushMetrics, PushRecord, TeamMetrics, WalkMetrics,
};
pub use moving_ball::{run_moving_ball, RollingBall};
pub use push::{
    configured_delta_v, max_recoverable_push, pendulum_push, push_trial, retraction_for, run_push_recovery,
    PushOutcome, PushSearch,
};
pub use scenario::{
    Crash, Expectations, JumpConfig, KickConfig, MovingBallConfig, PushConfig, RobotConfig, RobotModel, Scenario,
    ScenarioKind, TeamConfig, Teleport, WalkConfig,
};
pub use team_play::{run_team_play, team_play_sim, TraceRecord};
pub use walk::run_walk;
pub use walker::{StepEvent, Walker};

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Invalid scenario; `path` is the dotted field path, empty for syntax
    /// errors.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("pendulum: {0}")]
    Lipm(LipmError),
    #[error("ball: {0}")]
    Ball(#[from] BallError),
    #[error("kick: {0}")]
    Kick(#[from] KickError),
    #[error("negotiation: {0}")]
    Negotiation(#[from] NegotiationError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config { .. })
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: TrajectoryLog,
    pub metrics: Metrics,
    /// Role messages, team play only.
    pub trace: Vec<TraceRecord>,
    /// Ball detections fed to the estimator, moving ball only.
    pub detections: Vec<BallDetection>,
}

impl RunOutput {
    /// Assembles the output and checks the scenario's expectations.
    pub fn new(s: &Scenario, success: bool, mut violations: Vec<String>, details: Details, log: TrajectoryLog) -> Self {
        if let Some(want) = s.expect.success {
            if want != success {
                violations.push(format!("expected success = {want}, got {success}"));
            }
        }
        if let Some(min) = s.expect.min_goals {
            let goals = match &details {
                Details::MovingBall(m) => Some(m.goals),
                Details::Team(m) => Some(m.goals[0]),
                _ => None,
            };
            match goals {
                Some(g) if g < min => violations.push(format!("expected at least {min} goals, got {g}")),
                None => violations.push("min_goals does not apply to this scenario kind".into()),
                _ => {}
            }
        }
        Self {
            log,
            metrics: Metrics {
                scenario: s.name.clone(),
                kind: s.kind,
                seed: s.seed,
                success,
                violations,
                details,
            },
            trace: Vec::new(),
            detections: Vec::new(),
        }
    }

    /// Whether the run counts as passed: no violations and, unless the
    /// scenario states its own expectations, a successful trial.
    pub fn passed(&self, s: &Scenario) -> bool {
        let stated = s.expect.success.is_some() || s.expect.min_goals.is_some();
        self.metrics.violations.is_empty() && (stated || self.metrics.success)
    }

    /// Writes `trajectory.csv`, `metrics.json`, and when present
    /// `trace.jsonl` and `detections.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        self.log
            .write_csv(BufWriter::new(fs::File::create(dir.join("trajectory.csv"))?))?;
        let mut json = serde_json::to_string_pretty(&self.metrics)?;
        json.push('\n');
        fs::write(dir.join("metrics.json"), json)?;
        if !self.trace.is_empty() {
            let mut w = BufWriter::new(fs::File::create(dir.join("trace.jsonl"))?);
            for r in &self.trace {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        if !self.detections.is_empty() {
            let mut w = csv::Writer::from_path(dir.join("detections.csv")).map_err(csv_io)?;
            w.write_record(["t", "x", "y"]).map_err(csv_io)?;
            for d in &self.detections {
                w.write_record([
                    format!("{:.6}", d.t),
                    format!("{:.6}", d.position[0]),
                    format!("{:.6}", d.position[1]),
                ])
                .map_err(csv_io)?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> HarnessError {
    HarnessError::Io(std::io::Error::other(e))
}

/// Runs one scenario on the calling thread.
pub fn run_scenario(s: &Scenario) -> Result<RunOutput, HarnessError> {
    s.validate()?;
    match s.kind {
        ScenarioKind::Walk => run_walk(s),
        ScenarioKind::PushRecovery => run_push_recovery(s),
        ScenarioKind::MovingBall => run_moving_ball(s),
        ScenarioKind::HighJump => run_high_jump(s),
        ScenarioKind::TeamPlay => run_team_play(s),
    }
}

/// Outcome of one scenario file in a batch.
#[derive(Debug)]
pub struct BatchEntry {
    pub file: PathBuf,
    pub result: Result<bool, HarnessError>,
}

/// Runs every `*.toml` file in `dir` (sorted by name), writing each run to
/// `out/<scenario name>/`.
pub fn run_batch(dir: &Path, out: &Path) -> Result<Vec<BatchEntry>, HarnessError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    Ok(files
        .into_par_iter()
        .map(|file| {
            let result = Scenario::from_file(&file).and_then(|s| {
                let output = run_scenario(&s)?;
                output.write_outputs(&out.join(&s.name))?;
                Ok(output.passed(&s))
            });
            BatchEntry { file, result }
        })
        .collect())
}

/// Aggregates the `metrics.json` files below `out_dir`: writes a flat
/// `summary.csv` (one row per run, every numeric or boolean top-level
/// metric as a column) and returns a JSON summary with per-kind counts.
pub fn report(out_dir: &Path) -> Result<serde_json::Value, HarnessError> {
    use serde_json::{json, Map, Value as J};

    let mut runs: Vec<Map<String, J>> = Vec::new();
    let mut dirs: Vec<PathBuf> = fs::read_dir(out_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("metrics.json").is_file())
        .collect();
    dirs.sort();
    for d in dirs {
        let text = fs::read_to_string(d.join("metrics.json"))?;
        if let J::Object(m) = serde_json::from_str(&text)? {
            runs.push(m);
        }
    }

    let mut columns: Vec<String> = vec!["scenario".into(), "kind".into(), "seed".into(), "success".into()];
    for m in &runs {
        for (k, v) in m {
            if (v.is_number() || v.is_boolean()) && !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_path(out_dir.join("summary.csv")).map_err(csv_io)?;
    w.write_record(&columns).map_err(csv_io)?;
    for m in &runs {
        let row: Vec<String> = columns
            .iter()
            .map(|c| match m.get(c) {
                Some(J::String(s)) => s.clone(),
                Some(J::Number(n)) => match n.as_f64() {
                    Some(x) if n.is_f64() => format!("{x:.6}"),
                    _ => n.to_string(),
                },
                Some(J::Bool(b)) => b.to_string(),
                _ => String::new(),
            })
            .collect();
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;

    let mut by_kind: Map<String, J> = Map::new();
    for m in &runs {
        let kind = m.get("kind").and_then(J::as_str).unwrap_or("unknown").to_string();
        let ok = m.get("success").and_then(J::as_bool).unwrap_or(false);
        let entry = by_kind
            .entry(kind)
            .or_insert_with(|| json!({"runs": 0, "successes": 0}));
        entry["runs"] = json!(entry["runs"].as_u64().unwrap_or(0) + 1);
        entry["successes"] = json!(entry["successes"].as_u64().unwrap_or(0) + ok as u64);
    }
    let passed = runs
        .iter()
        .filter(|m| m.get("violations").and_then(J::as_array).is_some_and(|v| v.is_empty()))
        .count();
    let summary = json!({
        "runs": runs.len(),
        "without_violations": passed,
        "by_kind": by_kind,
    });
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(out_dir.join("report.json"), text)?;
    Ok(summary)
}
