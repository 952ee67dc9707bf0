use serde::Serialize;

use super::scenario::ScenarioKind;

/// One JSON object per scenario run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub scenario: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub success: bool,
    /// Broken invariants and missed expectations; non-empty means the run
    /// failed.
    pub violations: Vec<String>,
    #[serde(flatten)]
    pub details: Details,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Details {
    Walk(WalkMetrics),
    Push(PushMetrics),
    MovingBall(MovingBallMetrics),
    Jump(JumpMetrics),
    Team(TeamMetrics),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkMetrics {
    pub steps: u64,
    pub max_energy_error: f64,
    /// Largest change of the sampled state between consecutive cycles after
    /// the transient; `None` when the cycle is not a whole number of ticks.
    pub periodicity_error: Option<f64>,
    pub fell: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushRecord {
    pub time: f64,
    pub delta_v: f64,
    pub recovered: bool,
    pub capture_steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushMetrics {
    pub pushes: Vec<PushRecord>,
    pub capture_steps: u32,
    pub fell: bool,
    pub max_recoverable_push: Option<f64>,
    /// Pendulum retraction producing `max_recoverable_push`, when one exists.
    pub max_recoverable_retraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttemptRecord {
    pub launch_speed: f64,
    pub true_arrival: Option<f64>,
    pub kick_start: Option<f64>,
    pub apex: Option<f64>,
    /// Arrival predicted by the estimate that committed the kick.
    pub committed_prediction: Option<f64>,
    pub goal: bool,
    pub infeasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MovingBallMetrics {
    pub attempts: Vec<AttemptRecord>,
    pub goals: u32,
    /// |predicted - true arrival| of the estimates that committed a kick.
    pub committed_arrival_errors: Vec<f64>,
    /// |predicted - true arrival| over every feasible estimate.
    pub estimate_arrival_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpMetrics {
    pub takeoff_velocity: f64,
    pub flight_time: f64,
    pub simulated_flight_time: f64,
    pub apex_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeamMetrics {
    pub ticks: u64,
    pub rounds: u64,
    /// Ticks at which a team's role table did not hold exactly one striker.
    pub striker_violations: u64,
    /// Ticks at which the players' own role views disagreed with a single
    /// striker (message latency and loss).
    pub acting_view_anomalies: u64,
    pub swaps: u64,
    pub rollbacks: u64,
    pub takeovers: u64,
    pub messages_sent: u64,
    pub messages_lost: u64,
    pub goals: [u32; 2],
    /// Rounds until the nearest player became striker after each ball
    /// teleport; `None` when it did not happen within 20 rounds.
    pub teleport_swap_rounds: Vec<Option<u32>>,
    pub role_changes: u64,
}
