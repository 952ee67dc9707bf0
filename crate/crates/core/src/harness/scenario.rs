//! Scenario files (TOML). Every table rejects unknown keys; errors carry the
//! dotted path of the offending field.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::behavior::{AvoidanceConfig, GameMode, SkillConfig};
use crate::gait::{FeedbackGains, GaitParams};
use crate::lipm::{PendulumParams, StepLimits, DEFAULT_GRAVITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Walk,
    PushRecovery,
    MovingBall,
    HighJump,
    TeamPlay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobotModel {
    #[default]
    Op2,
    Op2x,
}

impl RobotModel {
    /// Robot mass in kg.
    pub fn mass(self) -> f64 {
        match self {
            RobotModel::Op2 => 17.5,
            RobotModel::Op2x => 19.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotConfig {
    pub model: RobotModel,
    pub com_height: f64,
    pub gravity: f64,
    /// Overrides the model's mass.
    pub mass: Option<f64>,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self {
            model: RobotModel::Op2,
            com_height: 0.75,
            gravity: DEFAULT_GRAVITY,
            mass: None,
        }
    }
}

impl RobotConfig {
    pub fn pendulum(&self) -> PendulumParams {
        PendulumParams {
            com_height: self.com_height,
            gravity: self.gravity,
            mass: self.mass.unwrap_or(self.model.mass()),
        }
    }
}

/// Closed-loop walking and balance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkConfig {
    /// Nominal sagittal step length; 0 walks on the spot.
    pub step_length: f64,
    /// Lateral CoM offset from the stance foot at support exchange.
    pub lateral_offset: f64,
    pub max_step_length: f64,
    pub min_step_duration: f64,
    pub max_step_duration: f64,
    /// Delay between a disturbance and the earliest footstep reacting to it.
    pub reaction_latency: f64,
    /// CoM offset from the stance foot counted as a fall when moving away
    /// from it.
    pub fall_offset: f64,
    /// Steps allowed to bring the energy back into band after a push.
    pub max_recovery_steps: u32,
}

impl Default for WalkConfig {
    fn default() -> Self {
        let limits = StepLimits::default();
        Self {
            step_length: 0.0,
            lateral_offset: 0.08,
            max_step_length: limits.max_step_length,
            min_step_duration: limits.min_step_duration,
            max_step_duration: limits.max_step_duration,
            reaction_latency: 0.05,
            fall_offset: 0.6,
            max_recovery_steps: 4,
        }
    }
}

impl WalkConfig {
    pub fn limits(&self) -> StepLimits {
        StepLimits {
            max_step_length: self.max_step_length,
            min_step_duration: self.min_step_duration,
            max_step_duration: self.max_step_duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PushConfig {
    /// Horizontal draw-back of the pendulum bob (m).
    pub retraction: f64,
    /// Direct CoM velocity change; overrides `retraction` when set (m/s).
    pub delta_v: Option<f64>,
    pub pendulum_mass: f64,
    pub pendulum_length: f64,
    /// Share of the pendulum momentum transferred to the robot.
    pub transfer: f64,
    pub count: u32,
    /// Minimum spacing between pushes (s).
    pub min_interval: f64,
    /// Extra random spacing on top of `min_interval` (s).
    pub interval_jitter: f64,
    /// Time allowed after the last push before the trial ends (s).
    pub settle_time: f64,
    /// Also search the largest recoverable push.
    pub find_max: bool,
    pub search_tolerance: f64,
}

impl Default for PushConfig {
    fn default() -> Self {
        Self {
            retraction: 0.3,
            delta_v: None,
            pendulum_mass: 5.0,
            pendulum_length: 2.0,
            transfer: 0.8,
            count: 3,
            min_interval: 2.0,
            interval_jitter: 1.0,
            settle_time: 2.5,
            find_max: false,
            search_tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KickConfig {
    pub duration: f64,
    pub amplitude: f64,
    pub sigma: f64,
    pub lead_guard: f64,
    pub trail_guard: f64,
}

impl Default for KickConfig {
    fn default() -> Self {
        Self {
            duration: 0.35,
            amplitude: 0.35,
            sigma: 0.25,
            lead_guard: 0.05,
            trail_guard: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MovingBallConfig {
    pub attempts: u32,
    /// Initial distance of the ball along the approach axis (m).
    pub launch_distance: f64,
    pub launch_speed: f64,
    /// Relative uniform spread of the launch speed per attempt.
    pub speed_jitter: f64,
    pub deceleration: f64,
    /// Detection interval (s).
    pub epsilon: f64,
    /// Standard deviation of the detection noise per axis (m).
    pub noise: f64,
    pub foot_line: f64,
    /// Largest apex-to-arrival error that still hits the ball (s).
    pub contact_tolerance: f64,
    pub gait_frequency: f64,
    /// Allowed relative change of the gait frequency for timing the kick.
    pub retime_range: f64,
    pub max_attempt_time: f64,
}

impl Default for MovingBallConfig {
    fn default() -> Self {
        Self {
            attempts: 3,
            launch_distance: 2.0,
            launch_speed: 1.5,
            speed_jitter: 0.1,
            deceleration: 0.3,
            epsilon: 0.1,
            noise: 0.0,
            foot_line: 0.2,
            contact_tolerance: 0.1,
            gait_frequency: 0.5,
            retime_range: 0.4,
            max_attempt_time: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JumpConfig {
    /// Vertical takeoff velocity (m/s); derived from `flight_time` when unset.
    pub takeoff_velocity: Option<f64>,
    pub flight_time: f64,
}

impl Default for JumpConfig {
    fn default() -> Self {
        Self {
            takeoff_velocity: None,
            flight_time: 0.262,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Teleport {
    pub time: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Crash {
    pub player: u32,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TeamConfig {
    pub players_per_team: u32,
    pub mode: GameMode,
    /// Probability that a role message is dropped.
    pub loss: f64,
    /// Ticks between negotiation rounds.
    pub negotiation_period: u32,
    pub hysteresis: f64,
    pub retries: u32,
    pub heartbeat_timeout: f64,
    pub kick_speed: f64,
    pub ball_deceleration: f64,
    /// Standard deviation of the kick direction (rad).
    pub kick_spread: f64,
    pub teleports: Vec<Teleport>,
    pub crashes: Vec<Crash>,
    pub skills: SkillConfig,
    pub avoidance: AvoidanceConfig,
}

impl Default for TeamConfig {
    fn default() -> Self {
        Self {
            players_per_team: 2,
            mode: GameMode::Tournament,
            loss: 0.0,
            negotiation_period: 10,
            hysteresis: 0.5,
            retries: 3,
            heartbeat_timeout: 2.0,
            kick_speed: 3.0,
            ball_deceleration: 0.3,
            kick_spread: 0.1,
            teleports: Vec::new(),
            crashes: Vec::new(),
            skills: SkillConfig::default(),
            avoidance: AvoidanceConfig::default(),
        }
    }
}

/// Conditions checked after a run; a miss is reported as a scenario failure.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Expectations {
    pub success: Option<bool>,
    pub min_goals: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_tick")]
    pub tick: f64,
    #[serde(default)]
    pub robot: RobotConfig,
    #[serde(default)]
    pub gait: GaitParams,
    #[serde(default)]
    pub feedback: FeedbackGains,
    #[serde(default)]
    pub walk: WalkConfig,
    #[serde(default)]
    pub push: PushConfig,
    #[serde(default)]
    pub kick: KickConfig,
    #[serde(default)]
    pub moving_ball: MovingBallConfig,
    #[serde(default)]
    pub jump: JumpConfig,
    #[serde(default)]
    pub team: TeamConfig,
    #[serde(default)]
    pub expect: Expectations,
}

fn default_duration() -> f64 {
    10.0
}

fn default_tick() -> f64 {
    0.01
}

fn config_error(path: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn positive(path: &str, v: f64) -> Result<(), HarnessError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(config_error(path, format!("must be positive, got {v}")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<(), HarnessError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(config_error(path, format!("must be non-negative, got {v}")))
    }
}

impl Scenario {
    /// A scenario of the given kind with every option at its default.
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            name: String::new(),
            kind,
            seed: 0,
            duration: default_duration(),
            tick: default_tick(),
            robot: RobotConfig::default(),
            gait: GaitParams::default(),
            feedback: FeedbackGains::default(),
            walk: WalkConfig::default(),
            push: PushConfig::default(),
            kick: KickConfig::default(),
            moving_ball: MovingBallConfig::default(),
            jump: JumpConfig::default(),
            team: TeamConfig::default(),
            expect: Expectations::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_error("", e.message().to_string()))?;
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(&path, e.into_inner().message().to_string())
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Loads a scenario file; an empty name defaults to the file stem.
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let mut scenario = Self::from_toml(&text)?;
        if scenario.name.is_empty() {
            scenario.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        positive("duration", self.duration)?;
        positive("tick", self.tick)?;
        positive("robot.com_height", self.robot.com_height)?;
        positive("robot.gravity", self.robot.gravity)?;
        if let Some(m) = self.robot.mass {
            positive("robot.mass", m)?;
        }
        // frequency 0 is a standing robot, accepted for walking and pushes
        non_negative("gait.frequency", self.gait.frequency)?;
        if self.gait.frequency > 0.0 {
            self.gait.validate().map_err(|e| config_error("gait", e.to_string()))?;
        }
        if !self.feedback.is_valid() {
            return Err(config_error("feedback", "gains must be finite and non-negative"));
        }
        let w = &self.walk;
        non_negative("walk.step_length", w.step_length)?;
        non_negative("walk.lateral_offset", w.lateral_offset)?;
        w.limits().validate().map_err(|e| config_error("walk", e.to_string()))?;
        non_negative("walk.reaction_latency", w.reaction_latency)?;
        positive("walk.fall_offset", w.fall_offset)?;
        let p = &self.push;
        non_negative("push.retraction", p.retraction)?;
        if p.retraction > p.pendulum_length {
            return Err(config_error("push.retraction", "cannot exceed the pendulum length"));
        }
        if let Some(dv) = p.delta_v {
            non_negative("push.delta_v", dv)?;
        }
        positive("push.pendulum_mass", p.pendulum_mass)?;
        positive("push.pendulum_length", p.pendulum_length)?;
        if !(p.transfer > 0.0 && p.transfer <= 1.0) {
            return Err(config_error("push.transfer", "must be in (0, 1]"));
        }
        non_negative("push.min_interval", p.min_interval)?;
        non_negative("push.interval_jitter", p.interval_jitter)?;
        non_negative("push.settle_time", p.settle_time)?;
        positive("push.search_tolerance", p.search_tolerance)?;
        let k = &self.kick;
        positive("kick.duration", k.duration)?;
        non_negative("kick.amplitude", k.amplitude)?;
        if !(k.sigma > 0.0 && k.sigma <= crate::kick::MAX_SIGMA) {
            return Err(config_error("kick.sigma", "must be in (0, 0.5]"));
        }
        non_negative("kick.lead_guard", k.lead_guard)?;
        non_negative("kick.trail_guard", k.trail_guard)?;
        let b = &self.moving_ball;
        positive("moving_ball.launch_distance", b.launch_distance)?;
        non_negative("moving_ball.launch_speed", b.launch_speed)?;
        if !(0.0..1.0).contains(&b.speed_jitter) {
            return Err(config_error("moving_ball.speed_jitter", "must be in [0, 1)"));
        }
        non_negative("moving_ball.deceleration", b.deceleration)?;
        positive("moving_ball.epsilon", b.epsilon)?;
        non_negative("moving_ball.noise", b.noise)?;
        non_negative("moving_ball.contact_tolerance", b.contact_tolerance)?;
        positive("moving_ball.gait_frequency", b.gait_frequency)?;
        if !(0.0..1.0).contains(&b.retime_range) {
            return Err(config_error("moving_ball.retime_range", "must be in [0, 1)"));
        }
        positive("moving_ball.max_attempt_time", b.max_attempt_time)?;
        if let Some(v) = self.jump.takeoff_velocity {
            non_negative("jump.takeoff_velocity", v)?;
        }
        non_negative("jump.flight_time", self.jump.flight_time)?;
        let t = &self.team;
        if t.players_per_team == 0 {
            return Err(config_error("team.players_per_team", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&t.loss) {
            return Err(config_error("team.loss", "must be in [0, 1]"));
        }
        if t.negotiation_period == 0 {
            return Err(config_error("team.negotiation_period", "must be at least 1"));
        }
        non_negative("team.hysteresis", t.hysteresis)?;
        positive("team.heartbeat_timeout", t.heartbeat_timeout)?;
        non_negative("team.kick_speed", t.kick_speed)?;
        non_negative("team.ball_deceleration", t.ball_deceleration)?;
        non_negative("team.kick_spread", t.kick_spread)?;
        positive("team.avoidance.radius", t.avoidance.radius)?;
        Ok(())
    }
}
