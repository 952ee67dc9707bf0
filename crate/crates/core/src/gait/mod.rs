//! Open-loop central pattern generated walking.
//!
//! A single gait phase `mu` in `(-pi, pi]` drives both legs; one wrap is one
//! full cycle (a left and a right step). The left leg swings while
//! `mu` is in `[delta, pi - delta]`, the right leg half a cycle later, where
//! `delta` is half of the double-support share of a half cycle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod feedback;
mod kinematics;

pub use feedback::{apply_feedback, FeedbackController, FeedbackGains, Pid, TiltError};
pub use kinematics::{
    abstract_to_cartesian, cartesian_to_abstract, cartesian_to_joint, forward_kinematics, FootPose, JointAngles,
    JointLimits, LegLinks,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaitError {
    #[error("invalid gait parameters: {0}")]
    InvalidParams(&'static str),
    #[error("target {distance:.4} m from the hip is outside the leg workspace")]
    OutOfWorkspace { distance: f64 },
    #[error("joint {joint} = {value:.4} rad violates its limits")]
    JointLimit { joint: &'static str, value: f64 },
    #[error("leg extension {0} outside [0, 1]")]
    InvalidExtension(f64),
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let r = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        PI
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leg {
    Left,
    Right,
}

impl Leg {
    pub fn other(self) -> Leg {
        match self {
            Leg::Left => Leg::Right,
            Leg::Right => Leg::Left,
        }
    }

    /// Lateral side of the leg, +1 for left.
    pub fn side(self) -> f64 {
        match self {
            Leg::Left => 1.0,
            Leg::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GaitPhase(f64);

impl GaitPhase {
    pub fn new(mu: f64) -> Self {
        Self(wrap_angle(mu))
    }

    pub fn mu(self) -> f64 {
        self.0
    }

    /// Phase seen by one leg; the right leg lags the left by half a cycle.
    pub fn leg_phase(self, leg: Leg) -> f64 {
        match leg {
            Leg::Left => self.0,
            Leg::Right => wrap_angle(self.0 + PI),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaitParams {
    /// Full cycles per second.
    pub frequency: f64,
    /// Leg shortening at mid swing, in normalized extension units.
    pub step_height: f64,
    /// Share of each half cycle spent in double support.
    pub double_support_ratio: f64,
    pub swing_amplitude: f64,
    /// Extension of a supporting leg.
    pub support_extension: f64,
    pub lean_gain_vel: f64,
    pub lean_gain_acc: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        Self {
            frequency: 1.25,
            step_height: 0.08,
            double_support_ratio: 0.1,
            swing_amplitude: 0.1,
            support_extension: 0.95,
            lean_gain_vel: 0.1,
            lean_gain_acc: 0.02,
        }
    }
}

impl GaitParams {
    pub fn validate(&self) -> Result<(), GaitError> {
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(GaitError::InvalidParams("frequency must be positive"));
        }
        if !(0.0..0.5).contains(&self.double_support_ratio) {
            return Err(GaitError::InvalidParams("double_support_ratio must be in [0, 0.5)"));
        }
        if !(0.0..=1.0).contains(&self.support_extension) {
            return Err(GaitError::InvalidParams("support_extension must be in [0, 1]"));
        }
        let finite = [
            self.step_height,
            self.swing_amplitude,
            self.lean_gain_vel,
            self.lean_gain_acc,
        ];
        if finite.iter().any(|v| !v.is_finite()) || self.step_height < 0.0 {
            return Err(GaitError::InvalidParams("amplitudes and gains must be finite"));
        }
        Ok(())
    }

    /// Half of the double-support phase span, in radians of gait phase.
    pub fn double_support_half_width(&self) -> f64 {
        0.5 * self.double_support_ratio * PI
    }

    /// Duration of one step (half a cycle).
    pub fn step_duration(&self) -> f64 {
        0.5 / self.frequency
    }

    /// Duration of the single-support part of a step.
    pub fn swing_duration(&self) -> f64 {
        (PI - 2.0 * self.double_support_half_width()) / (2.0 * PI * self.frequency)
    }
}

pub fn advance_phase(phase: GaitPhase, params: &GaitParams, dt: f64) -> GaitPhase {
    GaitPhase::new(phase.0 + 2.0 * PI * params.frequency * dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AbstractPose {
    pub leg_angle_sagittal: f64,
    pub leg_angle_lateral: f64,
    /// 1 is a fully extended leg, 0 fully retracted.
    pub leg_extension: f64,
    pub foot_angle: f64,
    pub arm_angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LegPair {
    pub left: AbstractPose,
    pub right: AbstractPose,
}

impl LegPair {
    pub fn get(&self, leg: Leg) -> &AbstractPose {
        match leg {
            Leg::Left => &self.left,
            Leg::Right => &self.right,
        }
    }

    pub fn get_mut(&mut self, leg: Leg) -> &mut AbstractPose {
        match leg {
            Leg::Left => &mut self.left,
            Leg::Right => &mut self.right,
        }
    }

    fn map(mut self, mut f: impl FnMut(Leg, &mut AbstractPose)) -> Self {
        f(Leg::Left, &mut self.left);
        f(Leg::Right, &mut self.right);
        self
    }
}

/// Where a leg is within its own cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
enum LegStage {
    /// Progress through the swing, 0 at lift-off and 1 at touchdown.
    Swing(f64),
    /// Progress through support, 0 at touchdown and 1 at lift-off.
    Support(f64),
}

fn leg_stage(theta: f64, params: &GaitParams) -> LegStage {
    let delta = params.double_support_half_width();
    if (delta..=PI - delta).contains(&theta) {
        LegStage::Swing((theta - delta) / (PI - 2.0 * delta))
    } else {
        let since = (theta - (PI - delta)).rem_euclid(2.0 * PI);
        LegStage::Support(since / (PI + 2.0 * delta))
    }
}

fn leg_pose(theta: f64, params: &GaitParams) -> AbstractPose {
    let (swing, extension) = match leg_stage(theta, params) {
        LegStage::Swing(s) => (
            -(PI * s).cos(),
            (params.support_extension - params.step_height * (PI * s).sin()).clamp(0.0, 1.0),
        ),
        LegStage::Support(u) => ((PI * u).cos(), params.support_extension),
    };
    let leg_angle = params.swing_amplitude * swing;
    AbstractPose {
        leg_angle_sagittal: leg_angle,
        leg_angle_lateral: 0.0,
        leg_extension: extension,
        foot_angle: 0.0,
        arm_angle: -0.5 * leg_angle,
    }
}

/// Open-loop abstract leg poses for both legs at the given phase.
pub fn cpg_waveform(phase: GaitPhase, params: &GaitParams) -> LegPair {
    LegPair {
        left: leg_pose(phase.leg_phase(Leg::Left), params),
        right: leg_pose(phase.leg_phase(Leg::Right), params),
    }
}

/// Support coefficients `(left, right)`; 1 for a fully loaded leg, ramping
/// linearly through double support, always summing to 1.
pub fn support_coefficient(phase: GaitPhase, params: &GaitParams) -> (f64, f64) {
    let left = leg_support(phase.leg_phase(Leg::Left), params);
    (left, 1.0 - left)
}

fn leg_support(theta: f64, params: &GaitParams) -> f64 {
    let delta = params.double_support_half_width();
    if theta.abs() <= delta && delta > 0.0 {
        return (delta - theta) / (2.0 * delta);
    }
    let from_touchdown = wrap_angle(theta - PI);
    if from_touchdown.abs() <= delta && delta > 0.0 {
        return (from_touchdown + delta) / (2.0 * delta);
    }
    match leg_stage(theta, params) {
        LegStage::Swing(_) => 0.0,
        LegStage::Support(_) => 1.0,
    }
}

/// Leg currently bearing the body in single support, `None` in double
/// support.
pub fn support_leg(phase: GaitPhase, params: &GaitParams) -> Option<Leg> {
    match support_coefficient(phase, params) {
        (l, _) if l >= 1.0 => Some(Leg::Left),
        (_, r) if r >= 1.0 => Some(Leg::Right),
        _ => None,
    }
}

/// Start and end times of the swing of `leg` that is in progress at `now`,
/// or of the next one. The window runs from the end of one double-support
/// transition to the start of the next.
pub fn swing_window(phase: GaitPhase, params: &GaitParams, leg: Leg, now: f64) -> (f64, f64) {
    let delta = params.double_support_half_width();
    let rate = 2.0 * PI * params.frequency;
    let theta = phase.leg_phase(leg);
    let start = if (delta..=PI - delta).contains(&theta) {
        now - (theta - delta) / rate
    } else {
        now + (delta - theta).rem_euclid(2.0 * PI) / rate
    };
    (start, start + params.swing_duration())
}

/// Velocity- and acceleration-based forward lean added to both sagittal leg
/// angles.
pub fn lean(poses: LegPair, cmd_vel: f64, cmd_acc: f64, params: &GaitParams) -> LegPair {
    let offset = params.lean_gain_vel * cmd_vel + params.lean_gain_acc * cmd_acc;
    poses.map(|_, p| p.leg_angle_sagittal += offset)
}
