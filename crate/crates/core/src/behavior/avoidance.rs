//! Potential-field collision avoidance on walking commands.

use serde::{Deserialize, Serialize};

use super::MotionCommand;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AvoidanceConfig {
    /// Obstacles farther than this are ignored (m).
    pub radius: f64,
    pub gain: f64,
}

impl Default for AvoidanceConfig {
    fn default() -> Self {
        Self { radius: 0.8, gain: 0.5 }
    }
}

/// Bends `cmd` away from nearby obstacles given relative to the robot in the
/// command's frame. Only obstacles in the walking direction repel; each one
/// pushes back along the line to the obstacle and sideways around it, with a
/// strength growing as `1/d - 1/radius`. The result is never faster than the
/// input.
pub fn collision_avoidance(cmd: MotionCommand, obstacles: &[[f64; 2]], cfg: &AvoidanceConfig) -> MotionCommand {
    let speed = cmd.speed();
    if speed == 0.0 {
        return cmd;
    }
    let dir = [cmd.velocity[0] / speed, cmd.velocity[1] / speed];
    let mut v = cmd.velocity;
    let mut touched = false;
    for o in obstacles {
        let d = o[0].hypot(o[1]);
        if d >= cfg.radius || d == 0.0 {
            continue;
        }
        let n = [o[0] / d, o[1] / d];
        let ahead = n[0] * dir[0] + n[1] * dir[1];
        if ahead <= 0.0 {
            continue;
        }
        // pass on the side the command already leans to, left when dead ahead
        let cross = n[0] * dir[1] - n[1] * dir[0];
        let side = if cross < 0.0 { -1.0 } else { 1.0 };
        let tangent = [-n[1] * side, n[0] * side];
        let w = (cfg.gain * (1.0 / d - 1.0 / cfg.radius)).min(2.0) * speed * ahead;
        v[0] += w * (tangent[0] - n[0]);
        v[1] += w * (tangent[1] - n[1]);
        touched = true;
    }
    if !touched {
        return cmd;
    }
    let norm = v[0].hypot(v[1]);
    if norm > speed {
        v = [v[0] * speed / norm, v[1] * speed / norm];
    }
    MotionCommand {
        velocity: v,
        turn_rate: cmd.turn_rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forward(speed: f64) -> MotionCommand {
        MotionCommand {
            velocity: [speed, 0.0],
            turn_rate: 0.1,
        }
    }

    #[test]
    fn no_obstacles_is_identity() {
        assert_eq!(
            collision_avoidance(forward(0.4), &[], &AvoidanceConfig::default()),
            forward(0.4)
        );
    }

    #[test]
    fn obstacle_ahead_deflects() {
        let out = collision_avoidance(forward(0.4), &[[0.3, 0.0]], &AvoidanceConfig::default());
        assert!(out.velocity[0] < 0.4);
        assert!(out.velocity[1] != 0.0);
        assert!(out.speed() <= 0.4 + 1e-12);
        assert_eq!(out.turn_rate, 0.1);
    }

    #[test]
    fn obstacle_behind_is_ignored() {
        let out = collision_avoidance(forward(0.4), &[[-0.3, 0.0]], &AvoidanceConfig::default());
        assert_eq!(out, forward(0.4));
    }

    #[test]
    fn far_obstacle_is_ignored() {
        let out = collision_avoidance(forward(0.4), &[[0.9, 0.0]], &AvoidanceConfig::default());
        assert_eq!(out, forward(0.4));
    }
}
