//! PID-like corrective actions added on top of the open-loop waveforms.

use serde::{Deserialize, Serialize};

use super::{Leg, LegPair};

/// Trunk tilt error from the state estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TiltError {
    pub pitch: f64,
    pub roll: f64,
    pub pitch_rate: f64,
    pub roll_rate: f64,
}

impl TiltError {
    pub fn is_zero(&self) -> bool {
        self.pitch == 0.0 && self.roll == 0.0 && self.pitch_rate == 0.0 && self.roll_rate == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Pid {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl Pid {
    pub fn p(kp: f64) -> Self {
        Self { kp, ki: 0.0, kd: 0.0 }
    }

    fn output(&self, error: f64, integral: f64, rate: f64) -> f64 {
        self.kp * error + self.ki * integral + self.kd * rate
    }

    fn is_valid(&self) -> bool {
        [self.kp, self.ki, self.kd].iter().all(|g| g.is_finite() && *g >= 0.0)
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            kp: self.kp * k,
            ki: self.ki * k,
            kd: self.kd * k,
        }
    }
}

/// Gains of the six feedback mechanisms.
///
/// Channel mapping:
/// - `arm_angle`: pitch error onto both arm angles
/// - `hip_angle`: pitch onto sagittal, roll onto lateral leg angles
/// - `continuous_foot_angle`: pitch onto both foot angles
/// - `support_foot_angle`: pitch onto foot angles weighted by support
/// - `com_shift`: roll onto lateral leg angles
/// - `virtual_slope`: pitch onto extension, proportional to each leg's
///   sagittal angle (front leg shortens, rear leg lengthens)
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeedbackGains {
    pub arm_angle: Pid,
    pub hip_angle: Pid,
    pub continuous_foot_angle: Pid,
    pub support_foot_angle: Pid,
    pub com_shift: Pid,
    pub virtual_slope: Pid,
}

impl FeedbackGains {
    pub fn is_valid(&self) -> bool {
        self.mechanisms().iter().all(Pid::is_valid)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            arm_angle: self.arm_angle.scaled(k),
            hip_angle: self.hip_angle.scaled(k),
            continuous_foot_angle: self.continuous_foot_angle.scaled(k),
            support_foot_angle: self.support_foot_angle.scaled(k),
            com_shift: self.com_shift.scaled(k),
            virtual_slope: self.virtual_slope.scaled(k),
        }
    }

    fn mechanisms(&self) -> [Pid; 6] {
        [
            self.arm_angle,
            self.hip_angle,
            self.continuous_foot_angle,
            self.support_foot_angle,
            self.com_shift,
            self.virtual_slope,
        ]
    }
}

/// Feedback state owned by one control loop: the tilt-error integrals with
/// anti-windup clamping.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackController {
    pub gains: FeedbackGains,
    pub integral_limit: f64,
    pitch_integral: f64,
    roll_integral: f64,
}

impl FeedbackController {
    pub fn new(gains: FeedbackGains) -> Self {
        Self {
            gains,
            integral_limit: 0.1,
            pitch_integral: 0.0,
            roll_integral: 0.0,
        }
    }

    pub fn integrals(&self) -> (f64, f64) {
        (self.pitch_integral, self.roll_integral)
    }

    pub fn reset(&mut self) {
        self.pitch_integral = 0.0;
        self.roll_integral = 0.0;
    }

    /// Integrates the error over `dt` and adds every mechanism's correction.
    /// `support` holds the `(left, right)` support coefficients.
    pub fn apply(&mut self, poses: LegPair, tilt: &TiltError, dt: f64, support: (f64, f64)) -> LegPair {
        let limit = self.integral_limit;
        self.pitch_integral = (self.pitch_integral + tilt.pitch * dt).clamp(-limit, limit);
        self.roll_integral = (self.roll_integral + tilt.roll * dt).clamp(-limit, limit);
        if tilt.is_zero() && self.pitch_integral == 0.0 && self.roll_integral == 0.0 {
            return poses;
        }

        let g = &self.gains;
        let pitch = |pid: &Pid| pid.output(tilt.pitch, self.pitch_integral, tilt.pitch_rate);
        let roll = |pid: &Pid| pid.output(tilt.roll, self.roll_integral, tilt.roll_rate);

        let arm = pitch(&g.arm_angle);
        let hip_sagittal = pitch(&g.hip_angle);
        let hip_lateral = roll(&g.hip_angle);
        let foot = pitch(&g.continuous_foot_angle);
        let support_foot = pitch(&g.support_foot_angle);
        let shift = roll(&g.com_shift);
        let slope = pitch(&g.virtual_slope);

        let mut out = poses;
        for leg in [Leg::Left, Leg::Right] {
            let weight = match leg {
                Leg::Left => support.0,
                Leg::Right => support.1,
            };
            let nominal_angle = poses.get(leg).leg_angle_sagittal;
            let p = out.get_mut(leg);
            p.arm_angle += arm;
            p.leg_angle_sagittal += hip_sagittal;
            p.leg_angle_lateral += hip_lateral + shift;
            p.foot_angle += foot + weight * support_foot;
            p.leg_extension = (p.leg_extension - slope * nominal_angle).clamp(0.0, 1.0);
        }
        out
    }
}

/// Single-shot feedback with a fresh controller: proportional and
/// derivative terms only.
pub fn apply_feedback(poses: LegPair, tilt: &TiltError, gains: &FeedbackGains, support: (f64, f64)) -> LegPair {
    FeedbackController::new(*gains).apply(poses, tilt, 0.0, support)
}

#[cfg(test)]
mod tests {
    use super::super::{cpg_waveform, GaitParams, GaitPhase};
    use super::*;

    fn gains() -> FeedbackGains {
        FeedbackGains {
            arm_angle: Pid::p(0.4),
            hip_angle: Pid::p(0.3),
            continuous_foot_angle: Pid::p(0.2),
            support_foot_angle: Pid::p(0.15),
            com_shift: Pid::p(0.25),
            virtual_slope: Pid::p(0.5),
        }
    }

    fn poses() -> LegPair {
        cpg_waveform(GaitPhase::new(1.0), &GaitParams::default())
    }

    #[test]
    fn zero_error_is_transparent() {
        let p = poses();
        assert_eq!(apply_feedback(p, &TiltError::default(), &gains(), (0.3, 0.7)), p);
        let mut ctrl = FeedbackController::new(gains());
        assert_eq!(ctrl.apply(p, &TiltError::default(), 0.01, (0.3, 0.7)), p);
    }

    #[test]
    fn doubling_gains_doubles_offsets() {
        let p = poses();
        let tilt = TiltError {
            pitch: 0.05,
            roll: -0.02,
            ..Default::default()
        };
        let once = apply_feedback(p, &tilt, &gains(), (1.0, 0.0));
        let twice = apply_feedback(p, &tilt, &gains().scaled(2.0), (1.0, 0.0));
        for leg in [Leg::Left, Leg::Right] {
            let (a, b, base) = (once.get(leg), twice.get(leg), p.get(leg));
            let pairs = [
                (a.arm_angle - base.arm_angle, b.arm_angle - base.arm_angle),
                (
                    a.leg_angle_sagittal - base.leg_angle_sagittal,
                    b.leg_angle_sagittal - base.leg_angle_sagittal,
                ),
                (
                    a.leg_angle_lateral - base.leg_angle_lateral,
                    b.leg_angle_lateral - base.leg_angle_lateral,
                ),
                (a.foot_angle - base.foot_angle, b.foot_angle - base.foot_angle),
                (
                    a.leg_extension - base.leg_extension,
                    b.leg_extension - base.leg_extension,
                ),
            ];
            for (single, double) in pairs {
                assert!((double - 2.0 * single).abs() < 1e-15, "{single} vs {double}");
            }
        }
    }

    #[test]
    fn continuous_foot_mechanism_in_isolation() {
        let p = poses();
        let g = FeedbackGains {
            continuous_foot_angle: Pid::p(0.7),
            ..Default::default()
        };
        let tilt = TiltError {
            pitch: 0.04,
            ..Default::default()
        };
        let out = apply_feedback(p, &tilt, &g, (0.5, 0.5));
        for leg in [Leg::Left, Leg::Right] {
            assert!((out.get(leg).foot_angle - p.get(leg).foot_angle - 0.7 * 0.04).abs() < 1e-15);
            assert_eq!(out.get(leg).leg_angle_sagittal, p.get(leg).leg_angle_sagittal);
            assert_eq!(out.get(leg).arm_angle, p.get(leg).arm_angle);
        }
    }

    #[test]
    fn support_foot_follows_support_coefficient() {
        let p = poses();
        let g = FeedbackGains {
            support_foot_angle: Pid::p(1.0),
            ..Default::default()
        };
        let tilt = TiltError {
            pitch: 0.1,
            ..Default::default()
        };
        let out = apply_feedback(p, &tilt, &g, (1.0, 0.0));
        assert!((out.left.foot_angle - p.left.foot_angle - 0.1).abs() < 1e-15);
        assert_eq!(out.right.foot_angle, p.right.foot_angle);
    }

    #[test]
    fn integral_is_clamped() {
        let g = FeedbackGains {
            arm_angle: Pid {
                ki: 1.0,
                ..Default::default()
            },
            ..Default::default()
        };
        let mut ctrl = FeedbackController::new(g);
        let tilt = TiltError {
            pitch: 1.0,
            ..Default::default()
        };
        for _ in 0..100 {
            ctrl.apply(poses(), &tilt, 0.01, (0.5, 0.5));
        }
        assert_eq!(ctrl.integrals().0, 0.1);
        let out = ctrl.apply(poses(), &TiltError::default(), 0.01, (0.5, 0.5));
        assert!((out.left.arm_angle - poses().left.arm_angle - 0.1).abs() < 1e-12);
    }

    #[test]
    fn negative_gains_are_invalid() {
        let mut g = gains();
        assert!(g.is_valid());
        g.com_shift.kd = -1.0;
        assert!(!g.is_valid());
    }
}
