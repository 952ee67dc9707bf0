//! Abstract, Cartesian and joint space for a single leg.
//!
//! Hip frame: x forward, y left, z up. A leg angle `phi` tilts the hip-foot
//! line forward, the lateral angle rolls it about the x axis, and the leg
//! extension scales its length.

use serde::{Deserialize, Serialize};

use super::{AbstractPose, GaitError};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FootPose {
    /// Ankle position in the hip frame (m).
    pub position: [f64; 3],
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegLinks {
    pub thigh: f64,
    pub shank: f64,
}

impl Default for LegLinks {
    fn default() -> Self {
        Self {
            thigh: 0.32,
            shank: 0.32,
        }
    }
}

impl LegLinks {
    pub fn length(&self) -> f64 {
        self.thigh + self.shank
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointAngles {
    pub hip_yaw: f64,
    pub hip_roll: f64,
    pub hip_pitch: f64,
    pub knee: f64,
    pub ankle_pitch: f64,
    pub ankle_roll: f64,
}

/// Inclusive `(lo, hi)` bounds per joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub hip_yaw: (f64, f64),
    pub hip_roll: (f64, f64),
    pub hip_pitch: (f64, f64),
    pub knee: (f64, f64),
    pub ankle_pitch: (f64, f64),
    pub ankle_roll: (f64, f64),
}

impl Default for JointLimits {
    fn default() -> Self {
        Self {
            hip_yaw: (-1.0, 1.0),
            hip_roll: (-0.8, 0.8),
            hip_pitch: (-1.6, 1.6),
            knee: (0.0, 2.6),
            ankle_pitch: (-1.2, 1.2),
            ankle_roll: (-0.6, 0.6),
        }
    }
}

impl JointLimits {
    pub fn check(&self, q: &JointAngles) -> Result<(), GaitError> {
        let pairs = [
            ("hip_yaw", q.hip_yaw, self.hip_yaw),
            ("hip_roll", q.hip_roll, self.hip_roll),
            ("hip_pitch", q.hip_pitch, self.hip_pitch),
            ("knee", q.knee, self.knee),
            ("ankle_pitch", q.ankle_pitch, self.ankle_pitch),
            ("ankle_roll", q.ankle_roll, self.ankle_roll),
        ];
        for (joint, value, (lo, hi)) in pairs {
            if !(lo..=hi).contains(&value) {
                return Err(GaitError::JointLimit { joint, value });
            }
        }
        Ok(())
    }
}

pub fn abstract_to_cartesian(pose: &AbstractPose, leg_length: f64) -> Result<FootPose, GaitError> {
    if !(0.0..=1.0).contains(&pose.leg_extension) {
        return Err(GaitError::InvalidExtension(pose.leg_extension));
    }
    let r = pose.leg_extension * leg_length;
    let (phi, roll) = (pose.leg_angle_sagittal, pose.leg_angle_lateral);
    let sagittal_z = -r * phi.cos();
    Ok(FootPose {
        position: [r * phi.sin(), -sagittal_z * roll.sin(), sagittal_z * roll.cos()],
        roll: 0.0,
        pitch: pose.foot_angle,
        yaw: 0.0,
    })
}

/// Inverse of [`abstract_to_cartesian`]; the arm angle is not represented in
/// Cartesian space and comes back as zero.
pub fn cartesian_to_abstract(foot: &FootPose, leg_length: f64) -> Result<AbstractPose, GaitError> {
    let [x, y, z] = foot.position;
    let r = (x * x + y * y + z * z).sqrt();
    let extension = r / leg_length;
    if extension > 1.0 + 1e-12 {
        return Err(GaitError::OutOfWorkspace { distance: r });
    }
    let (phi, roll) = if r == 0.0 {
        (0.0, 0.0)
    } else {
        ((x / r).clamp(-1.0, 1.0).asin(), y.atan2(-z))
    };
    Ok(AbstractPose {
        leg_angle_sagittal: phi,
        leg_angle_lateral: roll,
        leg_extension: extension.min(1.0),
        foot_angle: foot.pitch,
        arm_angle: 0.0,
    })
}

/// Serial 6-DoF leg: hip yaw, roll, pitch, knee, ankle pitch, ankle roll.
/// A positive knee angle folds the shank backwards.
pub fn forward_kinematics(q: &JointAngles, links: &LegLinks) -> FootPose {
    let shank_pitch = q.hip_pitch - q.knee;
    let xs = links.thigh * q.hip_pitch.sin() + links.shank * shank_pitch.sin();
    let zs = -links.thigh * q.hip_pitch.cos() - links.shank * shank_pitch.cos();
    let (y0, z) = (-zs * q.hip_roll.sin(), zs * q.hip_roll.cos());
    let (sy, cy) = q.hip_yaw.sin_cos();
    FootPose {
        position: [cy * xs - sy * y0, sy * xs + cy * y0, z],
        roll: q.hip_roll + q.ankle_roll,
        pitch: shank_pitch + q.ankle_pitch,
        yaw: q.hip_yaw,
    }
}

pub fn cartesian_to_joint(foot: &FootPose, links: &LegLinks) -> Result<JointAngles, GaitError> {
    let [x, y, z] = foot.position;
    let (sy, cy) = foot.yaw.sin_cos();
    let (xr, yr) = (cy * x + sy * y, -sy * x + cy * y);
    let distance = (xr * xr + yr * yr + z * z).sqrt();
    let (a, b) = (links.thigh, links.shank);
    if distance > a + b || distance < (a - b).abs() {
        return Err(GaitError::OutOfWorkspace { distance });
    }
    let hip_roll = if yr == 0.0 && z == 0.0 { 0.0 } else { yr.atan2(-z) };
    let zs = -(yr * yr + z * z).sqrt();
    let cos_knee = ((distance * distance - a * a - b * b) / (2.0 * a * b)).clamp(-1.0, 1.0);
    let knee = cos_knee.acos();
    let toward = xr.atan2(-zs);
    let hip_pitch = toward + (b * knee.sin()).atan2(a + b * knee.cos());
    let shank_pitch = hip_pitch - knee;
    Ok(JointAngles {
        hip_yaw: foot.yaw,
        hip_roll,
        hip_pitch,
        knee,
        ankle_pitch: foot.pitch - shank_pitch,
        ankle_roll: foot.roll - hip_roll,
    })
}
