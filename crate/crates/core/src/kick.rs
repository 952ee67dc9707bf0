//! In-walk kick: timing inside the legal single-support window and the
//! Gaussian augmentation of the kicking leg's sagittal angle.
//!
//! ```text
//!   t_start   t_start+lead        t_kick      t_kick+L      t_end-trail   t_end
//!      |---lead---|-----delay-----|=====L=====|---------------|---trail---|
//!                 |<----------------- allowed ----------------->|
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Widest Gaussian accepted for the augmentation.
pub const MAX_SIGMA: f64 = 0.5;
/// Above this width the Gaussian is noticeably active at the motion borders.
pub const SIGMA_WARN: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KickError {
    #[error("kick window is closed (allowed length {allowed:.4} s)")]
    WindowClosed { allowed: f64 },
    #[error("kick motion of {duration:.4} s does not fit the allowed {allowed:.4} s")]
    MotionTooLong { duration: f64, allowed: f64 },
    #[error("invalid kick window: {0}")]
    InvalidWindow(&'static str),
    #[error("invalid kick motion: {0}")]
    InvalidMotion(&'static str),
}

/// Single-support window of the kicking leg with guard intervals at both
/// ends. `t_start` is the end of the previous support transition and
/// `t_end` the start of the next one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub lead_guard: f64,
    pub trail_guard: f64,
}

impl KickWindow {
    pub fn new(t_start: f64, t_end: f64, lead_guard: f64, trail_guard: f64) -> Result<Self, KickError> {
        let window = Self {
            t_start,
            t_end,
            lead_guard,
            trail_guard,
        };
        window.validate()?;
        Ok(window)
    }

    pub fn validate(&self) -> Result<(), KickError> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) || self.t_end <= self.t_start {
            return Err(KickError::InvalidWindow("t_end must be after t_start"));
        }
        if !(self.lead_guard >= 0.0 && self.trail_guard >= 0.0) {
            return Err(KickError::InvalidWindow("guard intervals must be non-negative"));
        }
        Ok(())
    }

    /// Earliest legal start, `t_start + lead_guard`.
    pub fn earliest_start(&self) -> f64 {
        self.t_start + self.lead_guard
    }

    /// Latest legal end, `t_end - trail_guard`.
    pub fn latest_end(&self) -> f64 {
        self.t_end - self.trail_guard
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickMotion {
    /// Motion duration `L` (s).
    pub duration: f64,
    /// Placement of the motion inside the allowed interval, in `[0, 1]`.
    pub lambda: f64,
    pub amplitude: f64,
    /// Gaussian width in kick-phase units.
    pub sigma: f64,
}

impl Default for KickMotion {
    fn default() -> Self {
        Self {
            duration: 0.35,
            lambda: 0.0,
            amplitude: 0.35,
            sigma: 0.25,
        }
    }
}

impl KickMotion {
    pub fn new(duration: f64, lambda: f64, amplitude: f64, sigma: f64) -> Result<Self, KickError> {
        let motion = Self {
            duration,
            lambda,
            amplitude,
            sigma,
        };
        motion.validate()?;
        if sigma > SIGMA_WARN {
            log::warn!(
                "kick sigma {sigma} leaves {:.3} of the amplitude at the borders",
                border_activation(sigma)
            );
        }
        Ok(motion)
    }

    pub fn validate(&self) -> Result<(), KickError> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(KickError::InvalidMotion("duration must be positive"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(KickError::InvalidMotion("lambda must be in [0, 1]"));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(KickError::InvalidMotion("amplitude must be non-negative"));
        }
        if !(self.sigma > 0.0 && self.sigma <= MAX_SIGMA) {
            return Err(KickError::InvalidMotion("sigma must be in (0, 0.5]"));
        }
        Ok(())
    }
}

/// Share of the amplitude still active at the motion borders,
/// `exp(-1 / (2 sigma^2))`.
pub fn border_activation(sigma: f64) -> f64 {
    (-0.5 / (sigma * sigma)).exp()
}

/// Length of the interval in which a kick may run,
/// `t_end - t_start - lead_guard - trail_guard`.
pub fn allowed_window(win: &KickWindow) -> Result<f64, KickError> {
    win.validate()?;
    let allowed = win.t_end - win.t_start - win.lead_guard - win.trail_guard;
    if allowed <= 0.0 {
        return Err(KickError::WindowClosed { allowed });
    }
    Ok(allowed)
}

fn checked_allowed(win: &KickWindow, duration: f64) -> Result<f64, KickError> {
    let allowed = allowed_window(win)?;
    if duration >= allowed {
        return Err(KickError::MotionTooLong { duration, allowed });
    }
    Ok(allowed)
}

/// Delay of the motion start after the lead guard, `lambda * (allowed - L)`.
pub fn delay(win: &KickWindow, motion: &KickMotion) -> Result<f64, KickError> {
    let allowed = checked_allowed(win, motion.duration)?;
    Ok(motion.lambda * (allowed - motion.duration))
}

/// Actual kick start, `t_start + lead_guard + delay`.
pub fn start_time(win: &KickWindow, motion: &KickMotion) -> Result<f64, KickError> {
    Ok(win.t_start + win.lead_guard + delay(win, motion)?)
}

/// Kick phase, linear from -1 at the motion start to +1 at its end. Defined
/// for every `t`; callers gate on the motion interval.
pub fn kick_phase(t: f64, win: &KickWindow, motion: &KickMotion) -> Result<f64, KickError> {
    let start = start_time(win, motion)?;
    Ok(2.0 * (t - start) / motion.duration - 1.0)
}

/// Sagittal leg angle with the kick Gaussian subtracted inside the motion
/// interval.
pub fn augment_leg_angle(phi: f64, t: f64, win: &KickWindow, motion: &KickMotion) -> Result<f64, KickError> {
    let start = start_time(win, motion)?;
    if t < start || t > start + motion.duration {
        return Ok(phi);
    }
    let x = 2.0 * (t - start) / motion.duration - 1.0;
    Ok(phi - motion.amplitude * (-0.5 * (x / motion.sigma).powi(2)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledKick {
    pub motion: KickMotion,
    /// The requested apex could not be placed in this window and lambda was
    /// clamped.
    pub apex_clamped: bool,
}

impl ScheduledKick {
    pub fn apex_feasible(&self) -> bool {
        !self.apex_clamped
    }
}

/// Chooses `lambda` so that the Gaussian apex (kick phase 0, half way
/// through the motion) falls on `desired_apex_time`.
pub fn schedule_kick(
    win: &KickWindow,
    duration: f64,
    amplitude: f64,
    sigma: f64,
    desired_apex_time: f64,
) -> Result<ScheduledKick, KickError> {
    let allowed = checked_allowed(win, duration)?;
    let slack = allowed - duration;
    let raw = (desired_apex_time - win.t_start - win.lead_guard - 0.5 * duration) / slack;
    let lambda = raw.clamp(0.0, 1.0);
    let apex_clamped = !(0.0..=1.0).contains(&raw) || !raw.is_finite();
    let lambda = if lambda.is_finite() { lambda } else { 0.0 };
    Ok(ScheduledKick {
        motion: KickMotion::new(duration, lambda, amplitude, sigma)?,
        apex_clamped,
    })
}
