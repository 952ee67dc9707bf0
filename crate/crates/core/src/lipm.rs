//! Linear inverted pendulum (LIPM) dynamics and capture-step planning.
//!
//! Each horizontal axis is an independent pendulum `x'' = C^2 x` about the
//! current support pivot, with `C = sqrt(g / h)`. Between support exchanges
//! the orbital energy `E = v^2/2 - C^2 x^2/2` is conserved, so returning to a
//! limit cycle reduces to choosing a step that puts the post-exchange state
//! back on the cycle's energy level.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_GRAVITY: f64 = 9.81;

/// Half-width of the accepted band around the limit-cycle energy (J/kg).
pub const ENERGY_BAND: f64 = 1e-4;

/// Resolution of the step-timing scan (s).
pub const TIMING_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LipmError {
    #[error("invalid pendulum parameters: {0}")]
    InvalidParams(&'static str),
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error("invalid limit cycle: {0}")]
    InvalidCycle(&'static str),
    #[error("state is not capturable in one step (best energy error {energy_error:.3e} J/kg)")]
    Uncapturable { best: Footstep, energy_error: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumParams {
    pub com_height: f64,
    pub gravity: f64,
    pub mass: f64,
}

impl PendulumParams {
    pub fn new(com_height: f64, mass: f64) -> Result<Self, LipmError> {
        let params = Self {
            com_height,
            gravity: DEFAULT_GRAVITY,
            mass,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_gravity(mut self, gravity: f64) -> Result<Self, LipmError> {
        self.gravity = gravity;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), LipmError> {
        if !(self.com_height.is_finite() && self.com_height > 0.0) {
            return Err(LipmError::InvalidParams("com_height must be positive"));
        }
        if !(self.gravity.is_finite() && self.gravity > 0.0) {
            return Err(LipmError::InvalidParams("gravity must be positive"));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(LipmError::InvalidParams("mass must be positive"));
        }
        Ok(())
    }

    /// Pendulum constant `C = sqrt(g / h)` (1/s).
    pub fn omega(&self) -> f64 {
        (self.gravity / self.com_height).sqrt()
    }
}

/// CoM offset and velocity relative to the current support pivot along one
/// axis. `time` is the time elapsed since the current support phase began.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LipmState {
    pub offset: f64,
    pub velocity: f64,
    pub time: f64,
}

impl LipmState {
    pub fn new(offset: f64, velocity: f64) -> Self {
        Self {
            offset,
            velocity,
            time: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.offset.is_finite() && self.velocity.is_finite() && self.time.is_finite()
    }

    pub fn mirrored(&self) -> Self {
        Self {
            offset: -self.offset,
            velocity: -self.velocity,
            time: self.time,
        }
    }

    /// Instantaneous capture point relative to the pivot, `x + v / C`.
    pub fn capture_point(&self, params: &PendulumParams) -> f64 {
        self.offset + self.velocity / params.omega()
    }
}

/// Closed-form propagation of the pendulum by `dt` seconds.
pub fn predict(state: &LipmState, params: &PendulumParams, dt: f64) -> Result<LipmState, LipmError> {
    if !state.is_finite() {
        return Err(LipmError::InvalidState("non-finite state"));
    }
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(LipmError::InvalidState("dt must be finite and non-negative"));
    }
    Ok(propagate(state, params.omega(), dt))
}

pub(crate) fn propagate(state: &LipmState, c: f64, dt: f64) -> LipmState {
    let (sh, ch) = ((c * dt).sinh(), (c * dt).cosh());
    LipmState {
        offset: state.offset * ch + state.velocity / c * sh,
        velocity: state.offset * c * sh + state.velocity * ch,
        time: state.time + dt,
    }
}

pub fn orbital_energy(state: &LipmState, params: &PendulumParams) -> f64 {
    energy(state.offset, state.velocity, params.omega())
}

fn energy(offset: f64, velocity: f64, c: f64) -> f64 {
    0.5 * velocity * velocity - 0.5 * c * c * offset * offset
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitKind {
    /// The CoM passes over the pivot every step (sagittal walking).
    Crossing,
    /// The CoM turns back before reaching the pivot and the step side
    /// alternates (lateral sway).
    Alternating,
}

/// Periodic pendulum orbit of steady walking.
///
/// Right after a support exchange the CoM sits at `-support_exchange_offset`
/// and moves towards the new pivot. A crossing orbit reaches
/// `+support_exchange_offset` after one nominal step, an alternating orbit
/// returns to `-support_exchange_offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCycle {
    pub support_exchange_offset: f64,
    pub nominal_step_duration: f64,
    pub nominal_step_length: f64,
    pub kind: OrbitKind,
}

impl LimitCycle {
    pub fn sagittal(support_exchange_offset: f64, nominal_step_duration: f64) -> Result<Self, LipmError> {
        Self::build(support_exchange_offset, nominal_step_duration, OrbitKind::Crossing)
    }

    pub fn lateral(support_exchange_offset: f64, nominal_step_duration: f64) -> Result<Self, LipmError> {
        Self::build(support_exchange_offset, nominal_step_duration, OrbitKind::Alternating)
    }

    /// Stepping in place: zero orbital energy, zero step length.
    pub fn on_spot(nominal_step_duration: f64) -> Result<Self, LipmError> {
        Self::sagittal(0.0, nominal_step_duration)
    }

    fn build(offset: f64, duration: f64, kind: OrbitKind) -> Result<Self, LipmError> {
        let cycle = Self {
            support_exchange_offset: offset,
            nominal_step_duration: duration,
            nominal_step_length: 2.0 * offset,
            kind,
        };
        cycle.validate()?;
        Ok(cycle)
    }

    pub fn validate(&self) -> Result<(), LipmError> {
        if !(self.nominal_step_duration.is_finite() && self.nominal_step_duration > 0.0) {
            return Err(LipmError::InvalidCycle("nominal_step_duration must be positive"));
        }
        if !self.support_exchange_offset.is_finite() || self.support_exchange_offset < 0.0 {
            return Err(LipmError::InvalidCycle(
                "support_exchange_offset must be finite and non-negative",
            ));
        }
        if !self.nominal_step_length.is_finite() {
            return Err(LipmError::InvalidCycle("nominal_step_length must be finite"));
        }
        Ok(())
    }

    /// CoM velocity right after a support exchange on this cycle.
    pub fn exchange_velocity(&self, params: &PendulumParams) -> f64 {
        let c = params.omega();
        let half = 0.5 * c * self.nominal_step_duration;
        let x = self.support_exchange_offset;
        match self.kind {
            OrbitKind::Crossing if x == 0.0 => 0.0,
            OrbitKind::Crossing => c * x / half.tanh(),
            OrbitKind::Alternating => c * x * half.tanh(),
        }
    }

    pub fn exchange_state(&self, params: &PendulumParams) -> LipmState {
        LipmState::new(-self.support_exchange_offset, self.exchange_velocity(params))
    }

    pub fn target_energy(&self, params: &PendulumParams) -> f64 {
        let s = self.exchange_state(params);
        energy(s.offset, s.velocity, params.omega())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLimits {
    pub max_step_length: f64,
    /// Lower bound on the duration of a support phase, measured from the last
    /// support exchange.
    pub min_step_duration: f64,
    pub max_step_duration: f64,
}

impl Default for StepLimits {
    fn default() -> Self {
        Self {
            max_step_length: 0.5,
            min_step_duration: 0.05,
            max_step_duration: 1.0,
        }
    }
}

impl StepLimits {
    pub fn validate(&self) -> Result<(), LipmError> {
        if !(self.max_step_length.is_finite() && self.max_step_length > 0.0) {
            return Err(LipmError::InvalidParams("max_step_length must be positive"));
        }
        if !(self.min_step_duration.is_finite() && self.min_step_duration >= 0.0) {
            return Err(LipmError::InvalidParams("min_step_duration must be non-negative"));
        }
        if !(self.max_step_duration.is_finite() && self.max_step_duration >= self.min_step_duration) {
            return Err(LipmError::InvalidParams(
                "max_step_duration must be at least min_step_duration",
            ));
        }
        Ok(())
    }
}

/// Next footstep: when to put the swing foot down and where, relative to
/// the current pivot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footstep {
    pub time_to_step: f64,
    pub step_location: f64,
    /// The location had to be clamped to the step limits.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    time: f64,
    location: f64,
    error: f64,
    exact: bool,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        if self.error < other.error {
            return true;
        }
        self.error == other.error && self.location.abs() < other.location.abs()
    }
}

/// Direction in which the CoM is heading along the axis.
fn heading(state: &LipmState) -> f64 {
    if state.velocity != 0.0 {
        state.velocity.signum()
    } else if state.offset != 0.0 {
        state.offset.signum()
    } else {
        1.0
    }
}

/// Distance between the CoM and the new pivot that matches `target` energy,
/// or zero when the state is too slow to reach it.
fn matching_distance(velocity: f64, target: f64, c: f64) -> f64 {
    let d2 = velocity * velocity - 2.0 * target;
    if d2 > 0.0 {
        d2.sqrt() / c
    } else {
        0.0
    }
}

/// Step location for a state at the moment of the exchange that puts the CoM
/// on the target energy with the new pivot ahead of the CoM in `direction`.
/// When the state is too slow to reach the target the pivot goes directly
/// under the CoM, which maximizes the post-exchange energy.
pub fn step_location_for(
    at_step: &LipmState,
    params: &PendulumParams,
    cycle: &LimitCycle,
    direction: Option<f64>,
) -> f64 {
    let c = params.omega();
    let dir = direction.unwrap_or_else(|| heading(at_step)).signum();
    at_step.offset + dir * matching_distance(at_step.velocity, cycle.target_energy(params), c)
}

fn evaluate(state: &LipmState, c: f64, target: f64, max_len: f64, t: f64) -> Candidate {
    let at = propagate(state, c, t);
    let dir = heading(&at);
    let ideal = matching_distance(at.velocity, target, c);
    let along = dir * at.offset;
    let reachable = at.velocity * at.velocity - 2.0 * target >= 0.0;
    let exact_location = at.offset + dir * ideal;
    if reachable && exact_location.abs() <= max_len {
        return Candidate {
            time: t,
            location: exact_location,
            error: (energy(-dir * ideal, at.velocity, c) - target).abs(),
            exact: true,
        };
    }
    // distance m >= 0 with the pivot ahead of the CoM, |offset + dir*m| <= max_len
    let hi = max_len - along;
    let m = if hi < 0.0 {
        hi
    } else {
        ideal.clamp((-max_len - along).max(0.0), hi)
    };
    Candidate {
        time: t,
        location: at.offset + dir * m,
        error: (energy(-dir * m, at.velocity, c) - target).abs(),
        exact: false,
    }
}

/// Timing and location of the next footstep that return the pendulum to the
/// limit-cycle energy.
///
/// The nominal timing (end of the current nominal step) is kept whenever its
/// energy-matching location lies within the step limits. Otherwise the
/// earliest admissible timing on a 1 ms grid with an in-limit location is
/// taken. If none exists the step with the smallest energy error is
/// returned, flagged as clamped, or inside [`LipmError::Uncapturable`] when
/// even that misses the energy band.
pub fn compute_capture_step(
    state: &LipmState,
    params: &PendulumParams,
    cycle: &LimitCycle,
    limits: &StepLimits,
) -> Result<Footstep, LipmError> {
    if !state.is_finite() {
        return Err(LipmError::InvalidState("non-finite state"));
    }
    params.validate()?;
    cycle.validate()?;
    limits.validate()?;

    let c = params.omega();
    let target = cycle.target_energy(params);
    let earliest = (limits.min_step_duration - state.time).max(0.0);
    let latest = (limits.max_step_duration - state.time).max(earliest);

    let nominal = cycle.nominal_step_duration - state.time;
    if nominal >= earliest - 1e-12 && nominal <= latest + 1e-12 {
        let cand = evaluate(state, c, target, limits.max_step_length, nominal.max(0.0));
        if cand.exact {
            return Ok(Footstep {
                time_to_step: cand.time,
                step_location: cand.location,
                clamped: false,
            });
        }
    }

    let steps = ((latest - earliest) / TIMING_RESOLUTION + 1e-9).floor() as usize;
    let mut best: Option<Candidate> = None;
    for k in 0..=steps {
        let t = earliest + k as f64 * TIMING_RESOLUTION;
        let cand = evaluate(state, c, target, limits.max_step_length, t);
        if cand.exact {
            return Ok(Footstep {
                time_to_step: cand.time,
                step_location: cand.location,
                clamped: false,
            });
        }
        if best.is_none_or(|b| cand.better_than(&b)) {
            best = Some(cand);
        }
    }
    let best = best.expect("timing scan covers at least one candidate");
    let step = Footstep {
        time_to_step: best.time,
        step_location: best.location,
        clamped: true,
    };
    if best.error <= ENERGY_BAND {
        Ok(step)
    } else {
        Err(LipmError::Uncapturable {
            best: step,
            energy_error: best.error,
        })
    }
}

/// Re-expresses the state about the new pivot. The support-phase clock
/// restarts.
pub fn step_exchange(state: &LipmState, step: &Footstep) -> LipmState {
    LipmState {
        offset: state.offset - step.step_location,
        velocity: state.velocity,
        time: 0.0,
    }
}
