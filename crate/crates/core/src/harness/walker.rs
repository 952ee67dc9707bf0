//! Closed-loop walking on two decoupled pendulum axes.
//!
//! The sagittal axis re-plans its capture step every tick and decides the
//! step timing; the lateral axis follows an alternating sway orbit and only
//! chooses where to put the foot at that timing. The lateral state is kept
//! in a frame mirrored at every exchange, so the orbit always looks the same
//! and the next step always goes towards negative offsets.

use crate::gait::{
    advance_phase, cpg_waveform, lean, support_coefficient, FeedbackController, FeedbackGains, GaitParams, GaitPhase,
    Leg, LegPair, TiltError,
};
use crate::lipm::{
    compute_capture_step, orbital_energy, predict, step_exchange, Footstep, LimitCycle, LipmError, LipmState,
    PendulumParams, StepLimits, ENERGY_BAND,
};

use super::scenario::WalkConfig;

/// Shortest step the walker will plan, so a zero minimum duration cannot
/// stall a tick with repeated exchanges.
const MIN_PLANNED_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEvent {
    pub time: f64,
    pub leg: Leg,
    pub location: f64,
    pub lateral_location: f64,
    pub clamped: bool,
    /// Sagittal energy error right after the exchange (J/kg).
    pub energy_error: f64,
}

#[derive(Debug, Clone)]
struct Cycles {
    sagittal: LimitCycle,
    lateral: LimitCycle,
}

#[derive(Debug, Clone)]
pub struct Walker {
    pub params: PendulumParams,
    pub gait: GaitParams,
    pub config: WalkConfig,
    cycles: Option<Cycles>,
    pub sagittal: LipmState,
    /// Lateral state in the mirrored frame; see the module docs.
    pub lateral: LipmState,
    pub phase: GaitPhase,
    /// Leg that touches down next.
    pub swing: Leg,
    pub time: f64,
    last_push: Option<f64>,
    feedback: FeedbackController,
    pub steps: u64,
}

impl Walker {
    /// Starts on the limit cycle right after a right-foot touchdown. A gait
    /// frequency of zero gives a standing robot that never steps.
    pub fn new(
        params: PendulumParams,
        gait: GaitParams,
        config: WalkConfig,
        gains: FeedbackGains,
    ) -> Result<Self, LipmError> {
        params.validate()?;
        let cycles = if gait.frequency > 0.0 {
            let t = gait.step_duration();
            let sagittal = if config.step_length > 0.0 {
                LimitCycle::sagittal(0.5 * config.step_length, t)?
            } else {
                LimitCycle::on_spot(t)?
            };
            Some(Cycles {
                sagittal,
                lateral: LimitCycle::lateral(config.lateral_offset, t)?,
            })
        } else {
            None
        };
        let (sagittal, lateral) = match &cycles {
            Some(c) => (c.sagittal.exchange_state(&params), c.lateral.exchange_state(&params)),
            None => (LipmState::default(), LipmState::default()),
        };
        Ok(Self {
            params,
            gait,
            config,
            cycles,
            sagittal,
            lateral,
            phase: GaitPhase::new(0.0),
            swing: Leg::Left,
            time: 0.0,
            last_push: None,
            feedback: FeedbackController::new(gains),
            steps: 0,
        })
    }

    pub fn is_standing(&self) -> bool {
        self.cycles.is_none()
    }

    pub fn sagittal_cycle(&self) -> Option<&LimitCycle> {
        self.cycles.as_ref().map(|c| &c.sagittal)
    }

    /// Energy the sagittal axis should hold; a standing robot holds zero.
    pub fn target_energy(&self) -> f64 {
        self.cycles
            .as_ref()
            .map_or(0.0, |c| c.sagittal.target_energy(&self.params))
    }

    pub fn energy_error(&self) -> f64 {
        (orbital_energy(&self.sagittal, &self.params) - self.target_energy()).abs()
    }

    pub fn in_band(&self) -> bool {
        self.energy_error() <= ENERGY_BAND
    }

    /// Lateral offset with the sign of the field frame (+ = left).
    pub fn lateral_offset_world(&self) -> f64 {
        // mirrored frame points away from the next swing side
        -self.swing.side() * self.lateral.offset
    }

    pub fn lateral_velocity_world(&self) -> f64 {
        -self.swing.side() * self.lateral.velocity
    }

    /// A CoM beyond `fall_offset` only counts as a fall while it moves away
    /// from the stance foot; a long capture step legitimately lands the foot
    /// far ahead of a CoM that is still approaching it.
    pub fn has_fallen(&self) -> bool {
        let tipping = |s: &LipmState| s.offset.abs() > self.config.fall_offset && s.offset * s.velocity > 0.0;
        tipping(&self.sagittal) || tipping(&self.lateral)
    }

    /// Instantaneous change of the sagittal CoM velocity.
    pub fn apply_push(&mut self, delta_v: f64) {
        self.sagittal.velocity += delta_v;
        self.last_push = Some(self.time);
    }

    fn limits_now(&self, now: f64) -> StepLimits {
        let base = self.config.limits();
        let mut min = base.min_step_duration.max(MIN_PLANNED_STEP);
        if let Some(p) = self.last_push {
            min = min.max(self.sagittal.time + self.config.reaction_latency - (now - p));
        }
        StepLimits {
            max_step_length: base.max_step_length,
            min_step_duration: min,
            max_step_duration: base.max_step_duration.max(min),
        }
    }

    fn plan(&self, cycle: &LimitCycle, now: f64) -> Result<Footstep, LipmError> {
        match compute_capture_step(&self.sagittal, &self.params, cycle, &self.limits_now(now)) {
            Ok(step) => Ok(step),
            Err(LipmError::Uncapturable { best, .. }) => Ok(best),
            Err(e) => Err(e),
        }
    }

    fn propagate(&mut self, dt: f64) -> Result<(), LipmError> {
        self.sagittal = predict(&self.sagittal, &self.params, dt)?;
        self.lateral = predict(&self.lateral, &self.params, dt)?;
        if !self.is_standing() {
            self.phase = advance_phase(self.phase, &self.gait, dt);
        }
        Ok(())
    }

    /// Lateral foot placement that puts the divergent component of motion
    /// (`x + v / C`) back on the sway orbit one nominal step later. Unlike
    /// matching the orbital energy alone, this also works when a hurried
    /// sagittal step catches the sway moving the wrong way.
    fn lateral_step_location(&self, cycle: &LimitCycle) -> f64 {
        let c = self.params.omega();
        let t = cycle.nominal_step_duration;
        let start = cycle.exchange_state(&self.params);
        let end = predict(&start, &self.params, t).unwrap_or(start);
        let xi_end = end.offset + end.velocity / c;
        let xi = self.lateral.offset + self.lateral.velocity / c;
        // the new support frame is mirrored, hence the plus sign
        xi + xi_end * (-c * t).exp()
    }

    /// Advances by `dt`, taking every footstep that falls inside the tick.
    pub fn tick(&mut self, dt: f64) -> Result<Vec<StepEvent>, LipmError> {
        let start = self.time;
        let Some(cycles) = self.cycles.clone() else {
            self.propagate(dt)?;
            self.time = start + dt;
            return Ok(Vec::new());
        };
        let mut events = Vec::new();
        let mut elapsed = 0.0;
        loop {
            let now = start + elapsed;
            let step = self.plan(&cycles.sagittal, now)?;
            let remaining = dt - elapsed;
            if step.time_to_step > remaining + 1e-9 {
                self.propagate(remaining.max(0.0))?;
                break;
            }
            self.propagate(step.time_to_step)?;
            elapsed += step.time_to_step;

            let max_len = self.config.max_step_length;
            let lateral_location = self.lateral_step_location(&cycles.lateral).clamp(-max_len, max_len);
            self.sagittal = step_exchange(&self.sagittal, &step);
            let lateral_step = Footstep {
                time_to_step: 0.0,
                step_location: lateral_location,
                clamped: false,
            };
            self.lateral = step_exchange(&self.lateral, &lateral_step).mirrored();

            let leg = self.swing;
            self.phase = GaitPhase::new(match leg {
                Leg::Left => std::f64::consts::PI,
                Leg::Right => 0.0,
            });
            self.swing = leg.other();
            self.steps += 1;
            events.push(StepEvent {
                time: start + elapsed,
                leg,
                location: step.step_location,
                lateral_location,
                clamped: step.clamped,
                energy_error: self.energy_error(),
            });
        }
        self.time = start + dt;
        Ok(events)
    }

    /// Offset the sagittal axis would have at the current support time on
    /// the limit cycle.
    fn nominal_offset(&self) -> f64 {
        match &self.cycles {
            Some(c) => {
                let mut s = c.sagittal.exchange_state(&self.params);
                s = predict(&s, &self.params, self.sagittal.time).unwrap_or(s);
                s.offset
            }
            None => 0.0,
        }
    }

    /// Open-loop leg poses with leaning and tilt feedback. Trunk tilt is
    /// approximated from the deviation of the CoM from its nominal offset.
    pub fn poses(&mut self, dt: f64) -> LegPair {
        let base = cpg_waveform(self.phase, &self.gait);
        let speed = self.config.step_length * self.gait.frequency * 2.0;
        let leaned = lean(base, speed, 0.0, &self.gait);
        let h = self.params.com_height;
        let tilt = TiltError {
            pitch: ((self.sagittal.offset - self.nominal_offset()) / h).atan(),
            roll: 0.0,
            pitch_rate: 0.0,
            roll_rate: 0.0,
        };
        let support = if self.is_standing() {
            (0.5, 0.5)
        } else {
            support_coefficient(self.phase, &self.gait)
        };
        self.feedback.apply(leaned, &tilt, dt, support)
    }
}
