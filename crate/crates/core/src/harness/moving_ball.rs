//! Kicking a ball rolled towards a robot stepping on the spot.
//!
//! The robot sees the ball every `epsilon` seconds, fits a trajectory, and
//! places the apex of an in-walk kick on the predicted arrival at its foot
//! line. When no swing window of the current gait can host that apex, the
//! gait frequency is nudged until one can.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ball::{estimate, predict_arrival, update_track, BallDetection, BallTrack, TrackConfig};
use crate::gait::{advance_phase, cpg_waveform, swing_window, GaitParams, GaitPhase, Leg};
use crate::kick::{augment_leg_angle, schedule_kick, start_time, KickMotion, KickWindow};

use super::log::{TrajectoryLog, Value};
use super::metrics::{AttemptRecord, Details, MovingBallMetrics};
use super::scenario::{MovingBallConfig, Scenario};
use super::walk::tick_count;
use super::{HarnessError, RunOutput};

const RETIME_STEP: f64 = 0.005;
const MIN_FREQUENCY: f64 = 0.05;
/// Slack (s) the planned kick start should keep to both ends of its window,
/// so later estimates can move the arrival without losing the window.
const TIMING_MARGIN: f64 = 0.2;

pub(crate) const MOVING_BALL_COLUMNS: [&str; 9] = [
    "attempt",
    "phase",
    "frequency",
    "ball_x",
    "ball_y",
    "predicted_arrival",
    "left_leg_angle",
    "right_leg_angle",
    "events",
];

/// Straight pass decelerating uniformly until it stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingBall {
    pub start: f64,
    pub distance: f64,
    pub speed: f64,
    pub deceleration: f64,
}

impl RollingBall {
    fn stop_after(&self) -> f64 {
        if self.deceleration > 0.0 {
            self.speed / self.deceleration
        } else {
            f64::INFINITY
        }
    }

    /// Distance from the robot along the approach axis at absolute time `t`.
    pub fn position(&self, t: f64) -> f64 {
        let dt = (t - self.start).clamp(0.0, self.stop_after());
        self.distance - self.speed * dt + 0.5 * self.deceleration * dt * dt
    }

    /// When the ball crosses `line`, if it gets there.
    pub fn arrival(&self, line: f64) -> Option<f64> {
        let gap = self.distance - line;
        if gap <= 0.0 {
            return Some(self.start);
        }
        let disc = self.speed * self.speed - 2.0 * self.deceleration * gap;
        if disc < 0.0 {
            return None;
        }
        let dt = if self.deceleration > 0.0 {
            (self.speed - disc.sqrt()) / self.deceleration
        } else if self.speed > 0.0 {
            gap / self.speed
        } else {
            return None;
        };
        Some(self.start + dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Committed {
    leg: Leg,
    window: KickWindow,
    motion: KickMotion,
    start: f64,
}

impl Committed {
    fn apex(&self) -> f64 {
        self.start + 0.5 * self.motion.duration
    }

    fn end(&self) -> f64 {
        self.start + self.motion.duration
    }

    /// How far the start could move either way inside the window.
    fn margin(&self) -> f64 {
        let latest = self.window.latest_end() - self.motion.duration;
        (self.start - self.window.earliest_start()).min(latest - self.start)
    }
}

/// Swing windows of both legs over the next two cycles, earliest first.
fn candidate_windows(phase: GaitPhase, gait: &GaitParams, now: f64, cfg: &Scenario) -> Vec<(Leg, KickWindow)> {
    let cycle = 1.0 / gait.frequency;
    let mut out = Vec::new();
    for leg in [Leg::Left, Leg::Right] {
        let (s, e) = swing_window(phase, gait, leg, now);
        for k in 0..2 {
            let shift = k as f64 * cycle;
            if let Ok(w) = KickWindow::new(s + shift, e + shift, cfg.kick.lead_guard, cfg.kick.trail_guard) {
                out.push((leg, w));
            }
        }
    }
    out.sort_by(|a, b| a.1.t_start.total_cmp(&b.1.t_start));
    out
}

/// Earliest kick whose apex lands on `arrival` without clamping and that has
/// not started yet.
fn best_kick(phase: GaitPhase, gait: &GaitParams, now: f64, arrival: f64, s: &Scenario) -> Option<Committed> {
    candidate_windows(phase, gait, now, s)
        .into_iter()
        .filter_map(|(leg, window)| {
            let k = schedule_kick(&window, s.kick.duration, s.kick.amplitude, s.kick.sigma, arrival).ok()?;
            if !k.apex_feasible() {
                return None;
            }
            let start = start_time(&window, &k.motion).ok()?;
            (start >= now - 1e-9).then_some(Committed {
                leg,
                window,
                motion: k.motion,
                start,
            })
        })
        .min_by(|a, b| a.start.total_cmp(&b.start))
}

/// Gait frequency within the allowed range for which a kick can meet
/// `arrival`: the one closest to the current frequency that keeps
/// [`TIMING_MARGIN`], or failing that the one with the largest margin.
fn retime(phase: GaitPhase, gait: &GaitParams, now: f64, arrival: f64, s: &Scenario) -> Option<GaitParams> {
    let mb = &s.moving_ball;
    let lo = (mb.gait_frequency * (1.0 - mb.retime_range)).max(MIN_FREQUENCY);
    let hi = mb.gait_frequency * (1.0 + mb.retime_range);
    let n = ((hi - lo) / RETIME_STEP).round() as i64;
    let mut grid: Vec<f64> = (0..=n).map(|i| lo + i as f64 * RETIME_STEP).collect();
    grid.sort_by(|a, b| (a - gait.frequency).abs().total_cmp(&(b - gait.frequency).abs()));
    let mut best: Option<(f64, GaitParams)> = None;
    for f in grid {
        let g = GaitParams { frequency: f, ..*gait };
        let Some(kick) = best_kick(phase, &g, now, arrival, s) else {
            continue;
        };
        let margin = kick.margin();
        if margin >= TIMING_MARGIN {
            return Some(g);
        }
        if best.is_none_or(|(m, _)| margin > m) {
            best = Some((margin, g));
        }
    }
    best.map(|(_, g)| g)
}

fn launch(mb: &MovingBallConfig, start: f64, rng: &mut ChaCha8Rng) -> RollingBall {
    let jitter = if mb.speed_jitter > 0.0 {
        rng.random_range(-mb.speed_jitter..=mb.speed_jitter)
    } else {
        0.0
    };
    RollingBall {
        start,
        distance: mb.launch_distance,
        speed: mb.launch_speed * (1.0 + jitter),
        deceleration: mb.deceleration,
    }
}

pub fn run_moving_ball(s: &Scenario) -> Result<RunOutput, HarnessError> {
    let mb = &s.moving_ball;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let noise = Normal::new(0.0, mb.noise).map_err(|e| HarnessError::Config {
        path: "moving_ball.noise".into(),
        message: e.to_string(),
    })?;
    let detect_every = ((mb.epsilon / s.tick).round() as u64).max(1);
    let attempt_ticks = tick_count(s, mb.max_attempt_time);
    let base_gait = GaitParams {
        frequency: mb.gait_frequency,
        ..s.gait
    };

    let mut log = TrajectoryLog::new(&MOVING_BALL_COLUMNS);
    let mut metrics = MovingBallMetrics {
        attempts: Vec::new(),
        goals: 0,
        committed_arrival_errors: Vec::new(),
        estimate_arrival_errors: Vec::new(),
    };
    let mut tick: u64 = 0;
    let mut detections = Vec::new();

    for attempt in 0..mb.attempts {
        let t0 = tick as f64 * s.tick;
        let ball = launch(mb, t0, &mut rng);
        let mut phase = GaitPhase::new(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
        let mut gait = base_gait;
        let true_arrival = ball.arrival(mb.foot_line);
        let mut track = BallTrack::new(TrackConfig::default());
        let mut predicted: Option<f64> = None;
        let mut committed: Option<Committed> = None;
        let mut committed_prediction = None;

        for k in 0..attempt_ticks {
            let now = tick as f64 * s.tick;
            let mut events: Vec<String> = Vec::new();
            if committed.is_none() {
                if k % detect_every == 0 {
                    let det =
                        BallDetection::new(now, ball.position(now) + noise.sample(&mut rng), noise.sample(&mut rng));
                    detections.push(det);
                    update_track(&mut track, det)?;
                    predicted = match estimate(&track, mb.epsilon) {
                        Ok(est) => {
                            let plan = predict_arrival(&est, mb.foot_line, s.kick.duration);
                            if let (true, Some(truth)) = (plan.feasible, true_arrival) {
                                metrics.estimate_arrival_errors.push((plan.arrival_time - truth).abs());
                            }
                            plan.feasible.then_some(plan.arrival_time)
                        }
                        Err(_) => None,
                    };
                }
                if let Some(arrival) = predicted {
                    let late = now - (arrival - 0.5 * s.kick.duration);
                    let mut kick = if late > 0.0 && late <= mb.contact_tolerance {
                        // a fresh estimate moved the start into the past: kick
                        // right away while the apex can still meet the ball
                        best_kick(phase, &gait, now, now + 0.5 * s.kick.duration, s)
                    } else {
                        best_kick(phase, &gait, now, arrival, s)
                    };
                    let tight = kick.is_some_and(|k| k.margin() < TIMING_MARGIN && k.start - now > mb.epsilon);
                    if (kick.is_none() || tight) && late <= 0.0 {
                        if let Some(g) = retime(phase, &gait, now, arrival, s).filter(|g| g.frequency != gait.frequency)
                        {
                            events.push(format!("retime:{:.6}", g.frequency));
                            gait = g;
                            kick = best_kick(phase, &gait, now, arrival, s);
                        }
                    }
                    if let Some(kick) = kick.filter(|c| c.start <= now + s.tick) {
                        events.push(format!("kick:{:.6}", kick.start));
                        committed = Some(kick);
                        committed_prediction = Some(arrival);
                        if let Some(truth) = true_arrival {
                            metrics.committed_arrival_errors.push((arrival - truth).abs());
                        }
                    }
                }
            }

            let next = (tick + 1) as f64 * s.tick;
            phase = advance_phase(phase, &gait, s.tick);
            let mut poses = cpg_waveform(phase, &gait);
            if let Some(c) = &committed {
                let pose = poses.get_mut(c.leg);
                pose.leg_angle_sagittal = augment_leg_angle(pose.leg_angle_sagittal, next, &c.window, &c.motion)?;
            }
            log.push(
                next,
                vec![
                    (attempt + 1).into(),
                    phase.mu().into(),
                    gait.frequency.into(),
                    ball.position(next).into(),
                    0.0.into(),
                    predicted.map_or(Value::from(""), Value::from),
                    poses.left.leg_angle_sagittal.into(),
                    poses.right.leg_angle_sagittal.into(),
                    events.join(";").into(),
                ],
            );
            tick += 1;
            if committed.is_some_and(|c| c.end() <= next) {
                break;
            }
        }

        let apex = committed.map(|c| c.apex());
        let goal = match (apex, true_arrival) {
            (Some(a), Some(t)) => (a - t).abs() <= mb.contact_tolerance,
            _ => false,
        };
        metrics.goals += goal as u32;
        metrics.attempts.push(AttemptRecord {
            launch_speed: ball.speed,
            true_arrival,
            kick_start: committed.map(|c| c.start),
            apex,
            committed_prediction,
            goal,
            infeasible: true_arrival.is_none(),
        });
    }

    let success = metrics.goals == mb.attempts;
    let mut out = RunOutput::new(s, success, Vec::new(), Details::MovingBall(metrics), log);
    out.detections = detections;
    Ok(out)
}
