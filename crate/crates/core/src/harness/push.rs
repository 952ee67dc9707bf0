//! Pendulum push model, three-push recovery trials and the search for the
//! largest recoverable push.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::log::TrajectoryLog;
use super::metrics::{Details, PushMetrics, PushRecord};
use super::scenario::Scenario;
use super::walk::{locomotion_row, tick_count, walker_for, LOCOMOTION_COLUMNS};
use super::{HarnessError, RunOutput};

/// Upper end of the bracket search for the largest recoverable push (m/s).
const MAX_SEARCH_DELTA_V: f64 = 64.0;

/// CoM velocity change from a pendulum released at a horizontal
/// `retraction`: the bob falls `l (1 - cos θ)` with `sin θ = retraction / l`
/// and hands a share `transfer` of its momentum to the robot.
pub fn pendulum_push(
    retraction: f64,
    pendulum_mass: f64,
    pendulum_length: f64,
    transfer: f64,
    robot_mass: f64,
    gravity: f64,
) -> f64 {
    let r = retraction.clamp(0.0, pendulum_length);
    let cos = (1.0 - (r / pendulum_length).powi(2)).sqrt();
    let drop = pendulum_length * (1.0 - cos);
    let impact_speed = (2.0 * gravity * drop).sqrt();
    transfer * pendulum_mass * impact_speed / robot_mass
}

/// Inverse of [`pendulum_push`]; `None` when even a horizontal release is too
/// weak.
pub fn retraction_for(
    delta_v: f64,
    pendulum_mass: f64,
    pendulum_length: f64,
    transfer: f64,
    robot_mass: f64,
    gravity: f64,
) -> Option<f64> {
    let impact_speed = delta_v * robot_mass / (transfer * pendulum_mass);
    let drop = impact_speed * impact_speed / (2.0 * gravity);
    if drop > pendulum_length {
        return None;
    }
    let cos = 1.0 - drop / pendulum_length;
    Some(pendulum_length * (1.0 - cos * cos).max(0.0).sqrt())
}

/// Push magnitude configured for the scenario.
pub fn configured_delta_v(s: &Scenario) -> f64 {
    let p = &s.push;
    p.delta_v.unwrap_or_else(|| {
        pendulum_push(
            p.retraction,
            p.pendulum_mass,
            p.pendulum_length,
            p.transfer,
            s.robot.pendulum().mass,
            s.robot.gravity,
        )
    })
}

/// Push times and directions; drawn up front so they do not depend on the
/// push magnitude.
fn push_schedule(s: &Scenario) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let p = &s.push;
    // the gait settles for two seconds before the first push
    let mut t = 2.0 + rng.random::<f64>() * p.interval_jitter;
    let mut out = Vec::new();
    for _ in 0..p.count {
        let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        out.push((t, dir));
        t += p.min_interval + rng.random::<f64>() * p.interval_jitter;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushOutcome {
    pub success: bool,
    pub pushes: Vec<PushRecord>,
    pub capture_steps: u32,
    pub fell: bool,
}

/// Three-push trial with pushes of magnitude `delta_v`. Each push must bring
/// the sagittal energy back into band within `max_recovery_steps` steps and
/// before the next push, without a fall.
pub fn push_trial(
    s: &Scenario,
    delta_v: f64,
    mut log: Option<&mut TrajectoryLog>,
) -> Result<PushOutcome, HarnessError> {
    let mut walker = walker_for(s)?;
    let schedule = push_schedule(s);
    let end = schedule
        .last()
        .map_or(s.duration, |(t, _)| s.duration.max(t + s.push.settle_time));
    let ticks = tick_count(s, end);
    let max_steps = s.walk.max_recovery_steps;

    let mut pushes: Vec<PushRecord> = Vec::new();
    let mut next_push = 0;
    let mut recovering = false;
    let mut failed = false;
    let mut fell = false;
    let mut capture_steps = 0;
    let skill = if walker.is_standing() { "stand" } else { "walk" };

    for k in 1..=ticks {
        let now = (k - 1) as f64 * s.tick;
        let mut events = Vec::new();
        if let Some(&(t_push, dir)) = schedule.get(next_push) {
            if t_push <= now + 1e-9 {
                if recovering {
                    failed = true;
                }
                walker.apply_push(dir * delta_v);
                events.push(format!("push:{:.6}", dir * delta_v));
                pushes.push(PushRecord {
                    time: now,
                    delta_v: dir * delta_v,
                    recovered: walker.in_band(),
                    capture_steps: 0,
                });
                recovering = !walker.in_band();
                next_push += 1;
            }
        }
        let steps = walker.tick(s.tick).map_err(HarnessError::Lipm)?;
        for step in &steps {
            if recovering {
                let record = pushes.last_mut().expect("recovering implies a push");
                record.capture_steps += 1;
                capture_steps += 1;
                events.push(format!("capture_step:{:.6}", step.location));
                if step.energy_error <= crate::lipm::ENERGY_BAND {
                    record.recovered = true;
                    recovering = false;
                } else if record.capture_steps >= max_steps {
                    failed = true;
                    recovering = false;
                }
            }
        }
        if walker.has_fallen() {
            fell = true;
        }
        if let Some(log) = log.as_deref_mut() {
            let poses = walker.poses(s.tick);
            log.push(k as f64 * s.tick, locomotion_row(&walker, &poses, skill, &events));
        }
        if fell {
            break;
        }
    }
    let all_recovered = pushes.len() == schedule.len() && pushes.iter().all(|p| p.recovered);
    Ok(PushOutcome {
        success: !failed && !fell && !recovering && all_recovered,
        pushes,
        capture_steps,
        fell,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushSearch {
    /// Largest push magnitude known to be recovered.
    pub delta_v: f64,
    /// Smallest push magnitude known to fail.
    pub failing: f64,
    pub trials: u32,
}

/// Bisection on the push magnitude until the bracket is narrower than
/// `tolerance`. The bracket always satisfies success(delta_v) and
/// failure(failing), except that a failure at zero reports zero for both.
pub fn max_recoverable_push(s: &Scenario, tolerance: f64) -> Result<PushSearch, HarnessError> {
    let mut trials = 0;
    let mut ok = |dv: f64| -> Result<bool, HarnessError> {
        trials += 1;
        Ok(push_trial(s, dv, None)?.success)
    };
    if !ok(0.0)? {
        return Ok(PushSearch {
            delta_v: 0.0,
            failing: 0.0,
            trials,
        });
    }
    let mut lo = 0.0;
    let mut hi = 0.5;
    while ok(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_SEARCH_DELTA_V {
            return Ok(PushSearch {
                delta_v: lo,
                failing: f64::INFINITY,
                trials,
            });
        }
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(PushSearch {
        delta_v: lo,
        failing: hi,
        trials,
    })
}

pub fn run_push_recovery(s: &Scenario) -> Result<RunOutput, HarnessError> {
    let mut log = TrajectoryLog::new(&LOCOMOTION_COLUMNS);
    let outcome = push_trial(s, configured_delta_v(s), Some(&mut log))?;
    let (max_push, retraction) = if s.push.find_max {
        let search = max_recoverable_push(s, s.push.search_tolerance)?;
        let p = &s.push;
        let retraction = retraction_for(
            search.delta_v,
            p.pendulum_mass,
            p.pendulum_length,
            p.transfer,
            s.robot.pendulum().mass,
            s.robot.gravity,
        );
        (Some(search.delta_v), retraction)
    } else {
        (None, None)
    };
    let details = Details::Push(PushMetrics {
        pushes: outcome.pushes,
        capture_steps: outcome.capture_steps,
        fell: outcome.fell,
        max_recoverable_push: max_push,
        max_recoverable_retraction: retraction,
    });
    Ok(RunOutput::new(s, outcome.success, Vec::new(), details, log))
}
