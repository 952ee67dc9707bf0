//! Undisturbed walking and the shared per-tick log layout for locomotion.

use crate::gait::{support_leg, Leg, LegPair};
use crate::lipm::LipmError;

use super::log::{TrajectoryLog, Value};
use super::metrics::{Details, WalkMetrics};
use super::scenario::Scenario;
use super::walker::Walker;
use super::{HarnessError, RunOutput};

pub(crate) const LOCOMOTION_COLUMNS: [&str; 12] = [
    "phase",
    "sag_offset",
    "sag_velocity",
    "lat_offset",
    "lat_velocity",
    "support",
    "left_leg_angle",
    "left_extension",
    "right_leg_angle",
    "right_extension",
    "skill",
    "events",
];

pub(crate) fn walker_for(s: &Scenario) -> Result<Walker, HarnessError> {
    Walker::new(s.robot.pendulum(), s.gait, s.walk.clone(), s.feedback).map_err(lipm_config)
}

pub(crate) fn lipm_config(e: LipmError) -> HarnessError {
    HarnessError::Config {
        path: "robot".into(),
        message: e.to_string(),
    }
}

pub(crate) fn locomotion_row(w: &Walker, poses: &LegPair, skill: &str, events: &[String]) -> Vec<Value> {
    let support = if w.is_standing() {
        "double"
    } else {
        match support_leg(w.phase, &w.gait) {
            Some(Leg::Left) => "left",
            Some(Leg::Right) => "right",
            None => "double",
        }
    };
    vec![
        w.phase.mu().into(),
        w.sagittal.offset.into(),
        w.sagittal.velocity.into(),
        w.lateral_offset_world().into(),
        w.lateral_velocity_world().into(),
        support.into(),
        poses.left.leg_angle_sagittal.into(),
        poses.left.leg_extension.into(),
        poses.right.leg_angle_sagittal.into(),
        poses.right.leg_extension.into(),
        skill.into(),
        events.join(";").into(),
    ]
}

pub(crate) fn tick_count(s: &Scenario, duration: f64) -> u64 {
    (duration / s.tick - 1e-9).ceil().max(0.0) as u64
}

pub fn run_walk(s: &Scenario) -> Result<RunOutput, HarnessError> {
    let mut walker = walker_for(s)?;
    let mut log = TrajectoryLog::new(&LOCOMOTION_COLUMNS);
    let ticks = tick_count(s, s.duration);
    let cycle_ticks = if s.gait.frequency > 0.0 {
        let exact = 1.0 / (s.gait.frequency * s.tick);
        ((exact - exact.round()).abs() < 1e-9).then(|| exact.round() as u64)
    } else {
        None
    };
    let mut samples: Vec<[f64; 5]> = Vec::new();
    let mut max_energy_error: f64 = 0.0;
    let mut fell = false;
    let skill = if walker.is_standing() { "stand" } else { "walk" };
    for k in 1..=ticks {
        walker.tick(s.tick).map_err(HarnessError::Lipm)?;
        max_energy_error = max_energy_error.max(walker.energy_error());
        fell |= walker.has_fallen();
        let poses = walker.poses(s.tick);
        log.push(k as f64 * s.tick, locomotion_row(&walker, &poses, skill, &[]));
        if cycle_ticks.is_some_and(|c| k % c == 0) {
            samples.push([
                walker.sagittal.offset,
                walker.sagittal.velocity,
                walker.lateral_offset_world(),
                walker.lateral_velocity_world(),
                walker.phase.mu(),
            ]);
        }
    }
    let periodicity_error = cycle_ticks.map(|_| {
        samples
            .windows(2)
            .skip(3)
            .flat_map(|w| (0..5).map(move |i| (w[1][i] - w[0][i]).abs()))
            .fold(0.0, f64::max)
    });
    let mut violations = Vec::new();
    if let Some(err) = periodicity_error {
        if err > 1e-6 {
            violations.push(format!("walk is not periodic: cycle-to-cycle change {err:.3e}"));
        }
    }
    if fell {
        violations.push("robot fell while walking undisturbed".into());
    }
    let details = Details::Walk(WalkMetrics {
        steps: walker.steps,
        max_energy_error,
        periodicity_error,
        fell,
    });
    Ok(RunOutput::new(
        s,
        violations.is_empty() && !fell,
        violations,
        details,
        log,
    ))
}
