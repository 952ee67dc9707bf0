//! Vertical jump: ballistic flight from a given takeoff velocity.

use super::log::TrajectoryLog;
use super::metrics::{Details, JumpMetrics};
use super::scenario::Scenario;
use super::{HarnessError, RunOutput};

/// Airborne time of a vertical jump landing at takeoff height, `2 v / g`.
pub fn flight_time(takeoff_velocity: f64, gravity: f64) -> f64 {
    2.0 * takeoff_velocity / gravity
}

/// Takeoff velocity needed to stay airborne for `flight_time`, `g t / 2`.
pub fn takeoff_velocity(flight_time: f64, gravity: f64) -> f64 {
    0.5 * gravity * flight_time
}

pub fn run_high_jump(s: &Scenario) -> Result<RunOutput, HarnessError> {
    let g = s.robot.gravity;
    let v0 = s
        .jump
        .takeoff_velocity
        .unwrap_or_else(|| takeoff_velocity(s.jump.flight_time, g));
    if !(v0.is_finite() && v0 >= 0.0) {
        return Err(HarnessError::Config {
            path: "jump.takeoff_velocity".into(),
            message: "must be finite and non-negative".into(),
        });
    }
    let mut log = TrajectoryLog::new(&["height", "vertical_velocity", "events"]);
    let (mut z, mut vz) = (0.0_f64, v0);
    let mut t = 0.0;
    let mut apex: f64 = 0.0;
    let mut landed = v0 == 0.0;
    let mut simulated = 0.0;
    let mut first = true;
    while !landed {
        let dt = s.tick;
        let z_next = z + vz * dt - 0.5 * g * dt * dt;
        let mut events = if first { vec!["takeoff"] } else { Vec::new() };
        first = false;
        let step = if z_next <= 0.0 && vz - g * dt < 0.0 {
            // touchdown inside this tick: positive root of the ballistic arc
            let tau = (vz + (vz * vz + 2.0 * g * z).sqrt()) / g;
            landed = true;
            simulated = t + tau;
            events.push("landing");
            tau.min(dt)
        } else {
            dt
        };
        if vz > 0.0 && vz - g * step <= 0.0 {
            apex = apex.max(z + vz * vz / (2.0 * g));
        }
        z = (z + vz * step - 0.5 * g * step * step).max(0.0);
        vz -= g * step;
        if landed {
            z = 0.0;
        }
        t += dt;
        log.push(t, vec![z.into(), vz.into(), events.join(";").into()]);
    }
    let details = Details::Jump(JumpMetrics {
        takeoff_velocity: v0,
        flight_time: flight_time(v0, g),
        simulated_flight_time: simulated,
        apex_height: apex,
    });
    Ok(RunOutput::new(s, true, Vec::new(), details, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_pair() {
        assert_eq!(flight_time(0.0, 9.81), 0.0);
        let v = takeoff_velocity(0.262, 9.81);
        assert!((flight_time(v, 9.81) - 0.262).abs() < 1e-12);
        assert!((flight_time(2.0 * v, 9.81) - 0.524).abs() < 1e-12);
    }
}
