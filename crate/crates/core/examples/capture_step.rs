//! Pushes a walking pendulum and prints the capture steps that bring it
//! back to the limit cycle.
//!
//!     cargo run --example capture_step -- [delta_v]

use humanoid_soccer::lipm::{
    compute_capture_step, orbital_energy, predict, step_exchange, LimitCycle, LipmError, PendulumParams, StepLimits,
    ENERGY_BAND,
};

fn main() -> Result<(), LipmError> {
    let delta_v: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.6);
    let params = PendulumParams::new(0.75, 17.5)?;
    let cycle = LimitCycle::sagittal(0.1, 0.4)?;
    let limits = StepLimits::default();
    let target = cycle.target_energy(&params);

    let mut state = cycle.exchange_state(&params);
    state.velocity += delta_v;
    println!("push of {delta_v} m/s, target energy {target:.5} J/kg");
    println!("step  time_to_step  location  clamped  energy_error");
    for k in 1..=6 {
        let step = match compute_capture_step(&state, &params, &cycle, &limits) {
            Ok(step) => step,
            Err(LipmError::Uncapturable { best, energy_error }) => {
                println!("not capturable in one step (best error {energy_error:.2e}), taking the best step");
                best
            }
            Err(e) => return Err(e),
        };
        state = step_exchange(&predict(&state, &params, step.time_to_step)?, &step);
        let err = (orbital_energy(&state, &params) - target).abs();
        println!(
            "{k:>4}  {:>12.4}  {:>8.4}  {:>7}  {err:>12.2e}",
            step.time_to_step, step.step_location, step.clamped
        );
        if err <= ENERGY_BAND {
            println!("back on the limit cycle after {k} step(s)");
            return Ok(());
        }
    }
    println!("still outside the energy band");
    Ok(())
}
