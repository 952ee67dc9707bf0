//! Places an in-walk kick so that its apex meets a given time inside the
//! next swing of the right leg, and prints the augmented leg angle.
//!
//!     cargo run --example kick_timing -- [apex_time]

use humanoid_soccer::gait::{cpg_waveform, swing_window, GaitParams, GaitPhase, Leg};
use humanoid_soccer::kick::{augment_leg_angle, schedule_kick, start_time, KickError, KickWindow};

fn main() -> Result<(), KickError> {
    let params = GaitParams {
        frequency: 0.5,
        ..GaitParams::default()
    };
    let phase = GaitPhase::new(0.0);
    let (t_start, t_end) = swing_window(phase, &params, Leg::Right, 0.0);
    let window = KickWindow::new(t_start, t_end, 0.05, 0.05)?;
    let apex: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(0.5 * (t_start + t_end));

    let kick = schedule_kick(&window, 0.35, 0.35, 0.25, apex)?;
    let tk = start_time(&window, &kick.motion)?;
    eprintln!(
        "swing {t_start:.3}..{t_end:.3} s, lambda {:.4}, start {tk:.3} s, apex {:.3} s{}",
        kick.motion.lambda,
        tk + 0.5 * kick.motion.duration,
        if kick.apex_clamped { " (clamped)" } else { "" }
    );

    let phi = cpg_waveform(phase, &params).right.leg_angle_sagittal;
    println!("t,leg_angle");
    let mut t = t_start;
    while t <= t_end + 1e-9 {
        println!("{t:.6},{:.6}", augment_leg_angle(phi, t, &window, &kick.motion)?);
        t += 0.01;
    }
    Ok(())
}
