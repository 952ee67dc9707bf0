//! One gait cycle of the open-loop pattern generator, converted to joint
//! angles by inverse kinematics. Prints CSV.

use humanoid_soccer::gait::{
    abstract_to_cartesian, advance_phase, cartesian_to_joint, cpg_waveform, support_coefficient, GaitParams, GaitPhase,
    Leg, LegLinks,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = GaitParams::default();
    let links = LegLinks::default();
    let dt = 0.02;
    let ticks = (1.0 / (params.frequency * dt)).round() as usize;
    let mut phase = GaitPhase::new(0.0);
    println!("mu,leg,leg_angle,extension,hip_pitch,knee,ankle_pitch,support");
    for _ in 0..ticks {
        let poses = cpg_waveform(phase, &params);
        let support = support_coefficient(phase, &params);
        for (leg, s) in [(Leg::Left, support.0), (Leg::Right, support.1)] {
            let pose = poses.get(leg);
            let q = cartesian_to_joint(&abstract_to_cartesian(pose, links.length())?, &links)?;
            println!(
                "{:.6},{leg:?},{:.6},{:.6},{:.6},{:.6},{:.6},{s:.6}",
                phase.mu(),
                pose.leg_angle_sagittal,
                pose.leg_extension,
                q.hip_pitch,
                q.knee,
                q.ankle_pitch
            );
        }
        phase = advance_phase(phase, &params, dt);
    }
    Ok(())
}
