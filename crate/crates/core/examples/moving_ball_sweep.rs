//! Noisy moving-ball trials over many seeds: goals per run and the spread of
//! the predicted arrival times.

use humanoid_soccer::harness::{run_scenario, Details, Scenario, ScenarioKind};

fn main() {
    let runs: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    let noise: f64 = std::env::args().nth(2).and_then(|a| a.parse().ok()).unwrap_or(0.02);
    let mut histogram = [0u32; 4];
    let mut committed = Vec::new();
    let mut all = Vec::new();
    for seed in 0..runs {
        let mut s = Scenario::new(ScenarioKind::MovingBall);
        s.seed = seed;
        s.moving_ball.noise = noise;
        let out = run_scenario(&s).expect("valid scenario");
        if let Details::MovingBall(m) = out.metrics.details {
            histogram[m.goals.min(3) as usize] += 1;
            committed.extend(m.committed_arrival_errors);
            all.extend(m.estimate_arrival_errors);
        }
    }
    let within = |v: &[f64]| v.iter().filter(|e| **e <= 0.15).count() as f64 / v.len().max(1) as f64;
    println!("goals per run (0..=3): {histogram:?}");
    println!(
        "runs with at least 2 goals: {:.1}%",
        100.0 * (histogram[2] + histogram[3]) as f64 / runs as f64
    );
    println!(
        "committed estimates within 0.15 s: {:.1}% of {}",
        100.0 * within(&committed),
        committed.len()
    );
    println!(
        "all estimates within 0.15 s: {:.1}% of {}",
        100.0 * within(&all),
        all.len()
    );
}
