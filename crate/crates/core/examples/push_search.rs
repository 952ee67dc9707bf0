//! Largest recoverable push across seeds and step-length limits.

use humanoid_soccer::harness::{max_recoverable_push, Scenario, ScenarioKind};

fn main() {
    let mut s = Scenario::new(ScenarioKind::PushRecovery);
    s.duration = 12.0;
    println!("seed  delta_v_max  failing  trials");
    for seed in 0..10 {
        s.seed = seed;
        let r = max_recoverable_push(&s, 0.005).expect("valid scenario");
        println!("{seed:>4}  {:>11.4}  {:>7.4}  {:>6}", r.delta_v, r.failing, r.trials);
    }
    s.seed = 0;
    println!("\nmax_step_length  delta_v_max");
    for len in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6] {
        s.walk.max_step_length = len;
        let r = max_recoverable_push(&s, 0.005).expect("valid scenario");
        println!("{len:>15.2}  {:>11.4}", r.delta_v);
    }
}
