use humanoid_soccer::harness::{
    max_recoverable_push, pendulum_push, push_trial, run_scenario, Details, Scenario, ScenarioKind,
};

fn push_scenario(seed: u64) -> Scenario {
    let mut s = Scenario::new(ScenarioKind::PushRecovery);
    s.seed = seed;
    s.duration = 12.0;
    s
}

#[test]
fn pendulum_push_arithmetic() {
    assert_eq!(pendulum_push(0.0, 5.0, 2.0, 0.8, 17.5, 9.81), 0.0);
    // a 1 m/s impact: draw-back r with 2 g L (1 - cos) = 1
    let theta = (1.0_f64 - 1.0 / (2.0 * 9.81 * 2.0)).acos();
    let r = 2.0 * theta.sin();
    let dv = pendulum_push(r, 5.0, 2.0, 1.0, 17.5, 9.81);
    assert!((dv - 5.0 / 17.5).abs() < 1e-12);
    assert!((pendulum_push(r, 5.0, 2.0, 0.5, 17.5, 9.81) * 2.0 - dv).abs() < 1e-12);
}

#[test]
fn zero_pushes_need_no_capture_steps() {
    let o = push_trial(&push_scenario(1), 0.0, None).unwrap();
    assert!(o.success);
    assert_eq!(o.capture_steps, 0);
}

#[test]
fn bisection_brackets_hold() {
    for seed in [2, 5] {
        let s = push_scenario(seed);
        let found = max_recoverable_push(&s, 0.01).unwrap();
        assert!(push_trial(&s, found.delta_v, None).unwrap().success);
        assert!(!push_trial(&s, found.failing, None).unwrap().success);
        assert!(found.failing - found.delta_v <= 0.01 * found.failing + 1e-12);
    }
}

#[test]
fn standing_robot_recovers_nothing() {
    let mut s = push_scenario(0);
    s.gait.frequency = 0.0;
    assert_eq!(max_recoverable_push(&s, 0.01).unwrap().delta_v, 0.0);
}

#[test]
fn undisturbed_walk_is_periodic() {
    let mut s = Scenario::new(ScenarioKind::Walk);
    s.duration = 10.0;
    s.walk.step_length = 0.2;
    let out = run_scenario(&s).unwrap();
    match out.metrics.details {
        Details::Walk(w) => {
            assert!(!w.fell);
            assert!(w.periodicity_error.unwrap() < 1e-6, "{w:?}");
        }
        other => panic!("{other:?}"),
    }
    assert!(out.metrics.violations.is_empty());
}

#[test]
fn ball_stopping_short_is_infeasible() {
    let mut s = Scenario::new(ScenarioKind::MovingBall);
    s.moving_ball.launch_speed = 0.6;
    s.moving_ball.speed_jitter = 0.0;
    match run_scenario(&s).unwrap().metrics.details {
        Details::MovingBall(m) => {
            assert_eq!(m.goals, 0);
            assert!(m.attempts.iter().all(|a| a.infeasible));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn single_striker_with_reliable_messages() {
    let mut s = Scenario::new(ScenarioKind::TeamPlay);
    s.duration = 60.0;
    match run_scenario(&s).unwrap().metrics.details {
        Details::Team(m) => assert_eq!(m.striker_violations, 0),
        other => panic!("{other:?}"),
    }
}
