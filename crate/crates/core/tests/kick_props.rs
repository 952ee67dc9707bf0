use humanoid_soccer::kick::{augment_leg_angle, border_activation, kick_phase, start_time, KickMotion, KickWindow};
use proptest::prelude::*;

fn window() -> KickWindow {
    KickWindow::new(0.0, 1.0, 0.1, 0.1).unwrap()
}

proptest! {
    #[test]
    fn start_is_monotone_in_lambda(a in 0.0..=1.0f64, b in 0.0..=1.0f64, l in 0.05..0.79f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let s_lo = start_time(&window(), &KickMotion::new(l, lo, 0.3, 0.25).unwrap()).unwrap();
        let s_hi = start_time(&window(), &KickMotion::new(l, hi, 0.3, 0.25).unwrap()).unwrap();
        prop_assert!(s_lo <= s_hi);
    }

    #[test]
    fn phase_has_slope_two_over_l(t in -1.0..2.0f64, dt in 1e-3..0.5f64, l in 0.05..0.79f64) {
        let m = KickMotion::new(l, 0.3, 0.3, 0.25).unwrap();
        let a = kick_phase(t, &window(), &m).unwrap();
        let b = kick_phase(t + dt, &window(), &m).unwrap();
        prop_assert!(b > a);
        prop_assert!(((b - a) / dt - 2.0 / l).abs() < 1e-6 * (2.0 / l));
    }

    #[test]
    fn border_jump_is_bounded(sigma in 0.05..0.5f64, amp in 0.0..1.0f64) {
        let m = KickMotion::new(0.35, 0.5, amp, sigma).unwrap();
        let tk = start_time(&window(), &m).unwrap();
        for t in [tk, tk + 0.35] {
            let jump = (augment_leg_angle(0.0, t, &window(), &m).unwrap()).abs();
            prop_assert!((jump - amp * border_activation(sigma)).abs() < 1e-12);
        }
    }
}

#[test]
fn default_sigma_border_is_small() {
    assert!(border_activation(0.25) < 1e-3);
    assert!(border_activation(0.3) <= 4e-3);
}
