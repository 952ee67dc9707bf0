//! Reference implementations the library is checked against.

#![allow(dead_code)]

use humanoid_soccer::lipm::{orbital_energy, LimitCycle, LipmState, PendulumParams, ENERGY_BAND};

/// Fixed-step RK4 integration of `x'' = C^2 x`.
pub fn rk4(state: LipmState, c2: f64, horizon: f64, h: f64) -> LipmState {
    let n = (horizon / h).round() as usize;
    let dt = horizon / n.max(1) as f64;
    let (mut x, mut v) = (state.offset, state.velocity);
    let f = |x: f64, v: f64| (v, c2 * x);
    for _ in 0..n {
        let (k1x, k1v) = f(x, v);
        let (k2x, k2v) = f(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
        let (k3x, k3v) = f(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
        let (k4x, k4v) = f(x + dt * k3x, v + dt * k3v);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    LipmState {
        offset: x,
        velocity: v,
        time: state.time + horizon,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleResult {
    /// Smallest post-exchange energy error on the grid.
    pub best_error: f64,
    /// Some in-limit step reaches the energy band exactly (a sign change of
    /// the energy error between neighbouring grid locations, or a grid point
    /// already inside the band).
    pub capturable: bool,
}

fn heading(s: &LipmState) -> f64 {
    if s.velocity != 0.0 {
        s.velocity.signum()
    } else if s.offset != 0.0 {
        s.offset.signum()
    } else {
        1.0
    }
}

/// Brute-force search over `T in [t_min, t_max]` and `s in [-max_len,
/// max_len]` at `resolution`. Only pivots ahead of the CoM in its direction
/// of travel are admissible, the same rule the planner applies.
pub fn grid_oracle(
    state: &LipmState,
    params: &PendulumParams,
    cycle: &LimitCycle,
    (t_min, t_max): (f64, f64),
    max_len: f64,
    resolution: f64,
) -> OracleResult {
    let c = params.omega();
    let target = cycle.target_energy(params);
    let nt = ((t_max - t_min) / resolution).round() as usize;
    let ns = (2.0 * max_len / resolution).round() as usize;
    let mut best = f64::INFINITY;
    let mut capturable = false;
    for i in 0..=nt {
        let t = t_min + i as f64 * resolution;
        let (sh, ch) = ((c * t).sinh(), (c * t).cosh());
        let x = state.offset * ch + state.velocity / c * sh;
        let v = state.offset * c * sh + state.velocity * ch;
        let dir = heading(&LipmState::new(x, v));
        let mut prev: Option<f64> = None;
        for j in 0..=ns {
            let s = -max_len + j as f64 * resolution;
            if (s - x) * dir < 0.0 {
                prev = None;
                continue;
            }
            let d = 0.5 * v * v - 0.5 * c * c * (x - s) * (x - s) - target;
            best = best.min(d.abs());
            if d.abs() <= ENERGY_BAND || prev.is_some_and(|p| p * d < 0.0) {
                capturable = true;
            }
            prev = Some(d);
        }
    }
    OracleResult {
        best_error: best,
        capturable,
    }
}

pub fn energy_error(state: &LipmState, params: &PendulumParams, cycle: &LimitCycle) -> f64 {
    (orbital_energy(state, params) - cycle.target_energy(params)).abs()
}
