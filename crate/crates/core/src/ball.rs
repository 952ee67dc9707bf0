//! Ball tracking from discrete detections and interception timing.
//!
//! Detections go into a short sliding buffer; a per-axis quadratic least
//! squares fit gives position, velocity and acceleration at the newest
//! detection. Arrival at the foot line is the first crossing of that
//! parabola along the approach axis (egocentric x).

use std::collections::VecDeque;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kick::{schedule_kick, KickError, KickWindow, ScheduledKick};

/// Default spacing between detections (s).
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Error)]
pub enum BallError {
    #[error("detection at t={t} is not after the previous one at t={previous}")]
    NonMonotonicTime { t: f64, previous: f64 },
    #[error("need at least 3 detections, have {0}")]
    InsufficientData(usize),
    #[error("least-squares fit is degenerate")]
    DegenerateFit,
    #[error("intercept plan is infeasible")]
    InfeasiblePlan,
    #[error(transparent)]
    Kick(#[from] KickError),
    #[error("detection replay: {0}")]
    Replay(#[from] csv::Error),
    #[error("detection replay: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallDetection {
    pub t: f64,
    /// Egocentric position (m).
    pub position: [f64; 2],
}

impl BallDetection {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        Self { t, position: [x, y] }
    }

    pub fn range(&self) -> f64 {
        self.position[0].hypot(self.position[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackConfig {
    pub capacity: usize,
    pub max_range: f64,
    /// Largest accepted position change between consecutive detections.
    pub max_jump: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            capacity: 6,
            max_range: 10.0,
            max_jump: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackUpdate {
    Accepted,
    RejectedRange,
    RejectedJump,
    RejectedNonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallTrack {
    pub config: TrackConfig,
    buffer: VecDeque<BallDetection>,
}

impl Default for BallTrack {
    fn default() -> Self {
        Self::new(TrackConfig::default())
    }
}

impl BallTrack {
    pub fn new(config: TrackConfig) -> Self {
        Self {
            config,
            buffer: VecDeque::with_capacity(config.capacity),
        }
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn detections(&self) -> impl Iterator<Item = &BallDetection> {
        self.buffer.iter()
    }

    pub fn latest(&self) -> Option<&BallDetection> {
        self.buffer.back()
    }

    pub fn clear(&mut self) {
        self.buffer.clear();
    }
}

/// Pushes a detection into the sliding buffer, rejecting outliers.
pub fn update_track(track: &mut BallTrack, detection: BallDetection) -> Result<TrackUpdate, BallError> {
    if let Some(last) = track.buffer.back() {
        if detection.t.partial_cmp(&last.t) != Some(std::cmp::Ordering::Greater) {
            return Err(BallError::NonMonotonicTime {
                t: detection.t,
                previous: last.t,
            });
        }
    }
    if !(detection.t.is_finite() && detection.position.iter().all(|v| v.is_finite())) {
        return Ok(TrackUpdate::RejectedNonFinite);
    }
    if detection.range() > track.config.max_range {
        return Ok(TrackUpdate::RejectedRange);
    }
    if let Some(last) = track.buffer.back() {
        let jump = (detection.position[0] - last.position[0]).hypot(detection.position[1] - last.position[1]);
        if jump > track.config.max_jump {
            return Ok(TrackUpdate::RejectedJump);
        }
    }
    if track.buffer.len() == track.config.capacity.max(1) {
        track.buffer.pop_front();
    }
    track.buffer.push_back(detection);
    Ok(TrackUpdate::Accepted)
}

/// Fitted ball kinematics at `t_ref`, the time of the newest detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallEstimate {
    pub p: [f64; 2],
    pub v: [f64; 2],
    pub a: [f64; 2],
    pub t_ref: f64,
    /// RMS distance between the detections and the fitted curve (m).
    pub residual: f64,
}

impl BallEstimate {
    /// Position along one axis `dt` seconds after `t_ref` under the fitted
    /// quadratic model.
    pub fn position_at(&self, axis: usize, dt: f64) -> f64 {
        self.p[axis] + self.v[axis] * dt + 0.5 * self.a[axis] * dt * dt
    }
}

/// Per-axis quadratic least-squares fit over the buffered detections.
/// Time is measured from the newest detection in units of `epsilon`, which
/// keeps the design matrix well conditioned for any absolute clock.
pub fn estimate(track: &BallTrack, epsilon: f64) -> Result<BallEstimate, BallError> {
    let n = track.len();
    if n < 3 {
        return Err(BallError::InsufficientData(n));
    }
    let scale = if epsilon.is_finite() && epsilon > 0.0 {
        epsilon
    } else {
        DEFAULT_EPSILON
    };
    let t_ref = track.latest().map(|d| d.t).unwrap_or_default();
    let design = DMatrix::from_fn(n, 3, |i, j| {
        let s = (track.buffer[i].t - t_ref) / scale;
        match j {
            0 => 1.0,
            1 => s,
            _ => 0.5 * s * s,
        }
    });
    let svd = design.clone().svd(true, true);
    if svd.rank(1e-9) < 3 {
        return Err(BallError::DegenerateFit);
    }
    let mut p = [0.0; 2];
    let mut v = [0.0; 2];
    let mut a = [0.0; 2];
    let mut squared = 0.0;
    for axis in 0..2 {
        let rhs = DVector::from_iterator(n, track.buffer.iter().map(|d| d.position[axis]));
        let coef = svd.solve(&rhs, 1e-12).map_err(|_| BallError::DegenerateFit)?;
        p[axis] = coef[0];
        v[axis] = coef[1] / scale;
        a[axis] = coef[2] / (scale * scale);
        squared += (&design * &coef - rhs).norm_squared();
    }
    Ok(BallEstimate {
        p,
        v,
        a,
        t_ref,
        residual: (squared / n as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterceptPlan {
    /// Absolute time at which the ball crosses the foot line.
    pub arrival_time: f64,
    /// When the kick motion has to start for its apex to meet the ball.
    pub trigger_time: f64,
    pub feasible: bool,
}

impl InterceptPlan {
    fn infeasible(t_ref: f64) -> Self {
        Self {
            arrival_time: t_ref,
            trigger_time: t_ref,
            feasible: false,
        }
    }
}

/// Smallest positive root of `a t^2 / 2 + v t + c = 0`, ignoring roots after
/// the ball has stopped when it decelerates.
fn first_crossing(c: f64, v: f64, a: f64) -> Option<f64> {
    let stop = if a != 0.0 && v * a < 0.0 { -v / a } else { f64::INFINITY };
    let roots: Vec<f64> = if a.abs() < 1e-12 {
        if v == 0.0 {
            vec![]
        } else {
            vec![-c / v]
        }
    } else {
        let (qa, qb) = (0.5 * a, v);
        let disc = qb * qb - 4.0 * qa * c;
        if disc < 0.0 {
            vec![]
        } else {
            let sign = if qb >= 0.0 { 1.0 } else { -1.0 };
            let q = -0.5 * (qb + sign * disc.sqrt());
            let mut r = vec![q / qa];
            if q != 0.0 {
                r.push(c / q);
            }
            r
        }
    };
    roots
        .into_iter()
        .filter(|t| t.is_finite() && *t > 0.0 && *t <= stop)
        .min_by(f64::total_cmp)
}

/// Time at which the ball reaches the foot line at `foot_line_distance`
/// along the approach axis. The trigger time places the apex of a kick of
/// length `kick_duration` on the arrival.
pub fn predict_arrival(est: &BallEstimate, foot_line_distance: f64, kick_duration: f64) -> InterceptPlan {
    let (p, v, a) = (est.p[0], est.v[0], est.a[0]);
    match first_crossing(p - foot_line_distance, v, a) {
        Some(t) => InterceptPlan {
            arrival_time: est.t_ref + t,
            trigger_time: est.t_ref + t - 0.5 * kick_duration,
            feasible: true,
        },
        None => InterceptPlan::infeasible(est.t_ref),
    }
}

/// Kick timed so that its apex meets the predicted arrival inside `win`.
pub fn plan_trigger(
    plan: &InterceptPlan,
    win: &KickWindow,
    duration: f64,
    amplitude: f64,
    sigma: f64,
) -> Result<ScheduledKick, BallError> {
    if !plan.feasible {
        return Err(BallError::InfeasiblePlan);
    }
    Ok(schedule_kick(win, duration, amplitude, sigma, plan.arrival_time)?)
}

#[derive(Debug, Deserialize)]
struct ReplayRow {
    t: f64,
    x: f64,
    y: f64,
}

/// Reads a detection stream from CSV with the header `t,x,y`.
pub fn read_detections<R: Read>(reader: R) -> Result<Vec<BallDetection>, BallError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize::<ReplayRow>()
        .map(|row| row.map(|r| BallDetection::new(r.t, r.x, r.y)).map_err(BallError::from))
        .collect()
}

pub fn read_detections_file(path: &Path) -> Result<Vec<BallDetection>, BallError> {
    read_detections(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track_from(points: &[(f64, f64, f64)]) -> BallTrack {
        let mut track = BallTrack::default();
        for &(t, x, y) in points {
            assert_eq!(
                update_track(&mut track, BallDetection::new(t, x, y)).unwrap(),
                TrackUpdate::Accepted
            );
        }
        track
    }

    #[test]
    fn buffer_keeps_latest_six() {
        let mut track = BallTrack::default();
        update_track(&mut track, BallDetection::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(track.len(), 1);
        for i in 1..7 {
            update_track(&mut track, BallDetection::new(i as f64 * 0.1, 1.0, 0.0)).unwrap();
        }
        assert_eq!(track.len(), 6);
        assert!((track.detections().next().unwrap().t - 0.1).abs() < 1e-12);
    }

    #[test]
    fn outliers_are_rejected() {
        let mut track = track_from(&[(0.0, 2.0, 0.0)]);
        let jump = update_track(&mut track, BallDetection::new(0.1, 6.0, 0.0)).unwrap();
        assert_eq!(jump, TrackUpdate::RejectedJump);
        let far = update_track(&mut track, BallDetection::new(0.2, 9.0, 6.0)).unwrap();
        assert_eq!(far, TrackUpdate::RejectedRange);
        assert_eq!(track.len(), 1);
    }

    #[test]
    fn time_must_increase() {
        let mut track = track_from(&[(1.0, 2.0, 0.0)]);
        assert!(matches!(
            update_track(&mut track, BallDetection::new(1.0, 2.0, 0.0)),
            Err(BallError::NonMonotonicTime { .. })
        ));
    }

    #[test]
    fn too_few_detections() {
        let track = track_from(&[(0.0, 1.0, 0.0), (0.1, 1.0, 0.0)]);
        assert!(matches!(estimate(&track, 0.1), Err(BallError::InsufficientData(2))));
    }

    #[test]
    fn stationary_ball() {
        let track = track_from(&[(0.0, 2.0, 1.0), (0.1, 2.0, 1.0), (0.2, 2.0, 1.0)]);
        let est = estimate(&track, 0.1).unwrap();
        for axis in 0..2 {
            assert!(est.v[axis].abs() < 1e-12 && est.a[axis].abs() < 1e-12);
        }
        assert!(est.residual < 1e-12);
    }

    #[test]
    fn constant_velocity() {
        let pts: Vec<_> = (0..6).map(|i| (i as f64 * 0.1, 1.0 + i as f64 * 0.1, 0.0)).collect();
        let est = estimate(&track_from(&pts), 0.1).unwrap();
        assert!((est.v[0] - 1.0).abs() < 1e-9 && est.a[0].abs() < 1e-9);
    }

    #[test]
    fn linear_arrival() {
        let est = BallEstimate {
            p: [2.0, 0.0],
            v: [-1.0, 0.0],
            a: [0.0; 2],
            t_ref: 0.0,
            residual: 0.0,
        };
        let plan = predict_arrival(&est, 0.0, 0.4);
        assert!(plan.feasible && (plan.arrival_time - 2.0).abs() < 1e-12);
        assert!((plan.trigger_time - 1.8).abs() < 1e-12);
    }

    #[test]
    fn smallest_positive_root() {
        assert!((first_crossing(3.0, -2.0, 0.5).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(first_crossing(3.0, -1.0, 0.5), None);
        // moving away, accelerating back: crossing exists after turnaround only
        // when not decelerating towards a stop
        assert_eq!(first_crossing(1.0, 1.0, 0.0), None);
    }

    #[test]
    fn infeasible_plan_cannot_trigger() {
        let plan = InterceptPlan::infeasible(0.0);
        let win = KickWindow::new(0.0, 1.0, 0.1, 0.1).unwrap();
        assert!(matches!(
            plan_trigger(&plan, &win, 0.4, 0.3, 0.25),
            Err(BallError::InfeasiblePlan)
        ));
    }

    #[test]
    fn replay_parses_csv() {
        let data = "t,x,y\n0.0, 2.0, 0.1\n0.1,1.85,0.1\n";
        let dets = read_detections(data.as_bytes()).unwrap();
        assert_eq!(dets.len(), 2);
        assert_eq!(dets[1], BallDetection::new(0.1, 1.85, 0.1));
    }
}
