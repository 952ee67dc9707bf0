//! Replays ball detections from a CSV file (columns t, x, y) through the
//! tracker and prints the predicted arrival at the foot line after every
//! detection. Without a file a synthetic rolling ball is used; `hsim run`
//! writes such files as `detections.csv`.
//!
//!     cargo run --example ball_replay -- [detections.csv] [foot_line]

use std::path::Path;

use humanoid_soccer::ball::{
    estimate, predict_arrival, read_detections_file, update_track, BallDetection, BallError, BallTrack, TrackUpdate,
    DEFAULT_EPSILON,
};

fn synthetic() -> Vec<BallDetection> {
    (0..14)
        .map(|i| {
            let t = 0.1 * i as f64;
            BallDetection::new(t, 2.0 - 1.5 * t + 0.15 * t * t, 0.02)
        })
        .collect()
}

fn main() -> Result<(), BallError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let detections = match args.first() {
        Some(p) => read_detections_file(Path::new(p))?,
        None => synthetic(),
    };
    let line: f64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(0.2);
    let mut track = BallTrack::default();
    println!("t,x,accepted,arrival");
    for d in detections {
        let update = update_track(&mut track, d)?;
        let arrival = match estimate(&track, DEFAULT_EPSILON) {
            Ok(est) => {
                let plan = predict_arrival(&est, line, 0.35);
                if plan.feasible {
                    format!("{:.6}", plan.arrival_time)
                } else {
                    "stops short".to_string()
                }
            }
            Err(_) => String::new(),
        };
        println!(
            "{:.6},{:.6},{},{arrival}",
            d.t,
            d.position[0],
            update == TrackUpdate::Accepted
        );
    }
    Ok(())
}
