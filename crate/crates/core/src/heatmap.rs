//! Gaussian blob heatmaps: target encoding and sub-pixel blob decoding.
//!
//! Cell `(x, y)` has its center at integer coordinates; decoded positions
//! use the same convention.

use std::collections::VecDeque;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HeatmapError {
    #[error("heatmap dimensions {width}x{height} do not match {len} values")]
    Shape { width: usize, height: usize, len: usize },
    #[error("heatmap value {value} at index {index} is negative or not finite")]
    InvalidValue { index: usize, value: f64 },
    #[error("malformed PGM: {0}")]
    Pgm(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl Heatmap {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self, HeatmapError> {
        if values.len() != width * height {
            return Err(HeatmapError::Shape {
                width,
                height,
                len: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(HeatmapError::InvalidValue { index, value });
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Row-major cell values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Object classes with their own blob width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlobClass {
    Ball,
    Goalpost,
    Robot,
}

impl BlobClass {
    /// Default blob sigma in output-resolution pixels; robots get a wider blob.
    pub fn default_sigma(self) -> f64 {
        match self {
            BlobClass::Ball | BlobClass::Goalpost => 2.0,
            BlobClass::Robot => 4.0,
        }
    }
}

/// Heatmap with a unit-peak Gaussian around each center. Overlapping blobs
/// are combined with `max`, so every peak stays at 1.
pub fn encode_targets(centers: &[(f64, f64)], blob_sigma: f64, size: (usize, usize)) -> Heatmap {
    let (w, h) = size;
    let mut map = Heatmap::zeros(w, h);
    let denom = 2.0 * blob_sigma * blob_sigma;
    for y in 0..h {
        for x in 0..w {
            let cell = &mut map.values[y * w + x];
            for &(cx, cy) in centers {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                *cell = cell.max((-d2 / denom).exp());
            }
        }
    }
    map
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobDetection {
    pub x: f64,
    pub y: f64,
    /// Peak value inside the component.
    pub score: f64,
    /// Cells in the component.
    pub area: usize,
}

/// 8-connected components above `threshold`, each reduced to its
/// intensity-weighted centroid. Sorted by descending score.
pub fn decode_blobs(map: &Heatmap, threshold: f64) -> Vec<BlobDetection> {
    let (w, h) = (map.width, map.height);
    let mut visited = vec![false; w * h];
    let mut found: Vec<(usize, BlobDetection)> = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..w * h {
        if visited[seed] || map.values[seed] <= threshold {
            continue;
        }
        visited[seed] = true;
        queue.push_back(seed);
        let (mut sum, mut sx, mut sy, mut peak, mut area) = (0.0, 0.0, 0.0, 0.0_f64, 0);
        while let Some(idx) = queue.pop_front() {
            let (x, y) = (idx % w, idx / w);
            let v = map.values[idx];
            sum += v;
            sx += v * x as f64;
            sy += v * y as f64;
            peak = peak.max(v);
            area += 1;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let n = ny as usize * w + nx as usize;
                    if !visited[n] && map.values[n] > threshold {
                        visited[n] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        found.push((
            seed,
            BlobDetection {
                x: sx / sum,
                y: sy / sum,
                score: peak,
                area,
            },
        ));
    }
    found.sort_by(|a, b| b.1.score.total_cmp(&a.1.score).then(a.0.cmp(&b.0)));
    found.into_iter().map(|(_, d)| d).collect()
}

/// Writes a binary 16-bit PGM. Values are clamped to `[0, 1]` and scaled to
/// the full 16-bit range, row-major, big-endian.
pub fn write_pgm<W: Write>(map: &Heatmap, mut out: W) -> Result<(), HeatmapError> {
    write!(out, "P5\n{} {}\n65535\n", map.width, map.height)?;
    let mut bytes = Vec::with_capacity(map.values.len() * 2);
    for v in &map.values {
        let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        bytes.extend_from_slice(&q.to_be_bytes());
    }
    out.write_all(&bytes)?;
    Ok(())
}

/// Reads a binary 16-bit PGM written by [`write_pgm`]; cells come back
/// scaled to `[0, 1]`.
pub fn read_pgm<R: Read>(mut input: R) -> Result<Heatmap, HeatmapError> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(HeatmapError::Pgm("truncated header".into()));
        }
        fields.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(HeatmapError::Pgm(format!("unsupported magic {}", fields[0])));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| HeatmapError::Pgm(format!("bad number {s}")))
    };
    let (w, h, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval != 65535 {
        return Err(HeatmapError::Pgm(format!("expected 16-bit maxval, got {maxval}")));
    }
    let body = data.get(pos..).unwrap_or_default();
    if body.len() != w * h * 2 {
        return Err(HeatmapError::Pgm(format!(
            "expected {} data bytes, got {}",
            w * h * 2,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / 65535.0)
        .collect();
    Heatmap::from_values(w, h, values)
}
