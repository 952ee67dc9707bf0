//! Encodes ball and robot blobs into a heatmap, writes it as a 16-bit PGM,
//! reads it back and decodes the blob centers.
//!
//!     cargo run --example heatmap_pgm -- [out.pgm]

use std::fs::File;
use std::io::BufWriter;

use humanoid_soccer::heatmap::{decode_blobs, encode_targets, read_pgm, write_pgm, BlobClass, HeatmapError};

fn main() -> Result<(), HeatmapError> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "heatmap.pgm".into());
    let balls = [(12.3, 20.7), (40.0, 9.45)];
    let map = encode_targets(&balls, BlobClass::Ball.default_sigma(), (64, 32));
    write_pgm(&map, BufWriter::new(File::create(&path)?))?;
    let back = read_pgm(File::open(&path)?)?;
    println!("wrote {path} ({}x{})", back.width(), back.height());
    for blob in decode_blobs(&back, 0.1) {
        println!(
            "blob at ({:.3}, {:.3}) score {:.3} area {}",
            blob.x, blob.y, blob.score, blob.area
        );
    }
    println!("true centers {balls:?}");
    Ok(())
}
