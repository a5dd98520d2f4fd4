//! 8-bit binary PGM dumps for quick visual inspection.

use std::path::Path;

use super::format::write_file;
use crate::error::Result;
use crate::grid::ComplexGrid;

fn encode(rows: usize, cols: usize, values: impl Iterator<Item = f64>, scale: f64) -> Vec<u8> {
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(values.map(|v| (v * scale).round().clamp(0.0, 255.0) as u8));
    out
}

/// Magnitude image linearly scaled so its maximum maps to 255.
pub fn magnitude_pgm(img: &ComplexGrid) -> Vec<u8> {
    let max = img.magnitudes().into_iter().fold(0.0, f64::max);
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    encode(img.rows(), img.cols(), img.data().iter().map(|z| z.norm()), scale)
}

/// Absolute error `|truth − estimate|`, amplified by `gain`, on the truth's
/// magnitude scale.
pub fn error_pgm(truth: &ComplexGrid, estimate: &ComplexGrid, gain: f64) -> Vec<u8> {
    let max = truth.magnitudes().into_iter().fold(0.0, f64::max);
    let scale = if max > 0.0 { 255.0 * gain / max } else { 0.0 };
    encode(
        truth.rows(),
        truth.cols(),
        truth.data().iter().zip(estimate.data()).map(|(a, b)| (a - b).norm()),
        scale,
    )
}

pub fn write_pgm(path: &Path, bytes: &[u8]) -> Result<()> {
    write_file(path, |w| w.write_all(bytes))
}
