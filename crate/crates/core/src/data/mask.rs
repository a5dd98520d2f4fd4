//! Cartesian undersampling patterns.
//!
//! Patterns are built in centered layout (DC in the middle) and converted to
//! the operator's DC-at-origin layout on return.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::operator::SamplingMask;
use crate::rng::{stream_rng, Stream};

/// Allowed relative deviation of the achieved acceleration from its target.
pub const RATE_TOLERANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskKind {
    /// Whole phase-encode lines (rows) drawn with a Gaussian density around DC.
    VariableDensity1d,
    /// Individual k-space points drawn uniformly.
    UniformRandom2d,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaskSpec {
    pub kind: MaskKind,
    pub target_r: f64,
    pub acs_lines: usize,
    pub seed: u64,
}

impl Default for MaskSpec {
    fn default() -> Self {
        Self {
            kind: MaskKind::UniformRandom2d,
            target_r: 1.8,
            acs_lines: 32,
            seed: 0,
        }
    }
}

/// Start of a centered band of `width` entries along an axis of length `n`.
fn acs_start(n: usize, width: usize) -> usize {
    (n / 2).saturating_sub(width / 2).min(n - width)
}

fn infeasible(msg: String) -> Error {
    Error::InvalidArgument(format!("infeasible sampling rate: {msg}"))
}

pub fn gen_mask(spec: &MaskSpec, rows: usize, cols: usize) -> Result<SamplingMask> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("mask dimensions must be positive"));
    }
    if spec.kind == MaskKind::Full {
        return SamplingMask::full(rows, cols);
    }
    if !(spec.target_r > 1.0 && spec.target_r.is_finite()) {
        return Err(Error::invalid(format!("target acceleration must be > 1, got {}", spec.target_r)));
    }
    if spec.acs_lines > rows {
        return Err(Error::invalid(format!(
            "{} ACS lines exceed {rows} rows",
            spec.acs_lines
        )));
    }
    let mut rng = stream_rng(spec.seed, Stream::Mask);
    let mut centered = vec![false; rows * cols];
    let acs = spec.acs_lines;
    match spec.kind {
        MaskKind::VariableDensity1d => {
            let lines = (rows as f64 / spec.target_r).round() as usize;
            if acs > lines {
                return Err(infeasible(format!("{acs} ACS lines exceed the budget of {lines} lines")));
            }
            let a0 = acs_start(rows, acs);
            let mut chosen: Vec<bool> = (0..rows).map(|r| r >= a0 && r < a0 + acs).collect();
            let candidates: Vec<usize> = (0..rows).filter(|&r| !chosen[r]).collect();
            let center = (rows / 2) as f64;
            let std = rows as f64 / 6.0;
            let picks = index::sample_weighted(
                &mut rng,
                candidates.len(),
                |i| {
                    let d = candidates[i] as f64 - center;
                    (-0.5 * (d / std).powi(2)).exp()
                },
                lines - acs,
            )
            .map_err(|e| Error::invalid(format!("line sampling failed: {e}")))?;
            if picks.len() != lines - acs {
                return Err(infeasible("not enough lines with nonzero density".into()));
            }
            for i in picks.iter() {
                chosen[candidates[i]] = true;
            }
            for (r, &on) in chosen.iter().enumerate() {
                if on {
                    centered[r * cols..(r + 1) * cols].fill(true);
                }
            }
        }
        MaskKind::UniformRandom2d => {
            let budget = ((rows * cols) as f64 / spec.target_r).round() as usize;
            let acs_c = acs.min(cols);
            if acs * acs_c > budget {
                return Err(infeasible(format!(
                    "{acs}x{acs_c} ACS block exceeds the budget of {budget} samples"
                )));
            }
            let (r0, c0) = (acs_start(rows, acs), acs_start(cols, acs_c));
            for r in r0..r0 + acs {
                centered[r * cols + c0..r * cols + c0 + acs_c].fill(true);
            }
            let candidates: Vec<usize> = (0..rows * cols).filter(|&i| !centered[i]).collect();
            for i in index::sample(&mut rng, candidates.len(), budget - acs * acs_c).iter() {
                centered[candidates[i]] = true;
            }
        }
        MaskKind::Full => unreachable!(),
    }
    let mask = SamplingMask::from_centered(rows, cols, &centered)?;
    let achieved = mask.acceleration();
    if (achieved - spec.target_r).abs() > RATE_TOLERANCE * spec.target_r {
        return Err(infeasible(format!(
            "achieved R = {achieved:.4} is not within 5% of {}",
            spec.target_r
        )));
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: MaskKind, r: f64) -> MaskSpec {
        MaskSpec {
            kind,
            target_r: r,
            acs_lines: 32,
            seed: 3,
        }
    }

    #[test]
    fn variable_density_hits_rate_and_keeps_center() {
        let m = gen_mask(&spec(MaskKind::VariableDensity1d, 1.8), 320, 320).unwrap();
        assert!((m.acceleration() - 1.8).abs() <= 0.09);
        let c = m.to_centered();
        for r in 160 - 16..160 + 16 {
            assert!(c[r * 320..(r + 1) * 320].iter().all(|&k| k));
        }
        // Whole lines only.
        for r in 0..320 {
            let row = &c[r * 320..(r + 1) * 320];
            assert!(row.iter().all(|&k| k) || row.iter().all(|&k| !k));
        }
    }

    #[test]
    fn uniform_random_hits_rate_and_keeps_center_block() {
        let m = gen_mask(&spec(MaskKind::UniformRandom2d, 1.8), 128, 96).unwrap();
        assert!((m.acceleration() - 1.8).abs() <= 0.09);
        let c = m.to_centered();
        for r in 64 - 16..64 + 16 {
            for col in 48 - 16..48 + 16 {
                assert!(c[r * 96 + col]);
            }
        }
    }

    #[test]
    fn full_and_determinism() {
        let f = gen_mask(&spec(MaskKind::Full, 1.0), 10, 12).unwrap();
        assert_eq!(f.acceleration(), 1.0);
        let a = gen_mask(&spec(MaskKind::UniformRandom2d, 2.5), 64, 64).unwrap();
        assert_eq!(a, gen_mask(&spec(MaskKind::UniformRandom2d, 2.5), 64, 64).unwrap());
        let mut other = spec(MaskKind::UniformRandom2d, 2.5);
        other.seed = 4;
        assert_ne!(a, gen_mask(&other, 64, 64).unwrap());
    }

    #[test]
    fn infeasible_rates_are_rejected() {
        assert!(gen_mask(&spec(MaskKind::VariableDensity1d, 4.0), 64, 64).is_err());
        assert!(gen_mask(&spec(MaskKind::UniformRandom2d, 8.0), 40, 40).is_err());
        assert!(gen_mask(&spec(MaskKind::UniformRandom2d, 0.5), 64, 64).is_err());
        assert!(gen_mask(&spec(MaskKind::VariableDensity1d, 1.8), 16, 16).is_err());
    }
}
