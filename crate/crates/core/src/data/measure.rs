use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::grid::ComplexGrid;
use crate::operator::{fft2, SamplingMask};
use crate::rng::{stream_rng, Stream};

/// `y = mask ⊙ (fft2(x) + η)` with complex white noise of per-component
/// standard deviation `noise_std`.
pub fn synthesize_measurements(x: &ComplexGrid, mask: &SamplingMask, noise_std: f64, seed: u64) -> Result<ComplexGrid> {
    if x.shape() != mask.shape() {
        return Err(crate::Error::InvalidArgument(format!(
            "image is {}x{} but mask is {}x{}",
            x.rows(),
            x.cols(),
            mask.rows(),
            mask.cols()
        )));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(crate::Error::InvalidArgument(format!("noise std must be >= 0, got {noise_std}")));
    }
    let mut k = fft2(x)?;
    if noise_std > 0.0 {
        let mut rng = stream_rng(seed, Stream::Measurement);
        for z in k.data_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z += Complex64::new(re, im) * noise_std;
        }
    }
    mask.apply_in_place(&mut k);
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::ForwardOperator;

    fn image() -> ComplexGrid {
        ComplexGrid::from_fn(8, 8, |r, c| Complex64::new((r * c) as f64 * 0.1, r as f64 - c as f64))
    }

    fn mask() -> SamplingMask {
        SamplingMask::new(8, 8, (0..64).map(|i| i % 3 != 0).collect()).unwrap()
    }

    #[test]
    fn noiseless_equals_forward_operator() {
        let op = ForwardOperator::new(mask()).unwrap();
        let y = synthesize_measurements(&image(), &mask(), 0.0, 1).unwrap();
        assert_eq!(y, op.apply_forward(&image()).unwrap());
    }

    #[test]
    fn unsampled_entries_are_zero() {
        let m = mask();
        let y = synthesize_measurements(&image(), &m, 0.5, 2).unwrap();
        for (z, &k) in y.data().iter().zip(m.keep()) {
            if !k {
                assert_eq!(*z, Complex64::new(0.0, 0.0));
            }
        }
        assert_eq!(y, synthesize_measurements(&image(), &m, 0.5, 2).unwrap());
        assert!(synthesize_measurements(&ComplexGrid::zeros(4, 4), &m, 0.0, 0).is_err());
    }
}
