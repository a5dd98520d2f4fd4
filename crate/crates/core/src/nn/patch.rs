use num_complex::Complex64;

use super::conv::Real;
use crate::error::{Error, Result};
use crate::grid::ComplexGrid;

/// Real-valued network input: channel 0 holds real parts, channel 1 imaginary
/// parts, each `height × width` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoChannelPatch<T: Real = f64> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> TwoChannelPatch<T> {
    pub const CHANNELS: usize = 2;

    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        Self::with_channels(height, width, Self::CHANNELS, data)
    }

    /// Like [`TwoChannelPatch::new`] but with an explicit channel count,
    /// which must be 2.
    pub fn with_channels(height: usize, width: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if channels != Self::CHANNELS {
            return Err(Error::invalid(format!("denoiser input needs 2 channels, got {channels}")));
        }
        let patch = Self { height, width, data };
        patch.validate()?;
        Ok(patch)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::invalid("patch dimensions must be positive"));
        }
        if self.data.len() != Self::CHANNELS * self.height * self.width {
            return Err(Error::invalid(format!(
                "patch data length {} is not 2x{}x{}",
                self.data.len(),
                self.height,
                self.width
            )));
        }
        Ok(())
    }

    pub fn from_grid(grid: &ComplexGrid) -> Self {
        let n = grid.len();
        let mut data = vec![T::zero(); 2 * n];
        for (i, z) in grid.data().iter().enumerate() {
            data[i] = T::lit(z.re);
            data[n + i] = T::lit(z.im);
        }
        Self {
            height: grid.rows(),
            width: grid.cols(),
            data,
        }
    }

    pub fn to_grid(&self) -> ComplexGrid {
        let n = self.height * self.width;
        let samples = (0..n)
            .map(|i| Complex64::new(self.data[i].as_f64(), self.data[n + i].as_f64()))
            .collect();
        ComplexGrid::from_raw(self.height, self.width, samples)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
