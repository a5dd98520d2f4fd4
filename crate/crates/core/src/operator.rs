//! Unitary 2-D FFT, k-space sampling masks and the masked Fourier operator
//! `A = M∘F` with its adjoint.
//!
//! Both transform directions carry a `1/√(rows·cols)` factor, so `F` is unitary
//! and `‖A‖₂ = 1` for every nonempty mask. Masks are stored with DC at index
//! `(0, 0)`; no fftshift happens inside the operator.

use std::sync::Arc;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::ComplexGrid;
use crate::rng::{stream_rng, Stream};

/// Precomputed row/column plans for one grid shape.
#[derive(Clone)]
pub struct Fft2 {
    rows: usize,
    cols: usize,
    fwd_row: Arc<dyn Fft<f64>>,
    inv_row: Arc<dyn Fft<f64>>,
    fwd_col: Arc<dyn Fft<f64>>,
    inv_col: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("rows", &self.rows).field("cols", &self.cols).finish()
    }
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("fft dimensions must be positive, got {rows}x{cols}")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            rows,
            cols,
            fwd_row: planner.plan_fft_forward(cols),
            inv_row: planner.plan_fft_inverse(cols),
            fwd_col: planner.plan_fft_forward(rows),
            inv_col: planner.plan_fft_inverse(rows),
        })
    }

    pub fn forward(&self, img: &ComplexGrid) -> Result<ComplexGrid> {
        self.run(img, &self.fwd_row, &self.fwd_col)
    }

    pub fn inverse(&self, ksp: &ComplexGrid) -> Result<ComplexGrid> {
        self.run(ksp, &self.inv_row, &self.inv_col)
    }

    fn run(&self, x: &ComplexGrid, row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) -> Result<ComplexGrid> {
        if x.shape() != (self.rows, self.cols) {
            return Err(Error::invalid(format!(
                "fft planned for {}x{} but got {}x{}",
                self.rows,
                self.cols,
                x.rows(),
                x.cols()
            )));
        }
        let (rows, cols) = (self.rows, self.cols);
        let mut data = x.data().to_vec();
        let mut scratch = vec![Complex64::default(); row.get_inplace_scratch_len().max(col.get_inplace_scratch_len())];

        // Rows are contiguous: transform them in one batched call.
        row.process_with_scratch(&mut data, &mut scratch[..row.get_inplace_scratch_len()]);

        let mut column = vec![Complex64::default(); rows];
        for c in 0..cols {
            for r in 0..rows {
                column[r] = data[r * cols + c];
            }
            col.process_with_scratch(&mut column, &mut scratch[..col.get_inplace_scratch_len()]);
            for r in 0..rows {
                data[r * cols + c] = column[r];
            }
        }

        let norm = 1.0 / ((rows * cols) as f64).sqrt();
        for z in &mut data {
            *z *= norm;
        }
        Ok(ComplexGrid::from_raw(rows, cols, data))
    }
}

/// Unitary forward 2-D DFT with DC at `(0, 0)`.
pub fn fft2(img: &ComplexGrid) -> Result<ComplexGrid> {
    Fft2::new(img.rows(), img.cols())?.forward(img)
}

/// Unitary inverse 2-D DFT.
pub fn ifft2(ksp: &ComplexGrid) -> Result<ComplexGrid> {
    Fft2::new(ksp.rows(), ksp.cols())?.inverse(ksp)
}

/// Boolean k-space selection in DC-at-origin layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingMask {
    rows: usize,
    cols: usize,
    keep: Vec<bool>,
    sampled: usize,
}

impl SamplingMask {
    pub fn new(rows: usize, cols: usize, keep: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("mask dimensions must be positive, got {rows}x{cols}")));
        }
        if keep.len() != rows * cols {
            return Err(Error::invalid(format!(
                "mask length {} does not match {rows}x{cols}",
                keep.len()
            )));
        }
        let sampled = keep.iter().filter(|&&k| k).count();
        if sampled == 0 {
            return Err(Error::invalid("mask samples no k-space location"));
        }
        Ok(Self {
            rows,
            cols,
            keep,
            sampled,
        })
    }

    pub fn full(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![true; rows * cols])
    }

    /// Builds a mask from a centered (DC-at-middle) layout.
    pub fn from_centered(rows: usize, cols: usize, centered: &[bool]) -> Result<Self> {
        if centered.len() != rows * cols {
            return Err(Error::invalid("centered mask length does not match its shape"));
        }
        let mut keep = vec![false; rows * cols];
        for r in 0..rows {
            let ur = unshift_index(r, rows);
            for c in 0..cols {
                keep[ur * cols + unshift_index(c, cols)] = centered[r * cols + c];
            }
        }
        Self::new(rows, cols, keep)
    }

    /// The same selection in centered (DC-at-middle) layout.
    pub fn to_centered(&self) -> Vec<bool> {
        let mut out = vec![false; self.rows * self.cols];
        for r in 0..self.rows {
            let ur = unshift_index(r, self.rows);
            for c in 0..self.cols {
                out[r * self.cols + c] = self.keep[ur * self.cols + unshift_index(c, self.cols)];
            }
        }
        out
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    #[inline]
    pub fn is_sampled(&self, r: usize, c: usize) -> bool {
        self.keep[r * self.cols + c]
    }

    /// Number of sampled locations `m`.
    #[inline]
    pub fn sampled(&self) -> usize {
        self.sampled
    }

    /// Acceleration `R = rows·cols / m`.
    pub fn acceleration(&self) -> f64 {
        (self.rows * self.cols) as f64 / self.sampled as f64
    }

    /// Zeroes every unsampled entry of `ksp` in place.
    pub fn apply_in_place(&self, ksp: &mut ComplexGrid) {
        for (z, &k) in ksp.data_mut().iter_mut().zip(&self.keep) {
            if !k {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Centered position → DC-at-origin position along one axis of length `n`.
#[inline]
pub fn unshift_index(centered: usize, n: usize) -> usize {
    (centered + n - n / 2) % n
}

/// DC-at-origin position → centered position along one axis of length `n`.
#[inline]
pub fn shift_index(unshifted: usize, n: usize) -> usize {
    (unshifted + n / 2) % n
}

/// `A = M∘F`: unitary DFT followed by row selection.
#[derive(Clone, Debug)]
pub struct ForwardOperator {
    mask: SamplingMask,
    fft: Fft2,
}

impl ForwardOperator {
    pub fn new(mask: SamplingMask) -> Result<Self> {
        let fft = Fft2::new(mask.rows(), mask.cols())?;
        Ok(Self { mask, fft })
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mask.shape()
    }

    fn check(&self, x: &ComplexGrid, what: &str) -> Result<()> {
        if x.shape() != self.shape() {
            return Err(Error::invalid(format!(
                "{what}: operator is {}x{} but input is {}x{}",
                self.mask.rows(),
                self.mask.cols(),
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }

    /// `mask ⊙ fft2(x)`; unsampled entries are exactly zero.
    pub fn apply_forward(&self, x: &ComplexGrid) -> Result<ComplexGrid> {
        self.check(x, "apply_forward")?;
        let mut k = self.fft.forward(x)?;
        self.mask.apply_in_place(&mut k);
        Ok(k)
    }

    /// `ifft2(mask ⊙ y)`. Unsampled entries of `y` are ignored.
    pub fn apply_adjoint(&self, y: &ComplexGrid) -> Result<ComplexGrid> {
        self.check(y, "apply_adjoint")?;
        let mut masked = y.clone();
        self.mask.apply_in_place(&mut masked);
        self.fft.inverse(&masked)
    }

    /// Power-iteration estimate of `‖A‖₂` after `iterations` applications of
    /// `AᴴA` to a seeded random start.
    pub fn operator_norm(&self, iterations: usize, seed: u64) -> Result<f64> {
        if iterations == 0 {
            return Err(Error::invalid("operator_norm needs at least one iteration"));
        }
        let mut rng = stream_rng(seed, Stream::Power);
        let (rows, cols) = self.shape();
        let mut x = ComplexGrid::from_fn(rows, cols, |_, _| {
            Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        let mut estimate = 0.0;
        for _ in 0..iterations {
            let n = x.norm();
            if n == 0.0 {
                // Start vector orthogonal to the sampled subspace.
                return Ok(estimate);
            }
            x = x.scale(1.0 / n);
            let ax = self.apply_forward(&x)?;
            estimate = f64::max(estimate, ax.norm() / x.norm());
            x = self.apply_adjoint(&ax)?;
        }
        Ok(estimate)
    }
}
