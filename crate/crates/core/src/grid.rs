//! Dense 2-D complex raster shared by images, k-space and iterates.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major `rows × cols` grid of complex samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexGrid {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexGrid {
    /// Builds a grid, rejecting zero dimensions, length mismatches and
    /// non-finite samples.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("grid dimensions must be positive, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "grid data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "grid dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "grid dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Wraps already-validated samples without checking finiteness.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
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
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Euclidean norm over all real and imaginary components.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Conjugate inner product `Σ conj(self) · other`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.shape(), other.shape(), "inner product shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn ensure_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::invalid(format!(
                "{what}: shape {}x{} does not match {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        Ok(())
    }

    pub fn map(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&z| f(z)).collect())
    }

    /// Elementwise `f(self[i], other[i])`. Shapes must agree.
    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.shape(), other.shape(), "zip_map shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self::from_raw(self.rows, self.cols, data)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    /// Copies the `height × width` window whose top-left corner is `(r0, c0)`.
    pub fn window(&self, r0: usize, c0: usize, height: usize, width: usize) -> Self {
        assert!(r0 + height <= self.rows && c0 + width <= self.cols, "window out of bounds");
        let mut data = Vec::with_capacity(height * width);
        for r in r0..r0 + height {
            let start = r * self.cols + c0;
            data.extend_from_slice(&self.data[start..start + width]);
        }
        Self::from_raw(height, width, data)
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_checks() {
        assert!(ComplexGrid::new(0, 3, vec![]).is_err());
        assert!(ComplexGrid::new(2, 2, vec![Complex64::new(1.0, 0.0); 3]).is_err());
        let mut v = vec![Complex64::new(1.0, 0.0); 4];
        v[2].im = f64::NAN;
        assert!(ComplexGrid::new(2, 2, v).is_err());
        assert!(ComplexGrid::new(2, 2, vec![Complex64::new(1.0, 0.0); 4]).is_ok());
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_argument() {
        let a = ComplexGrid::from_fn(1, 1, |_, _| Complex64::new(0.0, 1.0));
        let b = ComplexGrid::from_fn(1, 1, |_, _| Complex64::new(0.0, 1.0));
        assert_eq!(a.inner(&b), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn window_copies_region() {
        let g = ComplexGrid::from_fn(4, 5, |r, c| Complex64::new(r as f64, c as f64));
        let w = g.window(1, 2, 2, 3);
        assert_eq!(w.shape(), (2, 3));
        assert_eq!(w.get(0, 0), Complex64::new(1.0, 2.0));
        assert_eq!(w.get(1, 2), Complex64::new(2.0, 4.0));
    }
}
