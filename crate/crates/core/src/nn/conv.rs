//! 3×3 "same" convolutions lowered to GEMM via im2col.
//!
//! Feature maps are channel-major `[channels, height, width]`. Column buffers
//! are `[cin·9, pixels]` with row index `(ci·3 + ky)·3 + kx`.

use std::fmt::Debug;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::Float;

/// Floating-point type the network can run in.
pub trait Real: Float + Default + Debug + Send + Sync + AddAssign + SubAssign + MulAssign + 'static {
    fn lit(v: f64) -> Self;
    fn as_f64(self) -> f64;

    /// `C ← α·A·B + β·C` on strided matrices (`A` is `m×k`, `B` is `k×n`).
    ///
    /// # Safety
    /// The pointers and strides must address valid, non-overlapping matrices.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );
}

impl Real for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f32,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

impl Real for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f64,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

/// Strided matrix view over a slice.
#[derive(Clone, Copy)]
pub(crate) struct Mat<'a, T> {
    pub data: &'a [T],
    pub rs: usize,
    pub cs: usize,
}

impl<'a, T> Mat<'a, T> {
    pub fn rows(data: &'a [T], cols: usize) -> Self {
        Self { data, rs: cols, cs: 1 }
    }

    /// Transposed view of a row-major matrix with `cols` columns.
    pub fn transposed(data: &'a [T], cols: usize) -> Self {
        Self { data, rs: 1, cs: cols }
    }
}

fn span(rows: usize, cols: usize, rs: usize, cs: usize) -> usize {
    if rows == 0 || cols == 0 {
        0
    } else {
        (rows - 1) * rs + (cols - 1) * cs + 1
    }
}

/// Safe wrapper around the GEMM kernel; `c` is row-major `m×n`.
pub(crate) fn gemm<T: Real>(m: usize, k: usize, n: usize, a: Mat<'_, T>, b: Mat<'_, T>, beta: T, c: &mut [T]) {
    assert!(span(m, k, a.rs, a.cs) <= a.data.len(), "gemm: A out of bounds");
    assert!(span(k, n, b.rs, b.cs) <= b.data.len(), "gemm: B out of bounds");
    assert!(m * n <= c.len(), "gemm: C out of bounds");
    // SAFETY: every index touched by the kernel lies inside the spans checked above.
    unsafe {
        T::gemm_raw(
            m,
            k,
            n,
            T::one(),
            a.data.as_ptr(),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr(),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        )
    }
}

/// Column buffer for output rows `y0..y1` of a zero-padded 3×3 convolution.
pub(crate) fn im2col<T: Real>(input: &[T], cin: usize, h: usize, w: usize, y0: usize, y1: usize, cols: &mut Vec<T>) {
    let band = (y1 - y0) * w;
    cols.clear();
    cols.resize(cin * 9 * band, T::zero());
    for ci in 0..cin {
        let plane = &input[ci * h * w..(ci + 1) * h * w];
        for ky in 0..3 {
            for kx in 0..3 {
                let row = &mut cols[((ci * 3 + ky) * 3 + kx) * band..][..band];
                for y in y0..y1 {
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    let src = &plane[sy as usize * w..(sy as usize + 1) * w];
                    let dst = &mut row[(y - y0) * w..(y - y0 + 1) * w];
                    match kx {
                        0 => dst[1..].copy_from_slice(&src[..w - 1]),
                        1 => dst.copy_from_slice(src),
                        _ => dst[..w - 1].copy_from_slice(&src[1..]),
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`] over the full image: accumulates `cols` into `out`.
pub(crate) fn col2im<T: Real>(cols: &[T], cin: usize, h: usize, w: usize, out: &mut [T]) {
    let hw = h * w;
    for ci in 0..cin {
        let plane = &mut out[ci * hw..(ci + 1) * hw];
        for ky in 0..3 {
            for kx in 0..3 {
                let row = &cols[((ci * 3 + ky) * 3 + kx) * hw..][..hw];
                for y in 0..h {
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    let dst = &mut plane[sy as usize * w..(sy as usize + 1) * w];
                    let src = &row[y * w..(y + 1) * w];
                    match kx {
                        0 => dst[..w - 1].iter_mut().zip(&src[1..]).for_each(|(d, &s)| *d += s),
                        1 => dst.iter_mut().zip(src).for_each(|(d, &s)| *d += s),
                        _ => dst[1..].iter_mut().zip(&src[..w - 1]).for_each(|(d, &s)| *d += s),
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn im2col_col2im_are_adjoint() {
        let (cin, h, w) = (2, 4, 5);
        let x: Vec<f64> = (0..cin * h * w).map(|i| (i as f64 * 0.37).sin()).collect();
        let d: Vec<f64> = (0..cin * 9 * h * w).map(|i| (i as f64 * 0.11).cos()).collect();
        let mut cols = Vec::new();
        im2col(&x, cin, h, w, 0, h, &mut cols);
        let lhs: f64 = cols.iter().zip(&d).map(|(a, b)| a * b).sum();
        let mut back = vec![0.0; cin * h * w];
        col2im(&d, cin, h, w, &mut back);
        let rhs: f64 = x.iter().zip(&back).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn banded_columns_match_full() {
        let (cin, h, w) = (3, 7, 4);
        let x: Vec<f64> = (0..cin * h * w).map(|i| i as f64).collect();
        let mut full = Vec::new();
        im2col(&x, cin, h, w, 0, h, &mut full);
        let mut band = Vec::new();
        im2col(&x, cin, h, w, 2, 5, &mut band);
        for q in 0..cin * 9 {
            assert_eq!(&band[q * 3 * w..(q + 1) * 3 * w], &full[q * h * w + 2 * w..q * h * w + 5 * w]);
        }
    }

    #[test]
    fn gemm_with_transposed_operand() {
        // [1 2; 3 4]ᵀ · [1; 1]
        let a = [1.0f64, 2.0, 3.0, 4.0];
        let b = [1.0f64, 1.0];
        let mut c = [0.0f64; 2];
        gemm(2, 2, 1, Mat::transposed(&a, 2), Mat::rows(&b, 1), 0.0, &mut c);
        assert_eq!(c, [4.0, 6.0]);
    }
}
