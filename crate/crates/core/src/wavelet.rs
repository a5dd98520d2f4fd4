//! Orthonormal multi-level Haar transform and the L1 soft-threshold prox.
//!
//! Coefficients use the usual Mallat layout: after each level the
//! approximation band occupies the top-left quarter of the active region and
//! the next level recurses into it. The transform is real, so it acts on the
//! real and imaginary parts independently.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::ComplexGrid;

/// Decomposition depth and regularization weight `λ` of the L1 prior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveletConfig {
    pub levels: usize,
    pub lambda: f64,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self { levels: 4, lambda: 0.0 }
    }
}

impl WaveletConfig {
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        check_levels(rows, cols, self.levels)?;
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        Ok(())
    }
}

fn check_levels(rows: usize, cols: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::invalid("wavelet levels must be >= 1"));
    }
    let block = 1usize.checked_shl(levels as u32).unwrap_or(0);
    if block == 0 || !rows.is_multiple_of(block) || !cols.is_multiple_of(block) {
        return Err(Error::invalid(format!(
            "{rows}x{cols} grid is not divisible by 2^{levels}"
        )));
    }
    Ok(())
}

fn analyze_line(buf: &mut [Complex64], tmp: &mut [Complex64]) {
    let half = buf.len() / 2;
    for i in 0..half {
        let (a, b) = (buf[2 * i], buf[2 * i + 1]);
        tmp[i] = (a + b) * FRAC_1_SQRT_2;
        tmp[half + i] = (a - b) * FRAC_1_SQRT_2;
    }
    buf.copy_from_slice(&tmp[..buf.len()]);
}

fn synthesize_line(buf: &mut [Complex64], tmp: &mut [Complex64]) {
    let half = buf.len() / 2;
    for i in 0..half {
        let (s, d) = (buf[i], buf[half + i]);
        tmp[2 * i] = (s + d) * FRAC_1_SQRT_2;
        tmp[2 * i + 1] = (s - d) * FRAC_1_SQRT_2;
    }
    buf.copy_from_slice(&tmp[..buf.len()]);
}

/// Applies `line` to every row then every column of the top-left `h × w` block.
fn separable(data: &mut [Complex64], stride: usize, h: usize, w: usize, line: fn(&mut [Complex64], &mut [Complex64])) {
    let mut tmp = vec![Complex64::default(); h.max(w)];
    for r in 0..h {
        line(&mut data[r * stride..r * stride + w], &mut tmp);
    }
    let mut col = vec![Complex64::default(); h];
    for c in 0..w {
        for r in 0..h {
            col[r] = data[r * stride + c];
        }
        line(&mut col, &mut tmp);
        for r in 0..h {
            data[r * stride + c] = col[r];
        }
    }
}

/// Multi-level orthonormal Haar analysis `Ψx`.
pub fn dwt2(img: &ComplexGrid, levels: usize) -> Result<ComplexGrid> {
    let (rows, cols) = img.shape();
    check_levels(rows, cols, levels)?;
    let mut data = img.data().to_vec();
    for l in 0..levels {
        separable(&mut data, cols, rows >> l, cols >> l, analyze_line);
    }
    Ok(ComplexGrid::from_raw(rows, cols, data))
}

/// Inverse of [`dwt2`], `Ψᴴc`.
pub fn idwt2(coeffs: &ComplexGrid, levels: usize) -> Result<ComplexGrid> {
    let (rows, cols) = coeffs.shape();
    check_levels(rows, cols, levels)?;
    let mut data = coeffs.data().to_vec();
    for l in (0..levels).rev() {
        separable(&mut data, cols, rows >> l, cols >> l, synthesize_line);
    }
    Ok(ComplexGrid::from_raw(rows, cols, data))
}

/// Complex soft threshold: shrinks `|v|` by `min(t, |v|)`, keeps the phase.
#[inline]
pub fn soft_threshold(v: Complex64, t: f64) -> Complex64 {
    let mag = v.norm();
    if mag <= t || mag == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        v * ((mag - t) / mag)
    }
}

/// `λ‖Ψx‖₁` with the complex modulus as the per-coefficient magnitude.
pub fn l1_penalty(x: &ComplexGrid, cfg: &WaveletConfig) -> Result<f64> {
    Ok(cfg.lambda * dwt2(x, cfg.levels)?.data().iter().map(|z| z.norm()).sum::<f64>())
}

/// Exact proximal operator of `νλ‖Ψ·‖₁`: `Ψᴴ soft(Ψu, νλ)`.
pub fn wavelet_prox_denoise(u: &ComplexGrid, cfg: &WaveletConfig, nu: f64) -> Result<ComplexGrid> {
    cfg.validate(u.rows(), u.cols())?;
    if cfg.lambda == 0.0 {
        return Ok(u.clone());
    }
    let t = nu * cfg.lambda;
    let coeffs = dwt2(u, cfg.levels)?.map(|z| soft_threshold(z, t));
    idwt2(&coeffs, cfg.levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexGrid {
        ComplexGrid::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn max_abs_diff(a: &ComplexGrid, b: &ComplexGrid) -> f64 {
        a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_grid_has_single_approximation_coefficient() {
        let c = 0.75;
        let x = ComplexGrid::from_fn(4, 4, |_, _| Complex64::new(c, 0.0));
        let w = dwt2(&x, 2).unwrap();
        assert!((w.get(0, 0) - Complex64::new(4.0 * c, 0.0)).norm() < 1e-14);
        assert!(w.data().iter().skip(1).all(|z| z.norm() < 1e-14));
        let back = idwt2(&w, 2).unwrap();
        assert!(max_abs_diff(&back, &x) < 1e-14);
    }

    #[test]
    fn perfect_reconstruction_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_grid(32, 32, &mut rng);
        let w = dwt2(&x, 3).unwrap();
        assert!((w.norm() - x.norm()).abs() < 1e-10);
        assert!(max_abs_diff(&idwt2(&w, 3).unwrap(), &x) < 1e-10);
    }

    #[test]
    fn inverse_is_linear_and_zero_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_grid(16, 8, &mut rng);
        let b = random_grid(16, 8, &mut rng);
        let lhs = idwt2(&a.add(&b), 2).unwrap();
        let rhs = idwt2(&a, 2).unwrap().add(&idwt2(&b, 2).unwrap());
        assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
        let z = idwt2(&ComplexGrid::zeros(16, 8), 3).unwrap();
        assert!(z.data().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn divisibility_is_enforced() {
        assert!(dwt2(&ComplexGrid::zeros(12, 16), 3).is_err());
        assert!(dwt2(&ComplexGrid::zeros(16, 16), 0).is_err());
        assert!(idwt2(&ComplexGrid::zeros(10, 16), 2).is_err());
        assert!(dwt2(&ComplexGrid::zeros(16, 16), 4).is_ok());
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(Complex64::new(3.0, 0.0), 1.0), Complex64::new(2.0, 0.0));
        assert_eq!(soft_threshold(Complex64::new(0.5, 0.0), 1.0), Complex64::new(0.0, 0.0));
        assert_eq!(soft_threshold(Complex64::new(0.0, -2.0), 0.5), Complex64::new(0.0, -1.5));
        assert_eq!(soft_threshold(Complex64::new(0.0, 0.0), 0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_lambda_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_grid(16, 16, &mut rng);
        let cfg = WaveletConfig { levels: 4, lambda: 0.0 };
        let out = wavelet_prox_denoise(&u, &cfg, 0.7).unwrap();
        assert!(max_abs_diff(&out, &u) < 1e-12);
    }

    #[test]
    fn large_threshold_maps_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_grid(8, 8, &mut rng);
        let cmax = dwt2(&u, 2).unwrap().data().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let cfg = WaveletConfig { levels: 2, lambda: cmax };
        let out = wavelet_prox_denoise(&u, &cfg, 1.0).unwrap();
        assert!(out.data().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn prox_output_beats_random_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = WaveletConfig { levels: 3, lambda: 0.3 };
        let nu = 0.8;
        let objective = |x: &ComplexGrid, u: &ComplexGrid| {
            l1_penalty(x, &cfg).unwrap() + x.sub(u).norm_sqr() / (2.0 * nu)
        };
        for _ in 0..10 {
            let u = random_grid(16, 16, &mut rng);
            let o = wavelet_prox_denoise(&u, &cfg, nu).unwrap();
            let best = objective(&o, &u);
            assert!(best <= l1_penalty(&u, &cfg).unwrap() + 1e-12);
            for _ in 0..50 {
                let scale = 10f64.powf(rng.random_range(-4.0..0.0));
                let p = random_grid(16, 16, &mut rng).scale(scale);
                assert!(best <= objective(&o.add(&p), &u) + 1e-12);
            }
        }
    }

    #[test]
    fn prox_is_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cfg = WaveletConfig { levels: 2, lambda: 0.2 };
        for _ in 0..20 {
            let a = random_grid(8, 12, &mut rng);
            let b = random_grid(8, 12, &mut rng);
            let fa = wavelet_prox_denoise(&a, &cfg, 1.0).unwrap();
            let fb = wavelet_prox_denoise(&b, &cfg, 1.0).unwrap();
            assert!(fa.sub(&fb).norm() <= a.sub(&b).norm() + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn orthonormal_for_random_shapes(rp in 1usize..5, cp in 1usize..5, levels in 1usize..4, seed in any::<u64>()) {
            let block = 1 << levels;
            let (rows, cols) = (rp * block, cp * block);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_grid(rows, cols, &mut rng);
            let w = dwt2(&x, levels).unwrap();
            prop_assert!((w.norm() - x.norm()).abs() < 1e-10);
            prop_assert!(max_abs_diff(&idwt2(&w, levels).unwrap(), &x) < 1e-10);
        }
    }
}
