//! Plug-and-play primal-dual splitting.
//!
//! With step ratio `s = ν/τ²` and `γ = s‖A‖₂²`, each iteration performs
//!
//! ```text
//! u_t = x_{t-1} - s·Aᴴ z_{t-1}
//! x_t = f(u_t)
//! v_t = 2x_t - x_{t-1}
//! z_t = γ/(1+γ)·z_{t-1} + 1/(1+γ)·(A v_t - y)
//! ```
//!
//! starting from `x_0 = Aᴴy`, `z_0 = Ax_0 - y`. The denoiser `f` is opaque to
//! the driver; the proximal operator of a convex penalty turns the loop into
//! a solver for the penalized least-squares problem.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::ComplexGrid;
use crate::operator::ForwardOperator;

/// Step parameters. `ratio` is `ν/τ²`, the only way τ enters the iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdsParams {
    pub nu: f64,
    pub ratio: f64,
    pub iterations: usize,
    pub norm_a: f64,
}

impl Default for PdsParams {
    fn default() -> Self {
        Self {
            nu: 1.0,
            ratio: 1.0,
            iterations: 100,
            norm_a: 1.0,
        }
    }
}

impl PdsParams {
    /// Parameters from an explicit measurement noise variance `τ²`.
    pub fn from_noise_variance(nu: f64, tau2: f64, iterations: usize) -> Result<Self> {
        if !(tau2 > 0.0) {
            return Err(Error::invalid(format!("noise variance must be positive, got {tau2}")));
        }
        let p = Self {
            nu,
            ratio: nu / tau2,
            iterations,
            norm_a: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn gamma(&self) -> f64 {
        self.ratio * self.norm_a * self.norm_a
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::invalid(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.gamma() > 0.0 && self.gamma().is_finite()) {
            return Err(Error::invalid(format!(
                "gamma = ratio·‖A‖² must be positive, got {}",
                self.gamma()
            )));
        }
        Ok(())
    }
}

/// Primal image iterate `x`, dual k-space iterate `z` and the step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct PdsState {
    pub x: ComplexGrid,
    pub z: ComplexGrid,
    pub t: usize,
}

fn check_measurements(op: &ForwardOperator, y: &ComplexGrid) -> Result<()> {
    if y.shape() != op.shape() {
        return Err(Error::invalid(format!(
            "measurements are {}x{} but the operator is {}x{}",
            y.rows(),
            y.cols(),
            op.shape().0,
            op.shape().1
        )));
    }
    let off_mask = y
        .data()
        .iter()
        .zip(op.mask().keep())
        .any(|(z, &k)| !k && *z != Complex64::new(0.0, 0.0));
    if off_mask {
        return Err(Error::invalid("measurements are nonzero at unsampled k-space locations"));
    }
    Ok(())
}

/// `x_0 = Aᴴy`, `z_0 = Ax_0 − y`.
pub fn pds_init(op: &ForwardOperator, y: &ComplexGrid, params: &PdsParams) -> Result<PdsState> {
    params.validate()?;
    check_measurements(op, y)?;
    let x = op.apply_adjoint(y)?;
    let z = op.apply_forward(&x)?.sub(y);
    Ok(PdsState { x, z, t: 0 })
}

/// One iteration of the loop with an arbitrary denoiser.
pub fn pds_step<F>(state: &PdsState, op: &ForwardOperator, y: &ComplexGrid, params: &PdsParams, denoiser: &mut F) -> Result<PdsState>
where
    F: FnMut(&ComplexGrid) -> Result<ComplexGrid> + ?Sized,
{
    let gamma = params.gamma();
    let t = state.t + 1;
    let u = state.x.sub(&op.apply_adjoint(&state.z)?.scale(params.ratio));
    let x = denoiser(&u)?;
    if x.shape() != u.shape() {
        return Err(Error::ContractViolation(format!(
            "denoiser returned {}x{} for a {}x{} input",
            x.rows(),
            x.cols(),
            u.rows(),
            u.cols()
        )));
    }
    if !x.is_finite() {
        return Err(Error::Numerical {
            iteration: t,
            message: "denoiser produced non-finite values".into(),
        });
    }
    let v = x.scale(2.0).sub(&state.x);
    let residual = op.apply_forward(&v)?.sub(y);
    let z = state
        .z
        .zip_map(&residual, |zp, r| zp * (gamma / (1.0 + gamma)) + r * (1.0 / (1.0 + gamma)));
    Ok(PdsState { x, z, t })
}

/// Runs `params.iterations` steps and returns the final image. `trace` is
/// called synchronously with `(t, x_t)` after every step.
pub fn pnp_reconstruct<F>(
    op: &ForwardOperator,
    y: &ComplexGrid,
    params: &PdsParams,
    denoiser: &mut F,
    mut trace: Option<&mut dyn FnMut(usize, &ComplexGrid)>,
) -> Result<ComplexGrid>
where
    F: FnMut(&ComplexGrid) -> Result<ComplexGrid> + ?Sized,
{
    if params.iterations == 0 {
        return Err(Error::invalid("iterations must be >= 1"));
    }
    let mut state = pds_init(op, y, params)?;
    for _ in 0..params.iterations {
        state = pds_step(&state, op, y, params, denoiser)?;
        if let Some(sink) = trace.as_mut() {
            sink(state.t, &state.x);
        }
    }
    Ok(state.x)
}

fn median9(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// 3×3 median filter applied separately to the real and imaginary parts.
/// Windows are clipped at the image border.
pub fn median_denoise(u: &ComplexGrid) -> ComplexGrid {
    let (rows, cols) = u.shape();
    let mut re = Vec::with_capacity(9);
    let mut im = Vec::with_capacity(9);
    ComplexGrid::from_fn(rows, cols, |r, c| {
        re.clear();
        im.clear();
        for rr in r.saturating_sub(1)..(r + 2).min(rows) {
            for cc in c.saturating_sub(1)..(c + 2).min(cols) {
                let z = u.get(rr, cc);
                re.push(z.re);
                im.push(z.im);
            }
        }
        Complex64::new(median9(&mut re), median9(&mut im))
    })
}
