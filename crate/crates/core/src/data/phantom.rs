//! Modified Shepp-Logan head phantom with an optional smooth phase.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::ComplexGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseKind {
    None,
    SmoothQuadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhantomSpec {
    pub size: usize,
    pub phase: PhaseKind,
}

/// One ellipse: additive intensity, semi-axes, center and rotation (degrees).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub intensity: f64,
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
    pub phi_deg: f64,
}

const fn e(intensity: f64, a: f64, b: f64, x0: f64, y0: f64, phi_deg: f64) -> Ellipse {
    Ellipse {
        intensity,
        a,
        b,
        x0,
        y0,
        phi_deg,
    }
}

/// Shepp-Logan geometry with the higher-contrast intensities of Toft's variant.
pub const SHEPP_LOGAN: [Ellipse; 10] = [
    e(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    e(-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    e(-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    e(-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    e(0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    e(0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    e(0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    e(0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    e(0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    e(0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.phi_deg.to_radians().sin_cos();
        let (dx, dy) = (x - self.x0, y - self.y0);
        let xr = dx * c + dy * s;
        let yr = -dx * s + dy * c;
        (xr / self.a).powi(2) + (yr / self.b).powi(2) <= 1.0
    }
}

/// Normalized coordinates of pixel `(r, c)` on an `n × n` grid: `x` grows to
/// the right, `y` grows upward, both spanning `(-1, 1)`.
pub fn pixel_coords(r: usize, c: usize, n: usize) -> (f64, f64) {
    let x = (2 * c + 1) as f64 / n as f64 - 1.0;
    let y = 1.0 - (2 * r + 1) as f64 / n as f64;
    (x, y)
}

/// Low-order polynomial phase in radians.
pub fn smooth_phase(x: f64, y: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 * (0.6 * x * x - 0.4 * y * y + 0.3 * x * y + 0.2 * x - 0.1 * y)
}

pub fn gen_phantom(spec: &PhantomSpec) -> Result<ComplexGrid> {
    let n = spec.size;
    if n < 16 {
        return Err(Error::invalid(format!("phantom size must be >= 16, got {n}")));
    }
    Ok(ComplexGrid::from_fn(n, n, |r, c| {
        let (x, y) = pixel_coords(r, c, n);
        let mag: f64 = SHEPP_LOGAN
            .iter()
            .filter(|el| el.contains(x, y))
            .map(|el| el.intensity)
            .sum::<f64>()
            .clamp(0.0, 1.0);
        match spec.phase {
            PhaseKind::None => Complex64::new(mag, 0.0),
            PhaseKind::SmoothQuadratic => Complex64::from_polar(mag, smooth_phase(x, y)),
        }
    }))
}
