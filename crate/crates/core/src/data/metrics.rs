use crate::error::{Error, Result};
use crate::grid::ComplexGrid;

/// Lowest value reported by [`nmse_db`] (returned for exact reconstructions).
pub const NMSE_FLOOR_DB: f64 = -300.0;

/// `20·log10(‖truth − estimate‖₂ / ‖truth‖₂)` in dB, floored at −300 dB.
pub fn nmse_db(truth: &ComplexGrid, estimate: &ComplexGrid) -> Result<f64> {
    truth.ensure_same_shape(estimate, "nmse_db")?;
    let reference = truth.norm();
    if !(reference > 0.0) {
        return Err(Error::invalid("NMSE is undefined for a zero reference image"));
    }
    let ratio = truth.sub(estimate).norm() / reference;
    if ratio == 0.0 {
        return Ok(NMSE_FLOOR_DB);
    }
    Ok((20.0 * ratio.log10()).max(NMSE_FLOOR_DB))
}
