//! Synthetic data, sampling patterns, the NMSE metric and file formats.

pub mod format;
pub mod mask;
pub mod measure;
pub mod metrics;
pub mod phantom;
pub mod pgm;

pub use format::{read_grid, read_mask, write_grid, write_mask, GridDtype};
pub use mask::{gen_mask, MaskKind, MaskSpec};
pub use measure::synthesize_measurements;
pub use metrics::nmse_db;
pub use phantom::{gen_phantom, PhantomSpec, PhaseKind};
