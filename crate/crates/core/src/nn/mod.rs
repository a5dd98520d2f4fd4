//! The residual convolutional denoiser and everything needed to train it.

pub mod adam;
pub mod checkpoint;
pub mod conv;
pub mod net;
pub mod patch;
pub mod train;

pub use adam::{adam_step, AdamState};
pub use conv::Real;
pub use net::{parameter_count, DenoiserNet};
pub use patch::TwoChannelPatch;
pub use train::{denoise_image, train_denoiser, train_on_pairs, TrainReport, TrainSpec};
