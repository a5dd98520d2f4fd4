//! Reconstruction engine for undersampled linear inverse problems.
//!
//! The crate provides a masked-Fourier forward model, a generic plug-and-play
//! primal-dual splitting (PDS) driver, an orthonormal Haar L1 prior, and a
//! self-calibrated variant of the PDS loop in which a small residual
//! convolutional denoiser is trained from scratch on patches of the current
//! image estimate at every iteration.
//!
//! Module map:
//! - [`grid`], [`operator`]: complex rasters, unitary FFTs, sampling masks and `A = M∘F`.
//! - [`wavelet`]: Haar analysis/synthesis and the soft-threshold proximal denoiser.
//! - [`nn`]: the five-layer denoiser, exact backpropagation, Adam and patch training.
//! - [`pds`]: the denoiser-agnostic PDS loop plus a median baseline denoiser.
//! - [`reside`]: SNR schedules, patch extraction and the self-calibrated loop.
//! - [`data`]: phantoms, mask generators, measurement synthesis, NMSE and file formats.

pub mod data;
pub mod error;
pub mod grid;
pub mod nn;
pub mod operator;
pub mod pds;
pub mod reside;
pub mod rng;
pub mod wavelet;

pub use error::{Error, Result};
pub use grid::ComplexGrid;
pub use num_complex::Complex64;
pub use operator::{ForwardOperator, SamplingMask};
