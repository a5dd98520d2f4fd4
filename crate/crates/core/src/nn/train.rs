//! Per-iteration denoiser training on noisy/clean patch pairs.

use rand::seq::SliceRandom;

use super::adam::{adam_step, AdamState};
use super::conv::Real;
use super::net::DenoiserNet;
use super::patch::TwoChannelPatch;
use crate::error::{Error, Result};
use crate::grid::ComplexGrid;
use crate::reside::{add_complex_noise, extract_patch_pairs, PatchPlan};
use crate::rng::{stream_rng, Stream};

/// Optimizer schedule for one training round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainSpec {
    pub epochs: usize,
    pub minibatch: usize,
    pub lr: f64,
}

impl Default for TrainSpec {
    fn default() -> Self {
        Self {
            epochs: 100,
            minibatch: 16,
            lr: 1e-3,
        }
    }
}

impl TrainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.minibatch == 0 {
            return Err(Error::invalid("epochs and minibatch must be >= 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be positive, got {}", self.lr)));
        }
        Ok(())
    }
}

/// Mean per-sample squared error for every epoch, measured on the fly.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
}

impl TrainReport {
    pub fn initial_loss(&self) -> f64 {
        self.epoch_losses.first().copied().unwrap_or(f64::NAN)
    }

    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(f64::NAN)
    }
}

/// Runs `spec.epochs` passes of minibatch Adam over `pairs`, reshuffling the
/// sample order each epoch from `seed`. The last partial batch is kept.
pub fn train_on_pairs<T: Real>(
    net: &mut DenoiserNet<T>,
    pairs: &[(TwoChannelPatch<T>, TwoChannelPatch<T>)],
    spec: &TrainSpec,
    seed: u64,
) -> Result<TrainReport> {
    spec.validate()?;
    if pairs.is_empty() {
        return Err(Error::invalid("no training pairs"));
    }
    let mut shuffle = stream_rng(seed, Stream::Shuffle);
    let mut adam = AdamState::new(net.params().len(), spec.lr);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut report = TrainReport::default();
    for _ in 0..spec.epochs {
        order.shuffle(&mut shuffle);
        let mut total = 0.0;
        for chunk in order.chunks(spec.minibatch) {
            let batch: Vec<_> = chunk.iter().map(|&i| (&pairs[i].0, &pairs[i].1)).collect();
            let (grad, loss) = net.batch_gradient(&batch)?;
            total += loss.as_f64() * chunk.len() as f64;
            adam_step(net.params_mut(), &grad, &mut adam)?;
        }
        report.epoch_losses.push(total / pairs.len() as f64);
    }
    Ok(report)
}

/// Trains a denoiser for the current estimate `x_prev`:
/// perturbs it once with complex Gaussian noise of per-component standard
/// deviation `sigma`, cuts aligned noisy/clean patches, and fits a network
/// starting from `warm_start` or, by default, a fresh random initialization.
pub fn train_denoiser<T: Real>(
    x_prev: &ComplexGrid,
    sigma: f64,
    plan: &PatchPlan,
    spec: &TrainSpec,
    seed: u64,
    warm_start: Option<&DenoiserNet<T>>,
) -> Result<(DenoiserNet<T>, TrainReport)> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("training noise level must be positive, got {sigma}")));
    }
    spec.validate()?;
    plan.validate(x_prev.rows(), x_prev.cols())?;
    let noisy = add_complex_noise(x_prev, sigma, &mut stream_rng(seed, Stream::Noise));
    let pairs = extract_patch_pairs::<T>(x_prev, &noisy, plan, seed)?;
    let mut net = match warm_start {
        Some(net) => net.clone(),
        None => DenoiserNet::init(seed),
    };
    let report = train_on_pairs(&mut net, &pairs, spec, seed)?;
    Ok((net, report))
}

/// Applies the network to a whole complex image (it is fully convolutional).
pub fn denoise_image<T: Real>(net: &DenoiserNet<T>, u: &ComplexGrid) -> Result<ComplexGrid> {
    let out = net.forward(&TwoChannelPatch::<T>::from_grid(u))?;
    Ok(out.to_grid())
}
