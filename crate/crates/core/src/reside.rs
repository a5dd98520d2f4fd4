//! Self-calibrated reconstruction: before every PDS step the current estimate
//! is perturbed with complex Gaussian noise, a fresh denoiser is fitted to map
//! noisy patches of it back to the clean ones, and that network is plugged in
//! as `f` for the step.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::ComplexGrid;
use crate::nn::{denoise_image, train_denoiser, DenoiserNet, Real, TrainSpec, TwoChannelPatch};
use crate::operator::ForwardOperator;
use crate::pds::{pds_init, pds_step, PdsParams};
use crate::rng::{derive_seed, stream_rng, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleMode {
    Progressive,
    Fixed,
}

/// Training SNR as a function of the outer iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrSchedule {
    pub mode: ScheduleMode,
    pub start_db: f64,
    pub step_db: f64,
    pub period: usize,
    pub cap_db: f64,
    pub fixed_db: f64,
}

impl Default for SnrSchedule {
    fn default() -> Self {
        Self {
            mode: ScheduleMode::Progressive,
            start_db: 10.0,
            step_db: 5.0,
            period: 10,
            cap_db: 40.0,
            fixed_db: 10.0,
        }
    }
}

impl SnrSchedule {
    pub fn fixed(db: f64) -> Self {
        Self {
            mode: ScheduleMode::Fixed,
            fixed_db: db,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::invalid("schedule period must be >= 1"));
        }
        if self.cap_db < self.start_db {
            return Err(Error::invalid("schedule cap must not be below its start"));
        }
        Ok(())
    }

    /// SNR in dB for iteration `t ≥ 1`.
    pub fn snr_at(&self, t: usize) -> f64 {
        match self.mode {
            ScheduleMode::Fixed => self.fixed_db,
            ScheduleMode::Progressive => {
                let steps = (t.max(1) - 1) / self.period;
                (self.start_db + self.step_db * steps as f64).min(self.cap_db)
            }
        }
    }
}

/// Per-component noise level giving `20·log10(‖x‖₂ / (√(2N)·σ)) = snr_db`.
pub fn sigma_for_snr(x: &ComplexGrid, snr_db: f64) -> Result<f64> {
    let norm = x.norm();
    if !(norm > 0.0) {
        return Err(Error::invalid("cannot set a noise level relative to a zero image"));
    }
    Ok(norm / ((2.0 * x.len() as f64).sqrt() * 10f64.powf(snr_db / 20.0)))
}

/// `x + σ(n₁ + i·n₂)` with independent standard normal `n₁, n₂` per pixel.
pub fn add_complex_noise<R: Rng>(x: &ComplexGrid, sigma: f64, rng: &mut R) -> ComplexGrid {
    x.map(|z| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        z + num_complex::Complex64::new(re, im) * sigma
    })
}

/// Number and side length of the training patches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatchPlan {
    pub count: usize,
    pub size: usize,
}

impl Default for PatchPlan {
    fn default() -> Self {
        Self { count: 144, size: 64 }
    }
}

impl PatchPlan {
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.count == 0 || self.size == 0 {
            return Err(Error::invalid("patch count and size must be positive"));
        }
        if self.size > rows || self.size > cols {
            return Err(Error::invalid(format!(
                "{0}x{0} patches do not fit a {rows}x{cols} image",
                self.size
            )));
        }
        Ok(())
    }

    /// Top-left corners drawn uniformly with replacement.
    pub fn locations(&self, rows: usize, cols: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
        self.validate(rows, cols)?;
        let mut rng = stream_rng(seed, Stream::PatchLocations);
        Ok((0..self.count)
            .map(|_| (rng.random_range(0..=rows - self.size), rng.random_range(0..=cols - self.size)))
            .collect())
    }
}

/// Aligned `(noisy, clean)` training pairs cut at shared random locations.
pub fn extract_patch_pairs<T: Real>(
    clean: &ComplexGrid,
    noisy: &ComplexGrid,
    plan: &PatchPlan,
    seed: u64,
) -> Result<Vec<(TwoChannelPatch<T>, TwoChannelPatch<T>)>> {
    clean.ensure_same_shape(noisy, "extract_patch_pairs")?;
    let s = plan.size;
    Ok(plan
        .locations(clean.rows(), clean.cols(), seed)?
        .into_iter()
        .map(|(r, c)| {
            (
                TwoChannelPatch::from_grid(&noisy.window(r, c, s, s)),
                TwoChannelPatch::from_grid(&clean.window(r, c, s, s)),
            )
        })
        .collect())
}

/// Everything that controls one self-calibrated reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct ResideConfig {
    /// Step sizes; `pds.iterations` is ignored in favour of `iterations`.
    pub pds: PdsParams,
    pub schedule: SnrSchedule,
    pub patches: PatchPlan,
    pub train: TrainSpec,
    pub iterations: usize,
    pub master_seed: u64,
    /// Retrain only on iterations `t` with `(t-1) % train_every == 0`.
    pub train_every: usize,
    /// Start each training round from the previous network instead of a fresh draw.
    pub warm_start: bool,
}

impl Default for ResideConfig {
    fn default() -> Self {
        Self {
            pds: PdsParams::default(),
            schedule: SnrSchedule::default(),
            patches: PatchPlan::default(),
            train: TrainSpec::default(),
            iterations: 70,
            master_seed: 0,
            train_every: 1,
            warm_start: false,
        }
    }
}

impl ResideConfig {
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be >= 1"));
        }
        if self.train_every == 0 {
            return Err(Error::invalid("train_every must be >= 1"));
        }
        self.pds.validate()?;
        self.schedule.validate()?;
        self.train.validate()?;
        self.patches.validate(rows, cols)
    }
}

/// What the orchestrator reports after each iteration.
#[derive(Clone, Copy, Debug)]
pub struct IterationTrace<'a> {
    pub t: usize,
    pub snr_db: f64,
    pub sigma: f64,
    /// Loss after the first and last training epochs.
    pub initial_loss: f64,
    pub train_loss: f64,
    pub image: &'a ComplexGrid,
}

/// Runs the self-calibrated loop and returns the final estimate. Aborts with
/// [`Error::Numerical`] when the loss or image stops being finite or the image
/// norm leaves `(0, 10·‖x₀‖)`.
pub fn reside_reconstruct(
    op: &ForwardOperator,
    y: &ComplexGrid,
    cfg: &ResideConfig,
    mut trace: Option<&mut dyn FnMut(&IterationTrace<'_>)>,
) -> Result<ComplexGrid> {
    let (rows, cols) = op.shape();
    cfg.validate(rows, cols)?;
    let mut state = pds_init(op, y, &cfg.pds)?;
    let norm0 = state.x.norm();
    let mut net: Option<DenoiserNet<f32>> = None;
    let (mut snr_db, mut sigma, mut initial, mut loss) = (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    for t in 1..=cfg.iterations {
        if (t - 1) % cfg.train_every == 0 || net.is_none() {
            snr_db = cfg.schedule.snr_at(t);
            sigma = sigma_for_snr(&state.x, snr_db).map_err(|e| Error::Numerical {
                iteration: t,
                message: e.to_string(),
            })?;
            let warm = if cfg.warm_start { net.as_ref() } else { None };
            let (trained, report) = train_denoiser::<f32>(
                &state.x,
                sigma,
                &cfg.patches,
                &cfg.train,
                derive_seed(cfg.master_seed, t as u64),
                warm,
            )?;
            initial = report.initial_loss();
            loss = report.final_loss();
            if !loss.is_finite() {
                return Err(Error::Numerical {
                    iteration: t,
                    message: "training loss is not finite".into(),
                });
            }
            net = Some(trained);
        }
        let current = net.as_ref().expect("network trained above");
        let mut denoiser = |u: &ComplexGrid| denoise_image(current, u);
        state = pds_step(&state, op, y, &cfg.pds, &mut denoiser)?;
        let norm = state.x.norm();
        if !(norm > 0.0 && norm < 10.0 * norm0) {
            return Err(Error::Numerical {
                iteration: t,
                message: format!("image norm {norm} left (0, 10·{norm0})"),
            });
        }
        if let Some(sink) = trace.as_mut() {
            sink(&IterationTrace {
                t,
                snr_db,
                sigma,
                initial_loss: initial,
                train_loss: loss,
                image: &state.x,
            });
        }
    }
    Ok(state.x)
}
