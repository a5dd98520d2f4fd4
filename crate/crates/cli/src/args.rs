use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "reside", version, about = "Self-calibrated plug-and-play MRI reconstruction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a Shepp-Logan phantom as an RSDG image.
    Phantom(PhantomArgs),
    /// Generate a k-space sampling mask.
    Mask(MaskArgs),
    /// Simulate masked, optionally noisy, k-space measurements.
    Measure(MeasureArgs),
    /// Reconstruct an image from masked k-space.
    Reconstruct(ReconstructArgs),
    /// Compare fixed 10 dB, fixed 25 dB and progressive training-SNR schedules.
    AblateSchedule(AblateArgs),
    /// Print the NMSE in dB of an estimate against a reference.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    Smooth,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MaskKindArg {
    M1,
    M2,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DtypeArg {
    F32,
    F64,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    #[arg(long, value_enum, default_value_t = PhaseArg::Smooth)]
    pub phase: PhaseArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[arg(long, value_enum)]
    pub kind: MaskKindArg,
    /// Target acceleration R.
    #[arg(long, default_value_t = 1.8)]
    pub rate: f64,
    /// Width of the fully sampled central region.
    #[arg(long, default_value_t = 32)]
    pub acs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 128)]
    pub rows: usize,
    #[arg(long, default_value_t = 128)]
    pub cols: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    /// Standard deviation of each real and imaginary noise component.
    #[arg(long, default_value_t = 0.0)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = DtypeArg::F64)]
    pub dtype: DtypeArg,
    #[arg(long)]
    pub out: PathBuf,
}

/// Settings shared by every command that runs a solver.
#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Flat key=value file; a run manifest is accepted as well.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base hyperparameter set, applied before the config file.
    #[arg(long)]
    pub profile: Option<String>,
    /// Individual key=value override, applied last. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Worker threads for training and inference. Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// zero-filled, l1-wavelet, pnp-median or reside.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub kspace: Option<PathBuf>,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub kspace: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub estimate: PathBuf,
}
