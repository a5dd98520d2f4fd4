//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use reside_core::data::pgm::{error_pgm, magnitude_pgm, write_pgm};
use reside_core::data::{
    gen_mask, gen_phantom, nmse_db, read_grid, read_mask, synthesize_measurements, write_grid, write_mask, GridDtype,
    MaskKind, MaskSpec, PhantomSpec, PhaseKind,
};
use reside_core::pds::{median_denoise, pnp_reconstruct};
use reside_core::reside::{reside_reconstruct, IterationTrace, ScheduleMode};
use reside_core::wavelet::wavelet_prox_denoise;
use reside_core::{ComplexGrid, ForwardOperator};

use crate::args::{
    AblateArgs, Cli, Command, DtypeArg, EvalArgs, MaskArgs, MaskKindArg, MeasureArgs, PhantomArgs, PhaseArg,
    ReconstructArgs, SolverArgs,
};
use crate::config::{lambda_grid, ConfigFile, Lambda, Method, Profile, RunConfig};
use crate::error::{CliError, CliResult};

/// Amplification applied to absolute error maps.
pub const ERROR_MAP_GAIN: f64 = 1.5;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Phantom(a) => cmd_phantom(&a),
        Command::Mask(a) => cmd_mask(&a),
        Command::Measure(a) => cmd_measure(&a),
        Command::Reconstruct(a) => cmd_reconstruct(&a),
        Command::AblateSchedule(a) => cmd_ablate_schedule(&a),
        Command::Eval(a) => cmd_eval(&a),
    }
}

fn cmd_phantom(a: &PhantomArgs) -> CliResult<()> {
    let phase = match a.phase {
        PhaseArg::Smooth => PhaseKind::SmoothQuadratic,
        PhaseArg::None => PhaseKind::None,
    };
    let x = gen_phantom(&PhantomSpec { size: a.size, phase })?;
    write_grid(&a.out, &x, GridDtype::Complex128)?;
    println!("norm={}", x.norm());
    Ok(())
}

fn cmd_mask(a: &MaskArgs) -> CliResult<()> {
    let kind = match a.kind {
        MaskKindArg::M1 => MaskKind::VariableDensity1d,
        MaskKindArg::M2 => MaskKind::UniformRandom2d,
        MaskKindArg::Full => MaskKind::Full,
    };
    let spec = MaskSpec {
        kind,
        target_r: a.rate,
        acs_lines: a.acs,
        seed: a.seed,
    };
    let mask = gen_mask(&spec, a.rows, a.cols)?;
    write_mask(&a.out, &mask)?;
    println!("achieved_r={}", mask.acceleration());
    Ok(())
}

fn cmd_measure(a: &MeasureArgs) -> CliResult<()> {
    let x = read_grid(&a.image)?;
    let mask = read_mask(&a.mask)?;
    let y = synthesize_measurements(&x, &mask, a.noise_std, a.seed)?;
    let dtype = match a.dtype {
        DtypeArg::F32 => GridDtype::Complex64,
        DtypeArg::F64 => GridDtype::Complex128,
    };
    write_grid(&a.out, &y, dtype)?;
    println!("sampled={} achieved_r={}", mask.sampled(), mask.acceleration());
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    let truth = read_grid(&a.truth)?;
    let est = read_grid(&a.estimate)?;
    println!("{}", nmse_db(&truth, &est)?);
    Ok(())
}

/// Resolves profile, config file and overrides, in that order.
fn resolve_config(s: &SolverArgs) -> CliResult<ConfigFile> {
    let profile = match &s.profile {
        Some(p) => p.parse()?,
        None => Profile::Desk,
    };
    let base = RunConfig::for_profile(profile);
    let mut file = match &s.config {
        Some(path) => ConfigFile::load(path, base)?,
        None => ConfigFile {
            config: base,
            run: Vec::new(),
        },
    };
    for o in &s.overrides {
        file.config.apply_assignment(o)?;
    }
    Ok(file)
}

fn init_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

/// One row of the per-iteration CSV trace.
#[derive(Clone, Copy, Debug)]
pub struct TraceRow {
    pub t: usize,
    pub snr_db: f64,
    pub sigma: f64,
    /// Loss after the first training epoch; not part of the CSV.
    pub initial_loss: f64,
    pub train_loss: f64,
    pub nmse_db: f64,
}

pub const TRACE_HEADER: &str = "t,snr_db,sigma,train_loss,nmse_db";

/// Nine significant digits in scientific notation; `nan` for missing values.
pub fn format_sig9(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        "nan".into()
    }
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.t,
            format_sig9(r.snr_db),
            format_sig9(r.sigma),
            format_sig9(r.train_loss),
            format_sig9(r.nmse_db)
        );
    }
    out
}

/// Result of one reconstruction.
pub struct Outcome {
    pub image: ComplexGrid,
    pub trace: Vec<TraceRow>,
    /// The resolved configuration, with any tuned value substituted.
    pub config: RunConfig,
    pub lambda_tuned: bool,
}

fn nmse_or_nan(truth: Option<&ComplexGrid>, x: &ComplexGrid) -> f64 {
    truth.and_then(|t| nmse_db(t, x).ok()).unwrap_or(f64::NAN)
}

fn run_l1(op: &ForwardOperator, y: &ComplexGrid, cfg: &RunConfig, lambda: f64, truth: Option<&ComplexGrid>) -> CliResult<(ComplexGrid, Vec<TraceRow>)> {
    let wavelet = cfg.wavelet(lambda);
    wavelet.validate(y.rows(), y.cols())?;
    let nu = cfg.nu;
    let mut rows = Vec::new();
    let mut denoiser = |u: &ComplexGrid| wavelet_prox_denoise(u, &wavelet, nu);
    let mut sink = |t: usize, x: &ComplexGrid| rows.push(plain_row(t, truth, x));
    let image = pnp_reconstruct(op, y, &cfg.pds_params(), &mut denoiser, Some(&mut sink))?;
    Ok((image, rows))
}

fn plain_row(t: usize, truth: Option<&ComplexGrid>, x: &ComplexGrid) -> TraceRow {
    TraceRow {
        t,
        snr_db: f64::NAN,
        sigma: f64::NAN,
        initial_loss: f64::NAN,
        train_loss: f64::NAN,
        nmse_db: nmse_or_nan(truth, x),
    }
}

/// Runs `method` on `(op, y)`. With `lambda=auto` the wavelet weight is picked
/// from [`lambda_grid`] by final NMSE against `truth`.
pub fn reconstruct(
    method: Method,
    cfg: &RunConfig,
    op: &ForwardOperator,
    y: &ComplexGrid,
    truth: Option<&ComplexGrid>,
) -> CliResult<Outcome> {
    let mut config = cfg.clone();
    let mut lambda_tuned = false;
    let (image, trace) = match method {
        Method::ZeroFilled => (op.apply_adjoint(y)?, Vec::new()),
        Method::L1Wavelet => {
            let lambda = match cfg.lambda {
                Lambda::Fixed(v) => v,
                Lambda::Auto => {
                    let truth = truth.ok_or_else(|| CliError::usage("lambda=auto requires --truth"))?;
                    let mut best = (f64::NAN, f64::INFINITY);
                    for lam in lambda_grid() {
                        let (x, _) = run_l1(op, y, cfg, lam, None)?;
                        let e = nmse_db(truth, &x)?;
                        if e < best.1 {
                            best = (lam, e);
                        }
                    }
                    lambda_tuned = true;
                    best.0
                }
            };
            config.lambda = Lambda::Fixed(lambda);
            run_l1(op, y, cfg, lambda, truth)?
        }
        Method::PnpMedian => {
            let mut rows = Vec::new();
            let mut denoiser = |u: &ComplexGrid| Ok(median_denoise(u));
            let mut sink = |t: usize, x: &ComplexGrid| rows.push(plain_row(t, truth, x));
            let image = pnp_reconstruct(op, y, &cfg.pds_params(), &mut denoiser, Some(&mut sink))?;
            (image, rows)
        }
        Method::Reside => {
            let mut rows = Vec::new();
            let mut sink = |tr: &IterationTrace<'_>| {
                rows.push(TraceRow {
                    t: tr.t,
                    snr_db: tr.snr_db,
                    sigma: tr.sigma,
                    initial_loss: tr.initial_loss,
                    train_loss: tr.train_loss,
                    nmse_db: nmse_or_nan(truth, tr.image),
                })
            };
            let image = reside_reconstruct(op, y, &cfg.reside(), Some(&mut sink))?;
            (image, rows)
        }
    };
    Ok(Outcome {
        image,
        trace,
        config,
        lambda_tuned,
    })
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// `<out>.manifest.txt`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.txt");
    PathBuf::from(s)
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

/// Inputs and outputs of one reconstruction job.
pub struct Job {
    pub method: Method,
    pub kspace: PathBuf,
    pub mask: PathBuf,
    pub truth: Option<PathBuf>,
    pub trace_out: Option<PathBuf>,
    pub out: PathBuf,
    pub config: RunConfig,
}

/// Summary returned by [`run_job`].
pub struct JobReport {
    pub final_nmse_db: Option<f64>,
    pub seconds: f64,
}

pub fn run_job(job: &Job) -> CliResult<JobReport> {
    let y = read_grid(&job.kspace)?;
    let mask = read_mask(&job.mask)?;
    let truth = job.truth.as_deref().map(read_grid).transpose()?;
    if let Some(t) = &truth {
        y.ensure_same_shape(t, "truth image")?;
    }
    let op = ForwardOperator::new(mask)?;
    let start = Instant::now();
    let outcome = reconstruct(job.method, &job.config, &op, &y, truth.as_ref())?;
    let seconds = start.elapsed().as_secs_f64();

    write_grid(&job.out, &outcome.image, GridDtype::Complex128)?;
    write_pgm(&sibling(&job.out, ".pgm"), &magnitude_pgm(&outcome.image))?;
    let final_nmse = match &truth {
        Some(t) => {
            write_pgm(&sibling(&job.out, ".error.pgm"), &error_pgm(t, &outcome.image, ERROR_MAP_GAIN))?;
            Some(nmse_db(t, &outcome.image)?)
        }
        None => None,
    };
    if let Some(path) = &job.trace_out {
        write_text(path, &trace_csv(&outcome.trace))?;
    }

    let path_text = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
    let mut m = String::from("# reside run manifest; pass back with --config to re-run\n");
    let _ = writeln!(m, "result.tool_version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "run.method={}", job.method.name());
    let _ = writeln!(m, "run.kspace={}", job.kspace.display());
    let _ = writeln!(m, "run.mask={}", job.mask.display());
    let _ = writeln!(m, "run.truth={}", path_text(&job.truth));
    let _ = writeln!(m, "run.trace_out={}", path_text(&job.trace_out));
    let _ = writeln!(m, "run.out={}", job.out.display());
    m.push_str(&outcome.config.to_text());
    let _ = writeln!(m, "result.achieved_r={}", op.mask().acceleration());
    if job.method == Method::Reside {
        let improved = outcome.trace.iter().filter(|r| r.train_loss <= r.initial_loss).count();
        let _ = writeln!(m, "result.training_loss_decreased={improved}/{}", outcome.trace.len());
    }
    if outcome.lambda_tuned {
        let _ = writeln!(m, "result.lambda_search=auto");
    }
    if let Some(e) = final_nmse {
        let _ = writeln!(m, "result.nmse_db.{}={e}", job.method.name());
    }
    let _ = writeln!(m, "result.wall_seconds={seconds}");
    write_text(&manifest_path(&job.out), &m)?;

    Ok(JobReport {
        final_nmse_db: final_nmse,
        seconds,
    })
}

fn required(flag: Option<&PathBuf>, file: &ConfigFile, key: &str) -> CliResult<PathBuf> {
    flag.cloned()
        .or_else(|| file.run_path(key))
        .ok_or_else(|| CliError::usage(format!("missing --{}", key.replace('_', "-"))))
}

fn cmd_reconstruct(a: &ReconstructArgs) -> CliResult<()> {
    let file = resolve_config(&a.solver)?;
    init_threads(a.solver.threads)?;
    let method: Method = a
        .method
        .as_deref()
        .or(file.run_value("method"))
        .ok_or_else(|| CliError::usage("missing --method"))?
        .parse()?;
    let job = Job {
        method,
        kspace: required(a.kspace.as_ref(), &file, "kspace")?,
        mask: required(a.mask.as_ref(), &file, "mask")?,
        truth: a.truth.clone().or_else(|| file.run_path("truth")),
        trace_out: a.trace_out.clone().or_else(|| file.run_path("trace_out")),
        out: required(a.out.as_ref(), &file, "out")?,
        config: file.config,
    };
    let report = run_job(&job)?;
    match report.final_nmse_db {
        Some(e) => println!("method={} nmse_db={e} seconds={:.3}", method.name(), report.seconds),
        None => println!("method={} seconds={:.3}", method.name(), report.seconds),
    }
    Ok(())
}

/// The three schedules compared by `ablate-schedule`, by file stem.
pub const ABLATION_RUNS: [&str; 3] = ["fixed10", "fixed25", "progressive"];

fn cmd_ablate_schedule(a: &AblateArgs) -> CliResult<()> {
    let file = resolve_config(&a.solver)?;
    init_threads(a.solver.threads)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|source| CliError::Io {
        path: a.out_dir.display().to_string(),
        source,
    })?;
    let mut summary = String::from("schedule,final_nmse_db,best_nmse_db,seconds\n");
    for name in ABLATION_RUNS {
        let mut config = file.config.clone();
        match name {
            "fixed10" => {
                config.schedule.mode = ScheduleMode::Fixed;
                config.schedule.fixed_db = 10.0;
            }
            "fixed25" => {
                config.schedule.mode = ScheduleMode::Fixed;
                config.schedule.fixed_db = 25.0;
            }
            _ => config.schedule.mode = ScheduleMode::Progressive,
        }
        let trace_out = a.out_dir.join(format!("{name}.csv"));
        let job = Job {
            method: Method::Reside,
            kspace: a.kspace.clone(),
            mask: a.mask.clone(),
            truth: Some(a.truth.clone()),
            trace_out: Some(trace_out.clone()),
            out: a.out_dir.join(format!("{name}.rsdg")),
            config,
        };
        let report = run_job(&job)?;
        let best = std::fs::read_to_string(&trace_out)
            .ok()
            .and_then(|csv| {
                csv.lines()
                    .skip(1)
                    .filter_map(|l| l.rsplit(',').next()?.parse::<f64>().ok())
                    .reduce(f64::min)
            })
            .unwrap_or(f64::NAN);
        let final_nmse = report.final_nmse_db.unwrap_or(f64::NAN);
        let _ = writeln!(
            summary,
            "{name},{},{},{:.3}",
            format_sig9(final_nmse),
            format_sig9(best),
            report.seconds
        );
        println!("{name}: final nmse_db={final_nmse} ({:.1} s)", report.seconds);
    }
    write_text(&a.out_dir.join("summary.csv"), &summary)
}
