//! Flat `key=value` run configuration with desk and paper profiles.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use reside_core::nn::TrainSpec;
use reside_core::pds::PdsParams;
use reside_core::reside::{PatchPlan, ResideConfig, ScheduleMode, SnrSchedule};
use reside_core::wavelet::WaveletConfig;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Desk,
    Paper,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Desk => "desk",
            Profile::Paper => "paper",
        }
    }
}

impl FromStr for Profile {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            _ => Err(CliError::usage(format!("unknown profile '{s}' (expected desk or paper)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ZeroFilled,
    L1Wavelet,
    PnpMedian,
    Reside,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ZeroFilled => "zero-filled",
            Method::L1Wavelet => "l1-wavelet",
            Method::PnpMedian => "pnp-median",
            Method::Reside => "reside",
        }
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "zero-filled" => Ok(Method::ZeroFilled),
            "l1-wavelet" => Ok(Method::L1Wavelet),
            "pnp-median" => Ok(Method::PnpMedian),
            "reside" => Ok(Method::Reside),
            _ => Err(CliError::usage(format!(
                "unknown method '{s}' (expected zero-filled, l1-wavelet, pnp-median or reside)"
            ))),
        }
    }
}

/// Wavelet weight: a fixed value or a grid search against the ground truth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lambda {
    Fixed(f64),
    Auto,
}

/// Candidate weights for `lambda=auto`: 25 log-spaced values from 1e-4 to 1e-1.
pub fn lambda_grid() -> Vec<f64> {
    (0..25).map(|k| 1e-4 * 10f64.powf(k as f64 / 8.0)).collect()
}

/// Every solver hyperparameter. Serialized verbatim into run manifests.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub profile: Profile,
    pub iterations: usize,
    pub nu: f64,
    pub ratio: f64,
    pub norm_a: f64,
    pub lambda: Lambda,
    pub levels: usize,
    pub schedule: SnrSchedule,
    pub patches: PatchPlan,
    pub train: TrainSpec,
    pub seed: u64,
    pub train_every: usize,
    pub warm_start: bool,
}

impl RunConfig {
    pub fn for_profile(profile: Profile) -> Self {
        let base = Self {
            profile,
            iterations: 70,
            nu: 1.0,
            ratio: 1.0,
            norm_a: 1.0,
            lambda: Lambda::Fixed(3e-3),
            levels: 4,
            schedule: SnrSchedule::default(),
            patches: PatchPlan::default(),
            train: TrainSpec::default(),
            seed: 7,
            train_every: 1,
            warm_start: false,
        };
        match profile {
            Profile::Paper => base,
            Profile::Desk => Self {
                iterations: 30,
                schedule: SnrSchedule {
                    period: DESK_SNR_PERIOD,
                    ..SnrSchedule::default()
                },
                patches: PatchPlan { count: 48, size: 32 },
                train: TrainSpec {
                    epochs: 20,
                    minibatch: 16,
                    lr: 1e-3,
                },
                ..base
            },
        }
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
            value
                .parse()
                .map_err(|_| CliError::usage(format!("invalid value '{value}' for key '{key}'")))
        }
        match key {
            "profile" => *self = Self::for_profile(value.parse()?),
            "iterations" => self.iterations = parse(key, value)?,
            "nu" => self.nu = parse(key, value)?,
            "ratio" => self.ratio = parse(key, value)?,
            "norm_a" => self.norm_a = parse(key, value)?,
            "lambda" => {
                self.lambda = if value == "auto" {
                    Lambda::Auto
                } else {
                    Lambda::Fixed(parse(key, value)?)
                }
            }
            "levels" => self.levels = parse(key, value)?,
            "schedule" => {
                self.schedule.mode = match value {
                    "progressive" => ScheduleMode::Progressive,
                    "fixed" => ScheduleMode::Fixed,
                    _ => return Err(CliError::usage(format!("invalid schedule '{value}'"))),
                }
            }
            "snr_start" => self.schedule.start_db = parse(key, value)?,
            "snr_step" => self.schedule.step_db = parse(key, value)?,
            "snr_period" => self.schedule.period = parse(key, value)?,
            "snr_cap" => self.schedule.cap_db = parse(key, value)?,
            "snr_fixed" => self.schedule.fixed_db = parse(key, value)?,
            "patches" => self.patches.count = parse(key, value)?,
            "patch_size" => self.patches.size = parse(key, value)?,
            "epochs" => self.train.epochs = parse(key, value)?,
            "minibatch" => self.train.minibatch = parse(key, value)?,
            "lr" => self.train.lr = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "train_every" => self.train_every = parse(key, value)?,
            "warm_start" => self.warm_start = parse(key, value)?,
            _ => return Err(CliError::usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key=value` override as given on the command line.
    pub fn apply_assignment(&mut self, assignment: &str) -> CliResult<()> {
        let (k, v) = split_assignment(assignment)
            .ok_or_else(|| CliError::usage(format!("expected key=value, got '{assignment}'")))?;
        self.set(k, v)
    }

    /// Ordered `(key, value)` pairs; `profile` comes first so that reloading
    /// applies it before the individual overrides.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let s = &self.schedule;
        vec![
            ("profile", self.profile.name().into()),
            ("iterations", self.iterations.to_string()),
            ("nu", self.nu.to_string()),
            ("ratio", self.ratio.to_string()),
            ("norm_a", self.norm_a.to_string()),
            (
                "lambda",
                match self.lambda {
                    Lambda::Fixed(v) => v.to_string(),
                    Lambda::Auto => "auto".into(),
                },
            ),
            ("levels", self.levels.to_string()),
            (
                "schedule",
                match s.mode {
                    ScheduleMode::Progressive => "progressive".into(),
                    ScheduleMode::Fixed => "fixed".into(),
                },
            ),
            ("snr_start", s.start_db.to_string()),
            ("snr_step", s.step_db.to_string()),
            ("snr_period", s.period.to_string()),
            ("snr_cap", s.cap_db.to_string()),
            ("snr_fixed", s.fixed_db.to_string()),
            ("patches", self.patches.count.to_string()),
            ("patch_size", self.patches.size.to_string()),
            ("epochs", self.train.epochs.to_string()),
            ("minibatch", self.train.minibatch.to_string()),
            ("lr", self.train.lr.to_string()),
            ("seed", self.seed.to_string()),
            ("train_every", self.train_every.to_string()),
            ("warm_start", self.warm_start.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn pds_params(&self) -> PdsParams {
        PdsParams {
            nu: self.nu,
            ratio: self.ratio,
            iterations: self.iterations,
            norm_a: self.norm_a,
        }
    }

    pub fn wavelet(&self, lambda: f64) -> WaveletConfig {
        WaveletConfig {
            levels: self.levels,
            lambda,
        }
    }

    pub fn reside(&self) -> ResideConfig {
        ResideConfig {
            pds: self.pds_params(),
            schedule: self.schedule,
            patches: self.patches,
            train: self.train,
            iterations: self.iterations,
            master_seed: self.seed,
            train_every: self.train_every,
            warm_start: self.warm_start,
        }
    }
}

/// Training-SNR step period of the desk profile. Thirty iterations with this
/// period walk the schedule from 10 dB to 35 dB.
pub const DESK_SNR_PERIOD: usize = 5;

pub fn split_assignment(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    (!k.is_empty()).then_some((k, v))
}

/// Parsed config file: solver settings plus the `run.*` entries a manifest
/// carries. `result.*` entries are informational and skipped.
#[derive(Clone, Debug)]
pub struct ConfigFile {
    pub config: RunConfig,
    pub run: Vec<(String, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str, base: RunConfig) -> CliResult<Self> {
        let mut config = base;
        let mut run = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = split_assignment(line)
                .ok_or_else(|| CliError::usage(format!("line {}: expected key=value, got '{line}'", n + 1)))?;
            if let Some(rest) = k.strip_prefix("run.") {
                run.push((rest.to_string(), v.to_string()));
            } else if !k.starts_with("result.") {
                config
                    .set(k, v)
                    .map_err(|e| CliError::usage(format!("line {}: {e}", n + 1)))?;
            }
        }
        Ok(Self { config, run })
    }

    pub fn load(path: &Path, base: RunConfig) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, base)
    }

    pub fn run_value(&self, key: &str) -> Option<&str> {
        self.run.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn run_path(&self, key: &str) -> Option<PathBuf> {
        self.run_value(key).filter(|v| !v.is_empty()).map(PathBuf::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trips() {
        let mut c = RunConfig::for_profile(Profile::Desk);
        c.set("lr", "0.00037").unwrap();
        c.set("lambda", "auto").unwrap();
        c.set("schedule", "fixed").unwrap();
        c.set("warm_start", "true").unwrap();
        let back = ConfigFile::parse(&c.to_text(), RunConfig::for_profile(Profile::Paper)).unwrap();
        assert_eq!(back.config, c);
    }

    #[test]
    fn profile_resets_then_overrides_apply() {
        let text = "profile=paper\nepochs=3\n# comment\n\nrun.method=reside\nresult.nmse_db=-20\n";
        let f = ConfigFile::parse(text, RunConfig::for_profile(Profile::Desk)).unwrap();
        assert_eq!(f.config.profile, Profile::Paper);
        assert_eq!(f.config.train.epochs, 3);
        assert_eq!(f.config.patches, PatchPlan { count: 144, size: 64 });
        assert_eq!(f.run_value("method"), Some("reside"));
    }

    #[test]
    fn desk_profile_values() {
        let c = RunConfig::for_profile(Profile::Desk);
        assert_eq!(c.iterations, 30);
        assert_eq!(c.patches, PatchPlan { count: 48, size: 32 });
        assert_eq!((c.train.epochs, c.train.minibatch), (20, 16));
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::for_profile(Profile::Desk);
        assert!(c.set("nope", "1").is_err());
        assert!(c.set("epochs", "x").is_err());
        assert!(c.apply_assignment("epochs").is_err());
        assert!(ConfigFile::parse("garbage line", c.clone()).is_err());
        assert!("turbo".parse::<Method>().is_err());
    }

    #[test]
    fn float_values_survive_text() {
        for v in lambda_grid() {
            let mut c = RunConfig::for_profile(Profile::Desk);
            c.lambda = Lambda::Fixed(v);
            let back = ConfigFile::parse(&c.to_text(), RunConfig::for_profile(Profile::Desk)).unwrap();
            assert_eq!(back.config.lambda, Lambda::Fixed(v));
        }
    }
}
