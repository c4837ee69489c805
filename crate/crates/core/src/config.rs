//! Run configuration: built-in defaults, config-file and environment layers,
//! and resolution into a fully specified [`RunConfig`].
//!
//! Precedence, highest first: command-line flags, config file (`--config`),
//! `LABSIM_*` environment variables, subcommand preset, built-in defaults.

use crate::experiment::ParamField;
use crate::model::Params;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

/// Environment variable prefix: `n-labs` becomes `LABSIM_N_LABS`, etc.
pub const ENV_PREFIX: &str = "LABSIM_";

/// Config-file / environment keys, mirroring the long CLI flags.
pub const KEYS: &[&str] = &[
    "n-labs",
    "d",
    "pc",
    "uc",
    "ur",
    "c",
    "f",
    "t",
    "rounds",
    "trials",
    "seed",
    "sweep",
    "out",
    "format",
    "svg",
    "threads",
    "no-early-exit",
    "trace",
    "no-timestamp",
    "exact-split",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// `field=start:stop:step` sweep definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub field: ParamField,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    /// Expand to `start, start+step, …` up to and including `stop` (with a
    /// small tolerance so fractional steps land on the endpoint).
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for SweepRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (field, range) = s
            .split_once('=')
            .ok_or_else(|| format!("expected FIELD=START:STOP:STEP, got `{s}`"))?;
        let field: ParamField = field.trim().parse()?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected START:STOP:STEP after `=`, got `{range}`"));
        }
        let parse = |part: &str, what: &str| -> Result<f64, String> {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid {what} `{}`", part.trim()))
        };
        let start = parse(parts[0], "start")?;
        let stop = parse(parts[1], "stop")?;
        let step = parse(parts[2], "step")?;
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err("sweep bounds must be finite".into());
        }
        if step <= 0.0 {
            return Err(format!("step must be positive, got {step}"));
        }
        if stop < start {
            return Err(format!("stop {stop} is below start {start}"));
        }
        Ok(SweepRange { field, start, stop, step })
    }
}

/// Fully resolved configuration for a simulation command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: Params,
    pub trials: usize,
    pub master_seed: u64,
    pub sweep: Option<SweepRange>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub svg: Option<PathBuf>,
    /// Worker threads; 0 means all cores.
    pub threads: usize,
    pub early_exit: bool,
    pub trace: Option<PathBuf>,
    pub include_timestamp: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: Params::default(),
            trials: 1000,
            master_seed: 0,
            sweep: None,
            out: None,
            format: OutputFormat::Csv,
            svg: None,
            threads: 0,
            early_exit: true,
            trace: None,
            include_timestamp: true,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {msg}")]
    InvalidValue { key: String, msg: String },
    #[error("config line {line}: expected `key = value`")]
    Malformed { line: usize },
}

/// One layer of partially specified settings; unset fields defer to lower
/// layers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub n_labs: Option<usize>,
    pub d: Option<usize>,
    pub p_c: Option<f64>,
    pub u_c: Option<f64>,
    pub u_r: Option<f64>,
    pub c: Option<f64>,
    pub f: Option<f64>,
    pub t: Option<f64>,
    pub rounds: Option<u32>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub sweep: Option<SweepRange>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub svg: Option<PathBuf>,
    pub threads: Option<usize>,
    pub no_early_exit: Option<bool>,
    pub trace: Option<PathBuf>,
    pub no_timestamp: Option<bool>,
    pub exact_split: Option<bool>,
}

impl ConfigLayer {
    /// Apply everything set in this layer onto `cfg`.
    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($field:expr, $target:expr) => {
                if let Some(v) = &$field {
                    $target = v.clone();
                }
            };
        }
        set!(self.n_labs, cfg.params.n_labs);
        set!(self.d, cfg.params.d);
        set!(self.p_c, cfg.params.p_c);
        set!(self.u_c, cfg.params.u_c);
        set!(self.u_r, cfg.params.u_r);
        set!(self.c, cfg.params.c);
        set!(self.f, cfg.params.f);
        set!(self.t, cfg.params.t);
        set!(self.rounds, cfg.params.rounds);
        set!(self.exact_split, cfg.params.exact_split);
        set!(self.trials, cfg.trials);
        set!(self.seed, cfg.master_seed);
        set!(self.format, cfg.format);
        set!(self.threads, cfg.threads);
        if self.sweep.is_some() {
            cfg.sweep = self.sweep.clone();
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.svg.is_some() {
            cfg.svg = self.svg.clone();
        }
        if self.trace.is_some() {
            cfg.trace = self.trace.clone();
        }
        if let Some(v) = self.no_early_exit {
            cfg.early_exit = !v;
        }
        if let Some(v) = self.no_timestamp {
            cfg.include_timestamp = !v;
        }
    }

    /// Set a value by its config key (the long flag name without `--`).
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let invalid = |msg: String| ConfigError::InvalidValue {
            key: key.to_string(),
            msg,
        };
        fn parsed<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.trim().parse::<T>().map_err(|e| ConfigError::InvalidValue {
                key: key.to_string(),
                msg: e.to_string(),
            })
        }
        let value = value.trim();
        match key {
            "n-labs" => self.n_labs = Some(parsed(key, value)?),
            "d" => self.d = Some(parsed(key, value)?),
            "pc" => self.p_c = Some(parsed(key, value)?),
            "uc" => self.u_c = Some(parsed(key, value)?),
            "ur" => self.u_r = Some(parsed(key, value)?),
            "c" => self.c = Some(parsed(key, value)?),
            "f" => self.f = Some(parsed(key, value)?),
            "t" => self.t = Some(parsed(key, value)?),
            "rounds" => self.rounds = Some(parsed(key, value)?),
            "trials" => self.trials = Some(parsed(key, value)?),
            "seed" => self.seed = Some(parsed(key, value)?),
            "sweep" => self.sweep = Some(value.parse().map_err(invalid)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = Some(value.parse().map_err(invalid)?),
            "svg" => self.svg = Some(PathBuf::from(value)),
            "threads" => self.threads = Some(parsed(key, value)?),
            "no-early-exit" => self.no_early_exit = Some(parse_bool(key, value)?),
            "trace" => self.trace = Some(PathBuf::from(value)),
            "no-timestamp" => self.no_timestamp = Some(parse_bool(key, value)?),
            "exact-split" => self.exact_split = Some(parse_bool(key, value)?),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parse the flat `key = value` config-file format (`#` comments and
    /// blank lines allowed). Unknown keys are errors.
    pub fn from_file_text(text: &str) -> Result<Self, ConfigError> {
        let mut layer = ConfigLayer::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Malformed { line: i + 1 })?;
            layer.set_key(key.trim(), value)?;
        }
        Ok(layer)
    }

    /// Read `LABSIM_*` overrides through the given lookup (injected for
    /// testability; the CLI passes `std::env::var`).
    pub fn from_env(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut layer = ConfigLayer::default();
        for key in KEYS {
            let var = format!(
                "{ENV_PREFIX}{}",
                key.to_ascii_uppercase().replace('-', "_")
            );
            if let Some(value) = lookup(&var) {
                layer.set_key(key, &value)?;
            }
        }
        Ok(layer)
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(ConfigError::InvalidValue {
            key: key.to_string(),
            msg: format!("expected a boolean, got `{other}`"),
        }),
    }
}

/// Resolve layers over the built-in defaults; later layers win.
pub fn resolve(layers: &[&ConfigLayer]) -> RunConfig {
    let mut cfg = RunConfig::default();
    for layer in layers {
        layer.apply(&mut cfg);
    }
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_reference_cell() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.params.n_labs, 100);
        assert_eq!(cfg.params.p_c, 0.8);
        assert_eq!(cfg.params.u_c, 1.0);
        assert_eq!(cfg.params.f, 0.02);
        assert_eq!(cfg.params.rounds, 1000);
        assert_eq!(cfg.trials, 1000);
        assert!(cfg.early_exit);
        assert!(cfg.include_timestamp);
    }

    #[test]
    fn file_layer_parses_and_rejects_unknown_keys() {
        let layer = ConfigLayer::from_file_text(
            "# comment\n\nn-labs = 50\nur = 7.5\nno-early-exit = true\nsweep = t=0:1:0.5\n",
        )
        .unwrap();
        assert_eq!(layer.n_labs, Some(50));
        assert_eq!(layer.u_r, Some(7.5));
        assert_eq!(layer.no_early_exit, Some(true));
        assert_eq!(layer.sweep.as_ref().unwrap().values(), vec![0.0, 0.5, 1.0]);

        assert_eq!(
            ConfigLayer::from_file_text("bogus = 1"),
            Err(ConfigError::UnknownKey("bogus".into()))
        );
        assert_eq!(
            ConfigLayer::from_file_text("n-labs 50"),
            Err(ConfigError::Malformed { line: 1 })
        );
        assert!(matches!(
            ConfigLayer::from_file_text("d = not-a-number"),
            Err(ConfigError::InvalidValue { .. })
        ));
    }

    #[test]
    fn env_layer_reads_prefixed_variables() {
        let layer = ConfigLayer::from_env(|var| match var {
            "LABSIM_TRIALS" => Some("25".to_string()),
            "LABSIM_NO_TIMESTAMP" => Some("true".to_string()),
            _ => None,
        })
        .unwrap();
        assert_eq!(layer.trials, Some(25));
        assert_eq!(layer.no_timestamp, Some(true));
        assert_eq!(layer.seed, None);
    }

    #[test]
    fn later_layers_win() {
        let mut env = ConfigLayer::default();
        env.set_key("trials", "10").unwrap();
        env.set_key("seed", "5").unwrap();
        let mut file = ConfigLayer::default();
        file.set_key("trials", "20").unwrap();
        let mut cli = ConfigLayer::default();
        cli.set_key("ur", "16").unwrap();

        let cfg = resolve(&[&env, &file, &cli]);
        assert_eq!(cfg.trials, 20); // file over env
        assert_eq!(cfg.master_seed, 5); // env fills the gap
        assert_eq!(cfg.params.u_r, 16.0); // cli wins
        assert_eq!(cfg.params.n_labs, 100); // default remains
    }

    #[test]
    fn sweep_range_expansion_includes_the_endpoint() {
        let range: SweepRange = "t=0:1:0.1".parse().unwrap();
        let values = range.values();
        assert_eq!(values.len(), 11);
        assert_eq!(values[0], 0.0);
        assert!((values[10] - 1.0).abs() < 1e-12);

        let range: SweepRange = "ur=2:20:1".parse().unwrap();
        assert_eq!(range.values().len(), 19);

        assert!("ur=2:20".parse::<SweepRange>().is_err());
        assert!("ur=20:2:1".parse::<SweepRange>().is_err());
        assert!("ur=0:1:0".parse::<SweepRange>().is_err());
        assert!("mystery=0:1:1".parse::<SweepRange>().is_err());
    }

    #[test]
    fn boolean_flags_invert_into_run_config() {
        let mut layer = ConfigLayer::default();
        layer.set_key("no-early-exit", "true").unwrap();
        layer.set_key("no-timestamp", "1").unwrap();
        let cfg = resolve(&[&layer]);
        assert!(!cfg.early_exit);
        assert!(!cfg.include_timestamp);
    }
}
