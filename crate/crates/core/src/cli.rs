//! Command-line interface: flag parsing, layered configuration, dispatch.

use crate::analysis::{expected_risky_payoff, expected_risky_payoff_quadrature, zero_success_fraction};
use crate::config::{self, ConfigLayer, OutputFormat, RunConfig, SweepRange};
use crate::experiment::{run_cell_with, run_sweep_with, CellSummary, ParamField, SweepError, SweepSpec};
use crate::model::{ParamError, Params};
use crate::output;
use crate::rng::SeedSpec;
use crate::svg;
use crate::trial::{run_trial_with, TrialOptions};
use clap::{Args, Parser, Subcommand};
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Parser)]
#[command(
    name = "labsim",
    version,
    about = "Birth-death simulator of credit selection between conservative and high-risk labs",
    after_help = "Environment variables with the LABSIM_ prefix override defaults \
(e.g. LABSIM_TRIALS=100, LABSIM_SEED=7). Precedence: flags > --config file > \
environment > subcommand preset > built-in defaults."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one parameter cell and summarize outcome proportions
    Run(CommonArgs),
    /// Sweep one parameter over a range of values
    Sweep {
        /// What to vary: FIELD=START:STOP:STEP (e.g. ur=2:20:1)
        #[arg(long, value_name = "FIELD=START:STOP:STEP")]
        sweep: Option<SweepRange>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Preset: risky-payoff sweep, u_r from 2 to 20 (c=.2, d=10, t=0)
    Fig1(CommonArgs),
    /// Preset: selection-pressure sweep, d in {1,2,5,10,20,50,100} (c=.2, t=.5, u_r=5)
    Fig2(CommonArgs),
    /// Preset: heritability sweep, t from 0 to 1 (u_r=7, d=10, c=.2)
    Fig3(CommonArgs),
    /// Report the expected risky payoff and sampler facts for (u_r, c, f)
    Payoff {
        /// Risky credit payoff
        #[arg(long)]
        ur: Option<f64>,
        /// Success-rate sampler slope
        #[arg(long)]
        c: Option<f64>,
        /// Success-rate sampler offset
        #[arg(long)]
        f: Option<f64>,
    },
}

#[derive(Debug, Args, Default)]
struct CommonArgs {
    /// Number of labs in the population
    #[arg(long, value_name = "N")]
    n_labs: Option<usize>,
    /// Selection sample size (1 = pure drift, N = deterministic selection)
    #[arg(long, value_name = "D")]
    d: Option<usize>,
    /// Conservative success probability
    #[arg(long, value_name = "P")]
    pc: Option<f64>,
    /// Conservative credit payoff
    #[arg(long, value_name = "U")]
    uc: Option<f64>,
    /// Risky credit payoff
    #[arg(long, value_name = "U")]
    ur: Option<f64>,
    /// Success-rate sampler slope
    #[arg(long, value_name = "C")]
    c: Option<f64>,
    /// Success-rate sampler offset
    #[arg(long, value_name = "F")]
    f: Option<f64>,
    /// Probability a risky child inherits its parent's success rate
    #[arg(long, value_name = "T")]
    t: Option<f64>,
    /// Rounds of science + evolution per trial
    #[arg(long, value_name = "R")]
    rounds: Option<u32>,
    /// Trials per parameter cell
    #[arg(long, value_name = "K")]
    trials: Option<usize>,
    /// Master seed; together with trial indices it fixes every draw
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Assign exactly half of the initial labs to each strategy
    #[arg(long)]
    exact_split: bool,
    /// Config file with `key = value` lines mirroring these flags
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output path ("-" or omitted = stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, value_name = "FMT")]
    format: Option<OutputFormat>,
    /// Also write an SVG chart of the outcome proportions
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Keep simulating after the population becomes homogeneous
    #[arg(long)]
    no_early_exit: bool,
    /// Write the per-round composition of the first trial to this CSV
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Omit the timestamp from JSON metadata (byte-stable output)
    #[arg(long)]
    no_timestamp: bool,
}

impl CommonArgs {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            n_labs: self.n_labs,
            d: self.d,
            p_c: self.pc,
            u_c: self.uc,
            u_r: self.ur,
            c: self.c,
            f: self.f,
            t: self.t,
            rounds: self.rounds,
            trials: self.trials,
            seed: self.seed,
            sweep: None,
            out: self.out.clone(),
            format: self.format,
            svg: self.svg.clone(),
            threads: self.threads,
            no_early_exit: self.no_early_exit.then_some(true),
            trace: self.trace.clone(),
            no_timestamp: self.no_timestamp.then_some(true),
            exact_split: self.exact_split.then_some(true),
        }
    }
}

#[derive(Debug, PartialEq)]
pub enum CliError {
    /// Bad flags or out-of-range parameters; exit code 2.
    Usage(String),
    /// Runtime / I-O failure; exit code 1.
    Runtime(String),
}

impl From<ParamError> for CliError {
    fn from(err: ParamError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(err: SweepError) -> Self {
        CliError::Usage(err.to_string())
    }
}

/// Entry point used by the binary.
pub fn main_entry() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(common) => {
            let cfg = resolve_config(&common, None)?;
            let summary = with_pool(cfg.threads, || one_cell(&cfg))?;
            write_trace(&cfg, &cfg.params.clone())?;
            emit(&cfg, &[summary])
        }
        Command::Sweep { sweep, common } => {
            let mut cfg = resolve_config(&common, None)?;
            if sweep.is_some() {
                cfg.sweep = sweep;
            }
            let range = cfg.sweep.clone().ok_or_else(|| {
                CliError::Usage(
                    "sweep requires --sweep FIELD=START:STOP:STEP (or a `sweep` config entry)"
                        .into(),
                )
            })?;
            sweep_and_emit(&cfg, range.field, range.values())
        }
        Command::Fig1(common) => {
            let preset = ConfigLayer {
                c: Some(0.2),
                d: Some(10),
                t: Some(0.0),
                ..ConfigLayer::default()
            };
            let cfg = resolve_config(&common, Some(preset))?;
            let values = (2..=20).map(f64::from).collect();
            sweep_and_emit(&cfg, ParamField::UR, values)
        }
        Command::Fig2(common) => {
            let preset = ConfigLayer {
                c: Some(0.2),
                t: Some(0.5),
                u_r: Some(5.0),
                ..ConfigLayer::default()
            };
            let cfg = resolve_config(&common, Some(preset))?;
            let values = vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
            sweep_and_emit(&cfg, ParamField::D, values)
        }
        Command::Fig3(common) => {
            let preset = ConfigLayer {
                u_r: Some(7.0),
                d: Some(10),
                c: Some(0.2),
                ..ConfigLayer::default()
            };
            let cfg = resolve_config(&common, Some(preset))?;
            let values = (0..=10).map(|i| f64::from(i) / 10.0).collect();
            sweep_and_emit(&cfg, ParamField::T, values)
        }
        Command::Payoff { ur, c, f } => payoff_report(ur, c, f),
    }
}

/// Build the final configuration: defaults < preset < environment < config
/// file < flags, then validate.
fn resolve_config(common: &CommonArgs, preset: Option<ConfigLayer>) -> Result<RunConfig, CliError> {
    let env_layer = ConfigLayer::from_env(|var| std::env::var(var).ok())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let file_layer = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config file {}: {e}", path.display()))
            })?;
            Some(ConfigLayer::from_file_text(&text).map_err(|e| CliError::Usage(e.to_string()))?)
        }
        None => None,
    };
    let cli_layer = common.layer();

    let mut layers: Vec<&ConfigLayer> = Vec::new();
    if let Some(preset) = &preset {
        layers.push(preset);
    }
    layers.push(&env_layer);
    if let Some(file) = &file_layer {
        layers.push(file);
    }
    layers.push(&cli_layer);
    let cfg = config::resolve(&layers);

    cfg.params.validate()?;
    if cfg.trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    for warning in cfg.params.warnings() {
        eprintln!("warning: {warning}");
    }
    Ok(cfg)
}

fn trial_options(cfg: &RunConfig) -> TrialOptions {
    TrialOptions {
        early_exit: cfg.early_exit,
        record_trace: false,
    }
}

fn one_cell(cfg: &RunConfig) -> CellSummary {
    run_cell_with(
        &cfg.params,
        cfg.trials,
        cfg.master_seed,
        0,
        &trial_options(cfg),
    )
}

fn sweep_and_emit(cfg: &RunConfig, field: ParamField, values: Vec<f64>) -> Result<(), CliError> {
    let spec = SweepSpec {
        base_params: cfg.params.clone(),
        swept: field,
        values,
        trials_per_cell: cfg.trials,
        master_seed: cfg.master_seed,
    };
    let summaries = with_pool(cfg.threads, || run_sweep_with(&spec, &trial_options(cfg)))??;
    let first_cell = summaries[0].params.clone();
    write_trace(cfg, &first_cell)?;
    emit(cfg, &summaries)
}

/// If a trace path is configured, rerun the first trial (stream 0 of the
/// first cell) with tracing on and dump its per-round composition.
fn write_trace(cfg: &RunConfig, params: &Params) -> Result<(), CliError> {
    let Some(path) = &cfg.trace else {
        return Ok(());
    };
    let opts = TrialOptions {
        early_exit: cfg.early_exit,
        record_trace: true,
    };
    let run = run_trial_with(params, SeedSpec::new(cfg.master_seed, 0), &opts);
    let file = File::create(path).map_err(|e| write_error(path, e))?;
    output::write_trace_csv(BufWriter::new(file), &run.trace).map_err(|e| write_error(path, e))
}

fn emit(cfg: &RunConfig, summaries: &[CellSummary]) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) if path != Path::new("-") => {
            let file = File::create(path).map_err(|e| write_error(path, e))?;
            write_report(cfg, summaries, BufWriter::new(file)).map_err(|e| write_error(path, e))?;
        }
        _ => {
            write_report(cfg, summaries, io::stdout().lock())
                .map_err(|e| CliError::Runtime(format!("cannot write to stdout: {e}")))?;
        }
    }
    if let Some(path) = &cfg.svg {
        fs::write(path, svg::outcome_chart(summaries)).map_err(|e| write_error(path, e))?;
    }
    Ok(())
}

fn write_report<W: Write>(cfg: &RunConfig, summaries: &[CellSummary], w: W) -> io::Result<()> {
    match cfg.format {
        OutputFormat::Csv => output::write_csv(w, summaries),
        OutputFormat::Json => {
            let metadata = output::Metadata {
                tool: "labsim",
                version: env!("CARGO_PKG_VERSION"),
                timestamp_unix: cfg.include_timestamp.then(now_unix),
                config: serde_json::to_value(cfg).expect("config serializes"),
            };
            output::write_json(w, summaries, &metadata)
        }
    }
}

fn payoff_report(ur: Option<f64>, c: Option<f64>, f: Option<f64>) -> Result<(), CliError> {
    let defaults = Params::default();
    let ur = ur.unwrap_or(defaults.u_r);
    let c = c.unwrap_or(defaults.c);
    let f = f.unwrap_or(defaults.f);
    for (name, value) in [("ur", ur), ("c", c), ("f", f)] {
        if !value.is_finite() || value < 0.0 {
            return Err(CliError::Usage(format!(
                "{name} must be a nonnegative finite number, got {value}"
            )));
        }
    }
    println!("expected risky payoff (closed form): {:.6}", expected_risky_payoff(ur, c, f));
    println!("quadrature check:                    {:.6}", expected_risky_payoff_quadrature(ur, c, f));
    println!("zero-success fraction:               {:.6}", zero_success_fraction(c, f));
    println!("maximum success rate:                {:.6}", (c - f).max(0.0));
    Ok(())
}

fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn write_error(path: &Path, err: io::Error) -> CliError {
    CliError::Runtime(format!("cannot write {}: {err}", path.display()))
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
