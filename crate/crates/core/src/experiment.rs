//! Many-trial parameter cells and sweeps with deterministic per-trial
//! seeding: trial `i` of cell `k` always runs on stream
//! `k * trials_per_cell + i`, so results are identical for any worker count
//! and adding cells never perturbs earlier ones.

use crate::model::{ParamError, Params};
use crate::rng::SeedSpec;
use crate::stats::{spearman, wilson_interval};
use crate::trial::{run_trial_with, OutcomeClass, TrialOptions, TrialResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Numeric `Params` field a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamField {
    NLabs,
    D,
    PC,
    UC,
    UR,
    C,
    F,
    T,
    Rounds,
}

impl ParamField {
    pub fn name(&self) -> &'static str {
        match self {
            ParamField::NLabs => "n_labs",
            ParamField::D => "d",
            ParamField::PC => "p_c",
            ParamField::UC => "u_c",
            ParamField::UR => "u_r",
            ParamField::C => "c",
            ParamField::F => "f",
            ParamField::T => "t",
            ParamField::Rounds => "rounds",
        }
    }

    /// Set this field on `params`. Integer fields reject fractional values.
    pub fn apply(&self, params: &mut Params, value: f64) -> Result<(), SweepError> {
        if !value.is_finite() {
            return Err(SweepError::NonFiniteValue { field: *self });
        }
        let as_count = |field: ParamField| -> Result<usize, SweepError> {
            if value < 0.0 || value.fract() != 0.0 || value > 1e12 {
                return Err(SweepError::NotAnInteger { field, value });
            }
            Ok(value as usize)
        };
        match self {
            ParamField::NLabs => params.n_labs = as_count(*self)?,
            ParamField::D => params.d = as_count(*self)?,
            ParamField::Rounds => params.rounds = as_count(*self)? as u32,
            ParamField::PC => params.p_c = value,
            ParamField::UC => params.u_c = value,
            ParamField::UR => params.u_r = value,
            ParamField::C => params.c = value,
            ParamField::F => params.f = value,
            ParamField::T => params.t = value,
        }
        Ok(())
    }
}

impl fmt::Display for ParamField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "n_labs" | "nlabs" | "n" => Ok(ParamField::NLabs),
            "d" => Ok(ParamField::D),
            "p_c" | "pc" => Ok(ParamField::PC),
            "u_c" | "uc" => Ok(ParamField::UC),
            "u_r" | "ur" => Ok(ParamField::UR),
            "c" => Ok(ParamField::C),
            "f" => Ok(ParamField::F),
            "t" => Ok(ParamField::T),
            "rounds" => Ok(ParamField::Rounds),
            other => Err(format!(
                "unknown parameter `{other}` (expected one of n_labs, d, pc, uc, ur, c, f, t, rounds)"
            )),
        }
    }
}

/// One sweep: vary one field over `values` with `trials_per_cell` trials per
/// cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base_params: Params,
    pub swept: ParamField,
    pub values: Vec<f64>,
    pub trials_per_cell: usize,
    pub master_seed: u64,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep needs at least one value")]
    EmptyValues,
    #[error("trials per cell must be at least 1")]
    NoTrials,
    #[error("swept value for {field} must be a nonnegative integer, got {value}")]
    NotAnInteger { field: ParamField, value: f64 },
    #[error("swept value for {field} is not finite")]
    NonFiniteValue { field: ParamField },
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Aggregate over one cell's trials. Proportions are exact count ratios and
/// sum to 1; intervals are 95% Wilson.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub params: Params,
    /// Field and value this cell was swept over, if it came from a sweep.
    pub swept_param: Option<ParamField>,
    pub swept_value: Option<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub risky_count: usize,
    pub conservative_count: usize,
    pub mixed_count: usize,
    pub prop_risky: f64,
    pub prop_conservative: f64,
    pub prop_mixed: f64,
    pub ci_risky: (f64, f64),
    pub ci_conservative: (f64, f64),
    pub ci_mixed: (f64, f64),
    /// Mean fixation round over trials that fixed; `None` if none did.
    pub mean_fixation_round: Option<f64>,
}

impl CellSummary {
    fn from_results(
        params: Params,
        trials: usize,
        master_seed: u64,
        results: &[TrialResult],
    ) -> Self {
        let count = |class: OutcomeClass| results.iter().filter(|r| r.outcome == class).count();
        let risky_count = count(OutcomeClass::AllRisky);
        let conservative_count = count(OutcomeClass::AllConservative);
        let mixed_count = count(OutcomeClass::Mixed);
        debug_assert_eq!(risky_count + conservative_count + mixed_count, trials);

        let fixed: Vec<u32> = results.iter().filter_map(|r| r.fixation_round).collect();
        let mean_fixation_round = if fixed.is_empty() {
            None
        } else {
            Some(fixed.iter().map(|&r| r as f64).sum::<f64>() / fixed.len() as f64)
        };

        CellSummary {
            params,
            swept_param: None,
            swept_value: None,
            trials,
            master_seed,
            risky_count,
            conservative_count,
            mixed_count,
            prop_risky: risky_count as f64 / trials as f64,
            prop_conservative: conservative_count as f64 / trials as f64,
            prop_mixed: mixed_count as f64 / trials as f64,
            ci_risky: wilson_interval(risky_count, trials, 0.95),
            ci_conservative: wilson_interval(conservative_count, trials, 0.95),
            ci_mixed: wilson_interval(mixed_count, trials, 0.95),
            mean_fixation_round,
        }
    }

    /// Proportion of trials ending in the given class.
    pub fn proportion(&self, class: OutcomeClass) -> f64 {
        match class {
            OutcomeClass::AllRisky => self.prop_risky,
            OutcomeClass::AllConservative => self.prop_conservative,
            OutcomeClass::Mixed => self.prop_mixed,
        }
    }
}

/// Run `trials` independent trials of one cell on streams
/// `(master_seed, 0..trials)`.
pub fn run_cell(params: &Params, trials: usize, master_seed: u64) -> CellSummary {
    run_cell_with(params, trials, master_seed, 0, &TrialOptions::default())
}

/// As [`run_cell`], with the trial streams offset by `stream_offset` (sweeps
/// give each cell a disjoint stream range) and explicit trial options.
/// Trials run in parallel; aggregation order is fixed by trial index.
pub fn run_cell_with(
    params: &Params,
    trials: usize,
    master_seed: u64,
    stream_offset: u64,
    opts: &TrialOptions,
) -> CellSummary {
    let opts = TrialOptions {
        record_trace: false,
        ..opts.clone()
    };
    let results: Vec<TrialResult> = (0..trials as u64)
        .into_par_iter()
        .map(|i| run_trial_with(params, SeedSpec::new(master_seed, stream_offset + i), &opts).result)
        .collect();
    CellSummary::from_results(params.clone(), trials, master_seed, &results)
}

/// Run one cell per swept value, in input order. All cells are validated
/// before any trial runs.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CellSummary>, SweepError> {
    run_sweep_with(spec, &TrialOptions::default())
}

pub fn run_sweep_with(
    spec: &SweepSpec,
    opts: &TrialOptions,
) -> Result<Vec<CellSummary>, SweepError> {
    if spec.values.is_empty() {
        return Err(SweepError::EmptyValues);
    }
    if spec.trials_per_cell == 0 {
        return Err(SweepError::NoTrials);
    }
    let mut cells = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let mut params = spec.base_params.clone();
        spec.swept.apply(&mut params, value)?;
        params.validate()?;
        cells.push((params, value));
    }
    Ok(cells
        .into_iter()
        .enumerate()
        .map(|(index, (params, value))| {
            let offset = (index * spec.trials_per_cell) as u64;
            let mut summary =
                run_cell_with(&params, spec.trials_per_cell, spec.master_seed, offset, opts);
            summary.swept_param = Some(spec.swept);
            summary.swept_value = Some(value);
            summary
        })
        .collect())
}

/// Spearman rank correlation between the swept values and the proportion of
/// `class` outcomes. Panics on fewer than 3 cells or cells that did not come
/// from a sweep (contract violation).
pub fn monotone_trend_statistic(summaries: &[CellSummary], class: OutcomeClass) -> f64 {
    assert!(
        summaries.len() >= 3,
        "trend statistic needs at least 3 cells, got {}",
        summaries.len()
    );
    let xs: Vec<f64> = summaries
        .iter()
        .map(|s| s.swept_value.expect("cell does not come from a sweep"))
        .collect();
    let ys: Vec<f64> = summaries.iter().map(|s| s.proportion(class)).collect();
    spearman(&xs, &ys)
}
