//! Simulator of a research community in which conservative and high-risk
//! labs accumulate credit and are differentially replicated.
//!
//! Each round has two stages. In the science stage every lab completes a
//! project with its own success probability and banks a credit payoff. In
//! the evolution stage the oldest lab of a random sample of size `d` dies
//! and the highest-credit lab of a second sample replicates, founding a
//! fresh lab that keeps its parent's strategy (risky children inherit the
//! parent's success rate with probability `t`).
//!
//! Everything is seed-reproducible: one ChaCha stream per trial, derived
//! from a master seed and the trial index, makes results independent of
//! thread count and scheduling.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod experiment;
pub mod model;
pub mod output;
pub mod rng;
pub mod stats;
pub mod svg;
pub mod trial;

pub use experiment::{
    monotone_trend_statistic, run_cell, run_cell_with, run_sweep, run_sweep_with, CellSummary,
    ParamField, SweepError, SweepSpec,
};
pub use model::{Lab, ParamError, Params, Population, Strategy, StrategyKind};
pub use rng::{SeedSpec, TrialRng};
pub use trial::{
    classify_outcome, run_trial, run_trial_with, OutcomeClass, RoundRecord, TrialOptions,
    TrialResult, TrialRun,
};
