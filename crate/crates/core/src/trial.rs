//! Single-trial engine: run rounds until fixation or the round budget is
//! spent, then classify the final composition.

use crate::model::{Params, Population, Strategy};
use crate::rng::{SeedSpec, TrialRng};
use serde::{Deserialize, Serialize};

/// Composition of the population at the end of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeClass {
    AllConservative,
    AllRisky,
    Mixed,
}

/// Classify a population by strategy counts alone.
pub fn classify_outcome(pop: &Population) -> OutcomeClass {
    let risky = pop.risky_count();
    if risky == 0 {
        OutcomeClass::AllConservative
    } else if risky == pop.len() {
        OutcomeClass::AllRisky
    } else {
        OutcomeClass::Mixed
    }
}

/// Options controlling trial execution, not the model itself.
#[derive(Debug, Clone)]
pub struct TrialOptions {
    /// Stop as soon as the population is homogeneous. Composition cannot
    /// change afterwards, so the outcome class is unaffected; only post-
    /// fixation credit/rate churn is skipped.
    pub early_exit: bool,
    /// Record per-round composition snapshots.
    pub record_trace: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            early_exit: true,
            record_trace: false,
        }
    }
}

/// Result of one complete trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub outcome: OutcomeClass,
    /// First round at which the population became homogeneous (0 means
    /// homogeneous at initialization); `None` when both strategies survived
    /// to the end.
    pub fixation_round: Option<u32>,
    pub seed: SeedSpec,
    pub final_risky_count: usize,
    /// Mean success rate over risky labs in the final population, if any.
    pub mean_final_risky_success_rate: Option<f64>,
}

/// Per-round composition snapshot (collected only when tracing).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u32,
    pub conservative: usize,
    pub risky: usize,
}

/// One trial plus its (possibly empty) trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRun {
    pub result: TrialResult,
    pub trace: Vec<RoundRecord>,
}

/// Run one trial with default options (early exit on, no trace).
pub fn run_trial(params: &Params, seed: SeedSpec) -> TrialResult {
    run_trial_with(params, seed, &TrialOptions::default()).result
}

/// Run one trial: initialize from `seed`, then iterate the science stage
/// followed by the evolution stage for up to `params.rounds` rounds. A pure
/// function of `(params, seed, opts)`.
pub fn run_trial_with(params: &Params, seed: SeedSpec, opts: &TrialOptions) -> TrialRun {
    let mut rng = TrialRng::from_spec(seed);
    let mut pop = Population::init(params, &mut rng);
    let mut trace = Vec::new();
    if opts.record_trace {
        trace.push(snapshot(0, &pop));
    }
    let mut fixation_round = if pop.is_homogeneous() { Some(0) } else { None };

    for round in 1..=params.rounds {
        if opts.early_exit && fixation_round.is_some() {
            break;
        }
        pop.science_step(params, &mut rng);
        pop.evolution_step(params, &mut rng);
        if opts.record_trace {
            trace.push(snapshot(round, &pop));
        }
        if fixation_round.is_none() && pop.is_homogeneous() {
            fixation_round = Some(round);
        }
    }

    let rates: Vec<f64> = pop
        .labs()
        .iter()
        .filter_map(|lab| match lab.strategy {
            Strategy::Risky { success_rate } => Some(success_rate),
            Strategy::Conservative => None,
        })
        .collect();
    let mean_rate = if rates.is_empty() {
        None
    } else {
        Some(rates.iter().sum::<f64>() / rates.len() as f64)
    };

    TrialRun {
        result: TrialResult {
            outcome: classify_outcome(&pop),
            fixation_round,
            seed,
            final_risky_count: pop.risky_count(),
            mean_final_risky_success_rate: mean_rate,
        },
        trace,
    }
}

fn snapshot(round: u32, pop: &Population) -> RoundRecord {
    let risky = pop.risky_count();
    RoundRecord {
        round,
        conservative: pop.len() - risky,
        risky,
    }
}
