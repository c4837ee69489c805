//! Core population model: labs, strategies, parameters, and the two stages
//! (science, then evolution) that make up one simulated round.

use crate::rng::TrialRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A lab's research strategy. Risky labs carry their own characteristic
/// success rate, fixed when the lab is founded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Conservative,
    Risky { success_rate: f64 },
}

/// Strategy kind stripped of the per-lab rate, for composition bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Conservative,
    Risky,
}

impl Strategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            Strategy::Conservative => StrategyKind::Conservative,
            Strategy::Risky { .. } => StrategyKind::Risky,
        }
    }

    pub fn is_risky(&self) -> bool {
        matches!(self, Strategy::Risky { .. })
    }
}

/// One research lab: a strategy, the credit it has accumulated, and its age
/// in completed rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Lab {
    pub id: u64,
    pub strategy: Strategy,
    pub credit: f64,
    pub age: u32,
}

impl Lab {
    pub fn new(id: u64, strategy: Strategy) -> Self {
        Lab {
            id,
            strategy,
            credit: 0.0,
            age: 0,
        }
    }

    /// Per-round probability that this lab's project succeeds: `p_c` for
    /// conservative labs, the lab's own rate for risky ones.
    pub fn success_probability(&self, params: &Params) -> f64 {
        match self.strategy {
            Strategy::Conservative => params.p_c,
            Strategy::Risky { success_rate } => success_rate,
        }
    }

    /// Credit banked when a project succeeds.
    pub fn payoff(&self, params: &Params) -> f64 {
        match self.strategy {
            Strategy::Conservative => params.u_c,
            Strategy::Risky { .. } => params.u_r,
        }
    }

    /// Child lab founded by a student of this lab: fresh id, zero credit,
    /// zero age. Conservative labs breed true. A risky child inherits the
    /// parent's success rate with probability `t` and draws a fresh one
    /// otherwise; the inheritance draw is consumed for every risky parent so
    /// the stream layout stays fixed.
    pub fn spawn_child(&self, id: u64, params: &Params, rng: &mut TrialRng) -> Lab {
        let strategy = match self.strategy {
            Strategy::Conservative => Strategy::Conservative,
            Strategy::Risky { success_rate } => {
                let inherited = rng.bernoulli(params.t);
                let rate = if inherited {
                    success_rate
                } else {
                    rng.draw_success_rate(params.c, params.f)
                };
                Strategy::Risky { success_rate: rate }
            }
        };
        Lab::new(id, strategy)
    }
}

/// Full parameterization of one simulation cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Number of labs in the population.
    pub n_labs: usize,
    /// Selection sample size for both death and replication, in `1..=n_labs`.
    /// 1 is pure drift; `n_labs` is deterministic selection.
    pub d: usize,
    /// Success probability of conservative projects.
    pub p_c: f64,
    /// Credit payoff of a successful conservative project.
    pub u_c: f64,
    /// Credit payoff of a successful risky project.
    pub u_r: f64,
    /// Slope of the risky success-rate sampler `max(0, c·x² − f)`.
    pub c: f64,
    /// Offset of the risky success-rate sampler.
    pub f: f64,
    /// Probability that a risky child inherits its parent's success rate.
    pub t: f64,
    /// Rounds of science + evolution per trial.
    pub rounds: u32,
    /// Assign exactly half of the initial labs to each strategy instead of
    /// an independent fair coin per lab.
    #[serde(default)]
    pub exact_split: bool,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n_labs: 100,
            d: 10,
            p_c: 0.8,
            u_c: 1.0,
            u_r: 10.0,
            c: 0.2,
            f: 0.02,
            t: 0.0,
            rounds: 1000,
            exact_split: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{name} must be a finite number, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("{name} must be a probability in [0, 1], got {value}")]
    NotProbability { name: &'static str, value: f64 },
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must not be negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("n_labs must be at least 1")]
    NoLabs,
    #[error("rounds must be at least 1")]
    NoRounds,
    #[error("d must be in 1..={n_labs} (selection sample cannot exceed the population), got {d}")]
    SelectionSampleOutOfRange { d: usize, n_labs: usize },
}

impl Params {
    /// Hard validation: range violations are errors. Regime checks that the
    /// model runs fine outside of are reported by [`Params::warnings`].
    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in [
            ("p_c", self.p_c),
            ("u_c", self.u_c),
            ("u_r", self.u_r),
            ("c", self.c),
            ("f", self.f),
            ("t", self.t),
        ] {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name, value });
            }
        }
        if self.n_labs == 0 {
            return Err(ParamError::NoLabs);
        }
        if self.rounds == 0 {
            return Err(ParamError::NoRounds);
        }
        if self.d == 0 || self.d > self.n_labs {
            return Err(ParamError::SelectionSampleOutOfRange {
                d: self.d,
                n_labs: self.n_labs,
            });
        }
        for (name, value) in [("p_c", self.p_c), ("t", self.t)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamError::NotProbability { name, value });
            }
        }
        for (name, value) in [("u_c", self.u_c), ("u_r", self.u_r)] {
            if value <= 0.0 {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        for (name, value) in [("c", self.c), ("f", self.f)] {
            if value < 0.0 {
                return Err(ParamError::Negative { name, value });
            }
        }
        Ok(())
    }

    /// Advisory checks for configurations outside the modeled regime.
    pub fn warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.u_r <= self.u_c {
            warnings.push(format!(
                "u_r ({}) does not exceed u_c ({}); successful risky projects pay no more than conservative ones",
                self.u_r, self.u_c
            ));
        }
        if self.max_risky_rate() >= self.p_c {
            warnings.push(format!(
                "maximum risky success rate ({}) reaches p_c ({}); some risky labs can out-succeed conservative ones",
                self.max_risky_rate(),
                self.p_c
            ));
        }
        warnings
    }

    /// Largest success rate the sampler can produce: `max(0, c − f)`.
    pub fn max_risky_rate(&self) -> f64 {
        (self.c - self.f).max(0.0)
    }
}

/// The community of labs. Size stays exactly `n_labs` across rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    labs: Vec<Lab>,
    next_id: u64,
}

impl Population {
    /// Initial population: each lab is independently conservative or risky
    /// with probability 1/2 (or an exact half split under `exact_split`,
    /// shuffled; an odd leftover slot is decided by one fair coin). Every
    /// risky lab draws its own success rate; all credits and ages start at
    /// zero.
    pub fn init(params: &Params, rng: &mut TrialRng) -> Self {
        let n = params.n_labs;
        let risky_flags: Vec<bool> = if params.exact_split {
            let mut flags = vec![false; n];
            for flag in flags.iter_mut().take(n / 2) {
                *flag = true;
            }
            if n % 2 == 1 && rng.bernoulli(0.5) {
                flags[n / 2] = true;
            }
            for i in (1..n).rev() {
                let j = rng.index_below(i + 1);
                flags.swap(i, j);
            }
            flags
        } else {
            (0..n).map(|_| rng.bernoulli(0.5)).collect()
        };
        let labs = risky_flags
            .into_iter()
            .enumerate()
            .map(|(i, risky)| {
                let strategy = if risky {
                    Strategy::Risky {
                        success_rate: rng.draw_success_rate(params.c, params.f),
                    }
                } else {
                    Strategy::Conservative
                };
                Lab::new(i as u64, strategy)
            })
            .collect();
        Population {
            labs,
            next_id: n as u64,
        }
    }

    /// Build a population from explicit labs (custom setups and tests).
    pub fn from_labs(labs: Vec<Lab>) -> Self {
        let next_id = labs.iter().map(|lab| lab.id).max().map_or(0, |m| m + 1);
        Population { labs, next_id }
    }

    pub fn labs(&self) -> &[Lab] {
        &self.labs
    }

    pub fn len(&self) -> usize {
        self.labs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labs.is_empty()
    }

    pub fn risky_count(&self) -> usize {
        self.labs.iter().filter(|lab| lab.strategy.is_risky()).count()
    }

    /// True once only one strategy kind remains; composition can never
    /// change afterwards (children keep their parent's kind).
    pub fn is_homogeneous(&self) -> bool {
        let risky = self.risky_count();
        risky == 0 || risky == self.len()
    }

    /// Science stage: each lab independently completes a project with its
    /// own success probability and banks its payoff; every lab ages by one
    /// round. Draws are consumed in population order.
    pub fn science_step(&mut self, params: &Params, rng: &mut TrialRng) {
        for lab in &mut self.labs {
            let p = lab.success_probability(params);
            if rng.bernoulli(p) {
                let gain = lab.payoff(params);
                lab.credit += gain;
            }
            lab.age += 1;
        }
    }

    /// Evolution stage: one death, one birth.
    ///
    /// Draw order is fixed: (1) sample `d` labs without replacement and
    /// remove the oldest, ties broken uniformly; (2) sample `min(d, N−1)` of
    /// the survivors and take the one with the most credit as parent, ties
    /// broken uniformly; (3) the parent's child fills the vacant slot. With
    /// a single lab there are no survivors to sample, so the lab refounds
    /// itself.
    pub fn evolution_step(&mut self, params: &Params, rng: &mut TrialRng) {
        let n = self.labs.len();
        debug_assert_eq!(n, params.n_labs);
        let death_sample = rng.sample_without_replacement(n, params.d);
        let dead_idx = argmax_random_tie(&death_sample, |i| self.labs[i].age, rng);

        let parent_idx = if n == 1 {
            dead_idx
        } else {
            let k = params.d.min(n - 1);
            let survivor_sample = rng.sample_without_replacement(n - 1, k);
            // survivor index j maps to population index j, skipping the vacant slot
            let candidates: Vec<usize> = survivor_sample
                .into_iter()
                .map(|j| if j < dead_idx { j } else { j + 1 })
                .collect();
            argmax_random_tie(&candidates, |i| self.labs[i].credit, rng)
        };

        let id = self.next_id;
        self.next_id += 1;
        let child = self.labs[parent_idx].spawn_child(id, params, rng);
        self.labs[dead_idx] = child;
    }
}

/// Element of `candidates` with the maximum key; ties resolved by one
/// uniform draw (randomness is consumed only when a tie exists).
fn argmax_random_tie<K: PartialOrd + Copy>(
    candidates: &[usize],
    key: impl Fn(usize) -> K,
    rng: &mut TrialRng,
) -> usize {
    debug_assert!(!candidates.is_empty());
    let mut best = vec![candidates[0]];
    let mut best_key = key(candidates[0]);
    for &idx in &candidates[1..] {
        let k = key(idx);
        if k > best_key {
            best_key = k;
            best.clear();
            best.push(idx);
        } else if k == best_key {
            best.push(idx);
        }
    }
    if best.len() == 1 {
        best[0]
    } else {
        best[rng.index_below(best.len())]
    }
}
