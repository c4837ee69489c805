//! Acceptance suite: full-scale statistical checks (1000 trials x 1000
//! rounds x 100 labs per cell) plus the exact property suite. One test per
//! criterion; each prints a PASS/FAIL line with the measured values.
//!
//! Run with: cargo test --test acceptance -- --nocapture

use labsim::analysis::{
    expected_risky_payoff, expected_risky_payoff_quadrature, zero_success_fraction,
};
use labsim::{
    classify_outcome, monotone_trend_statistic, run_cell, run_sweep, run_trial, run_trial_with,
    CellSummary, Lab, OutcomeClass, ParamField, Params, Population, SeedSpec, Strategy,
    StrategyKind, SweepSpec, TrialOptions, TrialRng,
};
use std::collections::HashSet;

fn report(id: u32, ok: bool, detail: &str) {
    println!("acceptance {id} {}: {detail}", if ok { "PASS" } else { "FAIL" });
}

#[test]
fn acceptance_1_expected_payoff_oracle() {
    let closed = expected_risky_payoff(10.0, 0.2, 0.02);
    // the closed form, written out independently of the implementation
    let reference = 10.0 * (0.2 / 3.0 - 0.02 + (2.0 / 3.0) * 0.02f64.powf(1.5) / 0.2f64.sqrt());
    let quad = expected_risky_payoff_quadrature(10.0, 0.2, 0.02);
    let rel = (closed - quad).abs() / closed.abs();
    let rounded = (closed * 10.0).round() / 10.0;

    let ok = (closed - reference).abs() < 1e-12 && rel < 1e-9 && rounded == 0.5;
    report(
        1,
        ok,
        &format!("expected payoff oracle: closed={closed:.12}, quadrature={quad:.12}, rel err={rel:.2e}, rounds to {rounded}"),
    );
    assert!(ok);
}

#[test]
fn acceptance_2_crossover_at_ur_10() {
    let params = Params::default(); // u_r = 10, c = .2, d = 10, t = 0
    let summary = run_cell(&params, 1000, 2001);
    let gap = (summary.prop_risky - summary.prop_conservative).abs();
    let ok = gap <= 0.10;
    report(
        2,
        ok,
        &format!(
            "crossover at u_r=10: prop_risky={}, prop_conservative={}, |gap|={gap:.3} (<= 0.10)",
            summary.prop_risky, summary.prop_conservative
        ),
    );
    assert!(ok);
}

#[test]
fn acceptance_3_risky_dominance_at_ur_16() {
    let params = Params {
        u_r: 16.0,
        ..Params::default()
    };
    let summary = run_cell(&params, 1000, 2002);
    let ok = summary.prop_risky >= 0.95;
    report(
        3,
        ok,
        &format!("risky dominance at u_r=16: prop_risky={} (>= 0.95)", summary.prop_risky),
    );
    assert!(ok);
}

#[test]
fn acceptance_4_payoff_sweep_trend() {
    let spec = SweepSpec {
        base_params: Params::default(), // c = .2, d = 10, t = 0
        swept: ParamField::UR,
        values: (2..=20).map(f64::from).collect(),
        trials_per_cell: 1000,
        master_seed: 2003,
    };
    let summaries = run_sweep(&spec).unwrap();
    let rho_risky = monotone_trend_statistic(&summaries, OutcomeClass::AllRisky);
    let rho_cons = monotone_trend_statistic(&summaries, OutcomeClass::AllConservative);
    let ok = rho_risky >= 0.9 && rho_cons <= -0.9;
    report(
        4,
        ok,
        &format!("payoff sweep trend: spearman(risky)={rho_risky:.3} (>= 0.9), spearman(conservative)={rho_cons:.3} (<= -0.9)"),
    );
    assert!(ok);
}

#[test]
fn acceptance_5_selection_pressure_trend() {
    let spec = SweepSpec {
        base_params: Params {
            c: 0.2,
            t: 0.5,
            u_r: 5.0,
            ..Params::default()
        },
        swept: ParamField::D,
        values: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
        trials_per_cell: 1000,
        master_seed: 2004,
    };
    let summaries = run_sweep(&spec).unwrap();

    // prop_risky nondecreasing in d (up to CI overlap) for d >= 2
    let mut nondecreasing = true;
    for pair in summaries[1..].windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.prop_risky < a.prop_risky && (b.ci_risky.1 < a.ci_risky.0 || a.ci_risky.1 < b.ci_risky.0)
        {
            nondecreasing = false;
        }
    }
    let mixed_d2 = summaries[1].prop_mixed;
    let mixed_d5 = summaries[2].prop_mixed;
    let mixed_d10 = summaries[3].prop_mixed;
    let drift_edge = mixed_d2 > mixed_d10;

    let ok = nondecreasing && drift_edge;
    report(
        5,
        ok,
        &format!(
            "selection pressure trend: risky nondecreasing for d>=2: {nondecreasing}; \
prop_mixed(d=2)={mixed_d2} > prop_mixed(d=10)={mixed_d10}: {drift_edge} \
(local drift-edge uptick prop_mixed(d=2) > prop_mixed(d=5)={mixed_d5}: {})",
            mixed_d2 > mixed_d5
        ),
    );
    assert!(ok, "risky-by-d: {:?}", summaries.iter().map(|s| s.prop_risky).collect::<Vec<_>>());
}

#[test]
fn acceptance_6_pure_drift_rarely_fixes() {
    // selection-pressure cell at d = 1
    let params = Params {
        d: 1,
        c: 0.2,
        t: 0.5,
        u_r: 5.0,
        ..Params::default()
    };
    let sweep_cell = run_cell(&params, 1000, 2005);
    // payoffs cannot matter under drift, so the default cell behaves alike
    let defaults = Params {
        d: 1,
        ..Params::default()
    };
    let default_cell = run_cell(&defaults, 1000, 2015);
    let ok = sweep_cell.prop_mixed >= 0.97 && default_cell.prop_mixed >= 0.97;
    report(
        6,
        ok,
        &format!(
            "pure drift (d=1): prop_mixed={} (u_r=5, t=.5) and {} (defaults), both >= 0.97",
            sweep_cell.prop_mixed, default_cell.prop_mixed
        ),
    );
    assert!(ok);
}

#[test]
fn acceptance_7_heritability_sweep_trend() {
    let spec = SweepSpec {
        base_params: Params {
            u_r: 7.0,
            d: 10,
            c: 0.2,
            ..Params::default()
        },
        swept: ParamField::T,
        values: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
        trials_per_cell: 1000,
        master_seed: 2006,
    };
    let summaries = run_sweep(&spec).unwrap();
    let rho = monotone_trend_statistic(&summaries, OutcomeClass::AllRisky);
    let ok = rho >= 0.9;
    report(
        7,
        ok,
        &format!("heritability sweep trend: spearman(risky vs t)={rho:.3} (>= 0.9)"),
    );
    assert!(ok);
}

#[test]
fn acceptance_8_exact_property_suite() {
    let mut ok = true;
    let mut notes = Vec::new();

    // (a-e) per-round invariants over a seed/parameter grid, stepped manually
    let n = 20usize;
    for &d in &[1usize, 3, 20] {
        for &t in &[0.0, 1.0] {
            for &c in &[0.05, 0.4] {
                for master in 0..8u64 {
                    let params = Params {
                        n_labs: n,
                        d,
                        t,
                        c,
                        rounds: 50,
                        ..Params::default()
                    };
                    let mut rng = TrialRng::from_spec(SeedSpec::new(master, 0));
                    let mut pop = Population::init(&params, &mut rng);
                    let initial_kinds: HashSet<StrategyKind> =
                        pop.labs().iter().map(|l| l.strategy.kind()).collect();
                    let initial_rates: HashSet<u64> = pop
                        .labs()
                        .iter()
                        .filter_map(|l| match l.strategy {
                            Strategy::Risky { success_rate } => Some(success_rate.to_bits()),
                            Strategy::Conservative => None,
                        })
                        .collect();
                    let mut was_homogeneous = pop.is_homogeneous();
                    let mut homogeneous_risky = was_homogeneous && pop.risky_count() == n;

                    for _ in 0..params.rounds {
                        pop.science_step(&params, &mut rng);
                        let pre_ids: HashSet<u64> = pop.labs().iter().map(|l| l.id).collect();
                        let max_age = pop.labs().iter().map(|l| l.age).max().unwrap();
                        let co_oldest: HashSet<u64> = pop
                            .labs()
                            .iter()
                            .filter(|l| l.age == max_age)
                            .map(|l| l.id)
                            .collect();
                        pop.evolution_step(&params, &mut rng);

                        // population size constant
                        ok &= pop.len() == n;
                        // strategy-kind closure
                        ok &= pop
                            .labs()
                            .iter()
                            .all(|l| initial_kinds.contains(&l.strategy.kind()));
                        // the new child starts with credit 0 and age 0
                        let new_labs: Vec<&Lab> = pop
                            .labs()
                            .iter()
                            .filter(|l| !pre_ids.contains(&l.id))
                            .collect();
                        ok &= new_labs.len() == 1
                            && new_labs[0].credit == 0.0
                            && new_labs[0].age == 0;
                        // t = 1: no success-rate values beyond the initial set
                        if t == 1.0 {
                            ok &= pop.labs().iter().all(|l| match l.strategy {
                                Strategy::Risky { success_rate } => {
                                    initial_rates.contains(&success_rate.to_bits())
                                }
                                Strategy::Conservative => true,
                            });
                        }
                        // d = N: the removed lab is one of the co-oldest
                        if d == n {
                            let removed: Vec<&u64> =
                                pre_ids.iter().filter(|id| {
                                    !pop.labs().iter().any(|l| l.id == **id)
                                }).collect();
                            ok &= removed.len() == 1 && co_oldest.contains(removed[0]);
                        }
                        // absorption: homogeneity in kind is permanent
                        if was_homogeneous {
                            ok &= pop.is_homogeneous()
                                && (pop.risky_count() == n) == homogeneous_risky;
                        } else if pop.is_homogeneous() {
                            was_homogeneous = true;
                            homogeneous_risky = pop.risky_count() == n;
                        }
                    }
                }
            }
        }
    }
    notes.push(format!("round invariants over grid: {}", if ok { "ok" } else { "violated" }));

    // (e) d = N with distinct ages and credits is fully deterministic
    let mut det = true;
    for master in 0..20u64 {
        let params = Params {
            n_labs: 4,
            d: 4,
            ..Params::default()
        };
        let labs: Vec<Lab> = (0..4)
            .map(|i| {
                let mut lab = Lab::new(i, Strategy::Conservative);
                lab.age = 10 + i as u32;
                lab.credit = f64::from(3 - i as u32);
                lab
            })
            .collect();
        let mut pop = Population::from_labs(labs);
        let mut rng = TrialRng::from_spec(SeedSpec::new(master, 0));
        pop.evolution_step(&params, &mut rng);
        let ids: HashSet<u64> = pop.labs().iter().map(|l| l.id).collect();
        // lab 3 is oldest; lab 0 holds the most credit among survivors
        det &= !ids.contains(&3) && ids.contains(&0) && ids.contains(&4);
    }
    ok &= det;
    notes.push(format!("d=N determinism: {}", if det { "ok" } else { "violated" }));

    // (f) sampler bounds
    let mut bounds = true;
    let grid: [(f64, f64); 5] = [(0.05, 0.02), (0.2, 0.02), (0.4, 0.02), (0.01, 0.02), (0.3, 0.0)];
    for &(c, f) in &grid {
        let cap = (c - f).max(0.0);
        let mut rng = TrialRng::from_spec(SeedSpec::new(31, 0));
        for _ in 0..10_000 {
            let rate = rng.draw_success_rate(c, f);
            bounds &= (0.0..=cap).contains(&rate);
        }
    }
    ok &= bounds;
    notes.push(format!("sampler bounds: {}", if bounds { "ok" } else { "violated" }));

    // (g) bit determinism for a fixed seed, independent of thread count
    let spec = SweepSpec {
        base_params: Params {
            n_labs: 40,
            rounds: 200,
            ..Params::default()
        },
        swept: ParamField::UR,
        values: vec![4.0, 10.0, 16.0],
        trials_per_cell: 60,
        master_seed: 404,
    };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let quad = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a: Vec<CellSummary> = single.install(|| run_sweep(&spec).unwrap());
    let b: Vec<CellSummary> = quad.install(|| run_sweep(&spec).unwrap());
    let deterministic = a == b
        && run_trial(&spec.base_params, SeedSpec::new(404, 0))
            == run_trial(&spec.base_params, SeedSpec::new(404, 0));
    ok &= deterministic;
    notes.push(format!(
        "thread-count bit determinism: {}",
        if deterministic { "ok" } else { "violated" }
    ));

    // (h) early exit never changes the outcome class
    let mut equivalent = true;
    let full = TrialOptions {
        early_exit: false,
        record_trace: false,
    };
    for master in 0..30u64 {
        let params = Params {
            n_labs: 20,
            d: 10,
            u_r: 8.0,
            rounds: 300,
            ..Params::default()
        };
        let fast = run_trial(&params, SeedSpec::new(master, 0));
        let slow = run_trial_with(&params, SeedSpec::new(master, 0), &full).result;
        equivalent &= fast.outcome == slow.outcome && fast.fixation_round == slow.fixation_round;
    }
    ok &= equivalent;
    notes.push(format!(
        "early-exit outcome equivalence: {}",
        if equivalent { "ok" } else { "violated" }
    ));

    report(8, ok, &format!("property suite: {}", notes.join("; ")));
    assert!(ok);
}

#[test]
fn acceptance_9_sampler_zero_fraction() {
    let f = 0.02;
    let n = 1_000_000u32;
    let mut ok = true;
    let mut details = Vec::new();
    for (i, &c) in [0.1, 0.2, 0.4].iter().enumerate() {
        let mut rng = TrialRng::from_spec(SeedSpec::new(3000 + i as u64, 0));
        let zeros = (0..n).filter(|_| rng.draw_success_rate(c, f) == 0.0).count();
        let observed = zeros as f64 / f64::from(n);
        let expected = zero_success_fraction(c, f);
        let sigma = (expected * (1.0 - expected) / f64::from(n)).sqrt();
        let within = (observed - expected).abs() < 3.0 * sigma;
        ok &= within;
        details.push(format!("c={c}: {observed:.4} vs {expected:.4} ({})", if within { "ok" } else { "off" }));
    }
    report(9, ok, &format!("sampler zero fraction over 1e6 draws: {}", details.join(", ")));
    assert!(ok);
}

#[test]
fn classification_matches_population_state() {
    // classify_outcome is exercised across the suite; pin the contract here
    let conservative = Population::from_labs(
        (0..3).map(|i| Lab::new(i, Strategy::Conservative)).collect(),
    );
    assert_eq!(classify_outcome(&conservative), OutcomeClass::AllConservative);
}
