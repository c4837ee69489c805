//! CSV and JSON writers for cell summaries and traces.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! a written file reproduces every numeric field exactly and equal inputs
//! produce byte-identical files.

use crate::experiment::CellSummary;
use crate::trial::RoundRecord;
use serde::Serialize;
use serde_json::{json, Value};
use std::io::{self, Write};

/// Column order of the summary CSV.
pub const CSV_HEADER: &str = "swept_param,swept_value,n_labs,d,p_c,u_c,u_r,c,f,t,rounds,trials,\
master_seed,prop_risky,ci_risky_lo,ci_risky_hi,prop_conservative,ci_cons_lo,ci_cons_hi,\
prop_mixed,ci_mixed_lo,ci_mixed_hi,mean_fixation_round";

/// Write summaries as CSV: one header row, one data row per cell.
pub fn write_csv<W: Write>(mut w: W, summaries: &[CellSummary]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for summary in summaries {
        writeln!(w, "{}", csv_row(summary))?;
    }
    Ok(())
}

fn csv_row(s: &CellSummary) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    [
        s.swept_param.map(|p| p.name().to_string()).unwrap_or_default(),
        opt(s.swept_value),
        s.params.n_labs.to_string(),
        s.params.d.to_string(),
        s.params.p_c.to_string(),
        s.params.u_c.to_string(),
        s.params.u_r.to_string(),
        s.params.c.to_string(),
        s.params.f.to_string(),
        s.params.t.to_string(),
        s.params.rounds.to_string(),
        s.trials.to_string(),
        s.master_seed.to_string(),
        s.prop_risky.to_string(),
        s.ci_risky.0.to_string(),
        s.ci_risky.1.to_string(),
        s.prop_conservative.to_string(),
        s.ci_conservative.0.to_string(),
        s.ci_conservative.1.to_string(),
        s.prop_mixed.to_string(),
        s.ci_mixed.0.to_string(),
        s.ci_mixed.1.to_string(),
        opt(s.mean_fixation_round),
    ]
    .join(",")
}

/// Header block carried by JSON reports.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    /// Seconds since the Unix epoch; omitted under `--no-timestamp` so equal
    /// runs produce byte-identical files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    /// Fully resolved run configuration.
    pub config: Value,
}

/// Write summaries as JSON: a metadata header plus one flat object per cell
/// mirroring the CSV columns.
pub fn write_json<W: Write>(
    mut w: W,
    summaries: &[CellSummary],
    metadata: &Metadata,
) -> io::Result<()> {
    let cells: Vec<Value> = summaries.iter().map(flat_json).collect();
    let report = json!({ "metadata": metadata, "cells": cells });
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)
}

fn flat_json(s: &CellSummary) -> Value {
    json!({
        "swept_param": s.swept_param.map(|p| p.name()),
        "swept_value": s.swept_value,
        "n_labs": s.params.n_labs,
        "d": s.params.d,
        "p_c": s.params.p_c,
        "u_c": s.params.u_c,
        "u_r": s.params.u_r,
        "c": s.params.c,
        "f": s.params.f,
        "t": s.params.t,
        "rounds": s.params.rounds,
        "trials": s.trials,
        "master_seed": s.master_seed,
        "prop_risky": s.prop_risky,
        "ci_risky_lo": s.ci_risky.0,
        "ci_risky_hi": s.ci_risky.1,
        "prop_conservative": s.prop_conservative,
        "ci_cons_lo": s.ci_conservative.0,
        "ci_cons_hi": s.ci_conservative.1,
        "prop_mixed": s.prop_mixed,
        "ci_mixed_lo": s.ci_mixed.0,
        "ci_mixed_hi": s.ci_mixed.1,
        "mean_fixation_round": s.mean_fixation_round,
    })
}

/// Write a per-round composition trace: `round,conservative,risky`.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[RoundRecord]) -> io::Result<()> {
    writeln!(w, "round,conservative,risky")?;
    for record in trace {
        writeln!(
            w,
            "{},{},{}",
            record.round, record.conservative, record.risky
        )?;
    }
    Ok(())
}
