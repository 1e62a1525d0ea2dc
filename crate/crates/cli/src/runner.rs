//! Running the tracker over scenarios and writing results/trace files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use glmb_core::metrics::{summarize_run, tracking_error, RunSummary, StepRecord};
use glmb_core::rng::StreamKey;
use glmb_core::types::GlmbPosterior;
use glmb_core::update::filter_step;
use glmb_core::{Scenario64, TrackerConfig64};

pub const RESULTS_HEADER: &str =
    "n_objects,h_max,rep,seed,mean_update_s,p95_update_s,rel_card_err,track_err_m,mean_hypotheses";

/// Identity of one benchmark run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
pub struct RunId {
    pub n_objects: usize,
    pub h_max: usize,
    pub rep: usize,
    pub seed: u64,
}

/// First record of a trace file.
#[derive(Serialize, Deserialize)]
struct TraceHeader {
    schema: String,
    n_objects: usize,
    h_max: usize,
    rep: usize,
    seed: u64,
}

/// One per-step trace record.
#[derive(Serialize, Deserialize)]
struct TraceStep {
    k: i64,
    update_s: f64,
    n_hypotheses: usize,
    est_cardinality: usize,
    true_cardinality: usize,
    track_err_m: Option<f64>,
}

const TRACE_SCHEMA: &str = "glmb-trace/1";

/// Runs the filter over a full scenario, returning per-step records.
pub fn run_scenario(scenario: &Scenario64, config: &TrackerConfig64) -> Result<Vec<StepRecord>> {
    let key = StreamKey::new(config.seed);
    let mut posterior = GlmbPosterior::initial();
    let mut records = Vec::with_capacity(scenario.truth.n_steps);
    for (k, measurements) in scenario.measurements.iter().enumerate() {
        let out = filter_step(&posterior, measurements, config, &key)
            .with_context(|| format!("filter step {k}"))?;
        let truth: Vec<[f64; 2]> = scenario
            .truth
            .active_at(k)
            .into_iter()
            .map(|(_, p)| p)
            .collect();
        let estimates: Vec<[f64; 2]> = out.estimates.iter().map(|e| e.position()).collect();
        records.push(StepRecord {
            k: k as i64,
            update_seconds: out.stats.update_seconds,
            n_hypotheses: out.stats.n_hypotheses,
            est_cardinality: estimates.len(),
            true_cardinality: truth.len(),
            tracking_error_m: tracking_error(&truth, &estimates),
        });
        posterior = out.posterior;
    }
    Ok(records)
}

/// One results-table row.
pub fn format_result_row(id: &RunId, summary: &RunSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        id.n_objects,
        id.h_max,
        id.rep,
        id.seed,
        summary.mean_update_s,
        summary.p95_update_s,
        summary.rel_card_err,
        summary.track_err_m,
        summary.mean_hypotheses
    )
}

pub fn trace_path(dir: &Path, id: &RunId) -> PathBuf {
    dir.join(format!(
        "trace_n{}_h{}_rep{}.jsonl",
        id.n_objects, id.h_max, id.rep
    ))
}

pub fn write_trace(path: &Path, id: &RunId, records: &[StepRecord]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    let header = TraceHeader {
        schema: TRACE_SCHEMA.to_string(),
        n_objects: id.n_objects,
        h_max: id.h_max,
        rep: id.rep,
        seed: id.seed,
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for r in records {
        let step = TraceStep {
            k: r.k,
            update_s: r.update_seconds,
            n_hypotheses: r.n_hypotheses,
            est_cardinality: r.est_cardinality,
            true_cardinality: r.true_cardinality,
            track_err_m: r.tracking_error_m,
        };
        writeln!(out, "{}", serde_json::to_string(&step)?)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<(RunId, Vec<StepRecord>)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("{}: empty trace", path.display()))??;
    let header: TraceHeader = serde_json::from_str(&first)
        .with_context(|| format!("{}:1: bad trace header", path.display()))?;
    if header.schema != TRACE_SCHEMA {
        bail!("{}: unsupported schema {:?}", path.display(), header.schema);
    }
    let id = RunId {
        n_objects: header.n_objects,
        h_max: header.h_max,
        rep: header.rep,
        seed: header.seed,
    };
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let step: TraceStep = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: bad trace record", path.display(), idx + 2))?;
        records.push(StepRecord {
            k: step.k,
            update_seconds: step.update_s,
            n_hypotheses: step.n_hypotheses,
            est_cardinality: step.est_cardinality,
            true_cardinality: step.true_cardinality,
            tracking_error_m: step.track_err_m,
        });
    }
    Ok((id, records))
}

pub fn summarize_records(records: &[StepRecord]) -> RunSummary {
    summarize_run(records)
}
