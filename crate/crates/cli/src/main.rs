//! Benchmark harness for the multi-detection GLMB tracker.
//!
//! Subcommands: `simulate` (emit a scenario file), `track` (run the filter
//! on a scenario file and emit a per-step trace), `bench` (the full
//! objects x h_max grid with repetitions and timing), and `metrics`
//! (recompute summaries from previously written traces).

mod opts;
mod runner;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use glmb_core::metrics::aggregate;
use glmb_core::rng::run_seed;
use glmb_core::scenario::{
    build_scenario, make_convoy, read_ground_track, read_scenario, synth_ground_track,
    write_scenario, GroundTrack,
};
use glmb_core::Scenario64;

use opts::{parse_list, resolve_scenario, resolve_tracker, KvConfig, ScenarioOpts, TrackerOpts};
use runner::{
    format_result_row, read_trace, run_scenario, summarize_records, trace_path, write_trace,
    RunId, RESULTS_HEADER,
};

#[derive(Parser)]
#[command(
    name = "glmb-bench",
    about = "Multi-detection GLMB tracker benchmark harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Base RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all available cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Flat key=value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a convoy scenario file.
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        /// Number of convoy objects.
        #[arg(long, default_value_t = 5)]
        objects: usize,
        #[command(flatten)]
        scenario: ScenarioOpts,
        /// Output scenario file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the tracker over a scenario file and emit a per-step trace.
    Track {
        #[command(flatten)]
        common: CommonOpts,
        /// Input scenario file (from `simulate`).
        #[arg(long)]
        scenario: PathBuf,
        /// Maximum retained hypotheses.
        #[arg(long, default_value_t = 100)]
        hmax: usize,
        #[command(flatten)]
        tracker: TrackerOpts,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full benchmark grid and emit a results table.
    Bench {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated object counts.
        #[arg(long, default_value = "1,2,5,10,20")]
        objects: String,
        /// Comma-separated h_max values.
        #[arg(long, default_value = "5,10,25,50,100")]
        hmax: String,
        /// Repetitions per grid cell.
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[command(flatten)]
        scenario: ScenarioOpts,
        #[command(flatten)]
        tracker: TrackerOpts,
        /// Write per-step trace files alongside the results table.
        #[arg(long)]
        trace: bool,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute result and summary tables from trace files.
    Metrics {
        /// Run directory containing a `traces/` subdirectory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_threads(threads: usize) -> Result<()> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("initializing thread pool")?;
    }
    Ok(())
}

fn load_config(path: &Option<PathBuf>) -> Result<KvConfig> {
    match path {
        Some(p) => KvConfig::load(p),
        None => Ok(KvConfig::default()),
    }
}

/// Builds the base ground track: loaded from CSV when `track_file` is set,
/// synthetic otherwise.
fn base_track(setup: &opts::ScenarioSetup) -> Result<GroundTrack<f64>> {
    match &setup.track_file {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let track = read_ground_track(BufReader::new(file), setup.dt)?;
            Ok(track)
        }
        None => Ok(synth_ground_track(setup.duration, setup.dt, &setup.region)?),
    }
}

fn make_scenario(setup: &opts::ScenarioSetup, n_objects: usize, seed: u64) -> Result<Scenario64> {
    let track = base_track(setup)?;
    let mut params = setup.params_template;
    params.n_objects = n_objects;
    params.seed = seed;
    let truth = make_convoy(&track, setup.region, params)?;
    Ok(build_scenario(truth))
}

fn cmd_simulate(
    common: &CommonOpts,
    objects: usize,
    scenario_opts: &ScenarioOpts,
    out: &Path,
) -> Result<()> {
    let file_cfg = load_config(&common.config)?;
    let setup = resolve_scenario(scenario_opts, &file_cfg)?;
    let scenario = make_scenario(&setup, objects, common.seed)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut writer = BufWriter::new(File::create(out)?);
    write_scenario(&mut writer, &scenario)?;
    writer.flush()?;
    eprintln!(
        "wrote {} steps, {} objects to {}",
        scenario.truth.n_steps,
        scenario.truth.params.n_objects,
        out.display()
    );
    Ok(())
}

fn cmd_track(
    common: &CommonOpts,
    scenario_path: &Path,
    hmax: usize,
    tracker_opts: &TrackerOpts,
    out_dir: &Path,
) -> Result<()> {
    init_threads(common.threads)?;
    let file_cfg = load_config(&common.config)?;
    let scenario: Scenario64 = read_scenario(BufReader::new(
        File::open(scenario_path)
            .with_context(|| format!("opening {}", scenario_path.display()))?,
    ))?;

    // Scenario-held parameters (sigma, clutter rate, dt) drive the tracker's
    // measurement model; flags may still override the derived values.
    let scen_opts = ScenarioOpts {
        sigma: Some(scenario.truth.params.sigma),
        clutter: Some(scenario.truth.params.lambda_clutter),
        dt: Some(scenario.truth.dt),
        region_size: Some(scenario.truth.region.max_x - scenario.truth.region.min_x),
        ..Default::default()
    };
    let setup = resolve_scenario(&scen_opts, &file_cfg)?;
    let config = resolve_tracker(tracker_opts, &setup, &file_cfg, hmax, common.seed)?;

    let records = run_scenario(&scenario, &config)?;
    let summary = summarize_records(&records);
    let id = RunId {
        n_objects: scenario.truth.params.n_objects,
        h_max: hmax,
        rep: 0,
        seed: common.seed,
    };

    let traces_dir = out_dir.join("traces");
    fs::create_dir_all(&traces_dir)?;
    write_trace(&trace_path(&traces_dir, &id), &id, &records)?;

    let results_path = out_dir.join("results.csv");
    let mut results = BufWriter::new(File::create(&results_path)?);
    writeln!(results, "{RESULTS_HEADER}")?;
    writeln!(results, "{}", format_result_row(&id, &summary))?;
    results.flush()?;

    println!("{RESULTS_HEADER}");
    println!("{}", format_result_row(&id, &summary));
    Ok(())
}

const SUMMARY_HEADER: &str = "n_objects,h_max,runs,mean_update_s,sem_update_s,\
mean_rel_card_err,sem_rel_card_err,mean_track_err_m,sem_track_err_m,\
mean_hypotheses,sem_hypotheses";

fn write_summary(
    path: &Path,
    rows: &[(usize, usize, usize, glmb_core::metrics::ConfigSummary)],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{SUMMARY_HEADER}")?;
    for (n, h, runs, agg) in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            n,
            h,
            runs,
            agg.update_s.mean,
            agg.update_s.sem,
            agg.rel_card_err.mean,
            agg.rel_card_err.sem,
            agg.track_err_m.mean,
            agg.track_err_m.sem,
            agg.mean_hypotheses.mean,
            agg.mean_hypotheses.sem
        )?;
    }
    out.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    common: &CommonOpts,
    objects: &str,
    hmax: &str,
    reps: usize,
    scenario_opts: &ScenarioOpts,
    tracker_opts: &TrackerOpts,
    trace: bool,
    out_dir: &Path,
) -> Result<()> {
    init_threads(common.threads)?;
    let file_cfg = load_config(&common.config)?;
    let setup = resolve_scenario(scenario_opts, &file_cfg)?;
    let objects = parse_list(objects)?;
    let hmax = parse_list(hmax)?;
    if objects.is_empty() || hmax.is_empty() || reps == 0 {
        bail!("objects, hmax, and reps must be non-empty");
    }

    fs::create_dir_all(out_dir)?;
    let traces_dir = out_dir.join("traces");
    if trace {
        fs::create_dir_all(&traces_dir)?;
    }
    let results_path = out_dir.join("results.csv");
    let mut results = BufWriter::new(File::create(&results_path)?);
    writeln!(results, "{RESULTS_HEADER}")?;
    results.flush()?;
    println!("{RESULTS_HEADER}");

    // Grid cells run one at a time so per-update wall times are not
    // polluted by a concurrent cell; each cell parallelizes internally.
    let mut per_cell: Vec<(usize, usize, Vec<glmb_core::metrics::RunSummary>)> = Vec::new();
    for &n in &objects {
        for &h in &hmax {
            let mut summaries = Vec::with_capacity(reps);
            for rep in 0..reps {
                let seed = run_seed(common.seed, n as u64, h as u64, rep as u64);
                let scenario = make_scenario(&setup, n, seed)?;
                let config = resolve_tracker(tracker_opts, &setup, &file_cfg, h, seed)?;
                let records = run_scenario(&scenario, &config)
                    .with_context(|| format!("run n={n} h_max={h} rep={rep}"))?;
                let summary = summarize_records(&records);
                let id = RunId {
                    n_objects: n,
                    h_max: h,
                    rep,
                    seed,
                };
                if trace {
                    write_trace(&trace_path(&traces_dir, &id), &id, &records)?;
                }
                let row = format_result_row(&id, &summary);
                writeln!(results, "{row}")?;
                results.flush()?;
                println!("{row}");
                summaries.push(summary);
            }
            per_cell.push((n, h, summaries));
        }
    }

    let summary_rows: Vec<_> = per_cell
        .iter()
        .map(|(n, h, runs)| (*n, *h, runs.len(), aggregate(runs)))
        .collect();
    write_summary(&out_dir.join("summary.csv"), &summary_rows)?;
    eprintln!(
        "wrote {} rows to {} and {} cell summaries to {}",
        objects.len() * hmax.len() * reps,
        results_path.display(),
        summary_rows.len(),
        out_dir.join("summary.csv").display()
    );
    Ok(())
}

fn cmd_metrics(out_dir: &Path) -> Result<()> {
    let traces_dir = out_dir.join("traces");
    let mut paths: Vec<PathBuf> = fs::read_dir(&traces_dir)
        .with_context(|| format!("reading {}", traces_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no trace files in {}", traces_dir.display());
    }

    let mut runs: Vec<(RunId, glmb_core::metrics::RunSummary)> = Vec::new();
    for path in &paths {
        let (id, records) = read_trace(path)?;
        runs.push((id, summarize_records(&records)));
    }
    runs.sort_by_key(|(id, _)| *id);

    let results_path = out_dir.join("recomputed_results.csv");
    let mut results = BufWriter::new(File::create(&results_path)?);
    writeln!(results, "{RESULTS_HEADER}")?;
    println!("{RESULTS_HEADER}");
    for (id, summary) in &runs {
        let row = format_result_row(id, summary);
        writeln!(results, "{row}")?;
        println!("{row}");
    }
    results.flush()?;

    let mut cells: Vec<(usize, usize, Vec<glmb_core::metrics::RunSummary>)> = Vec::new();
    for (id, summary) in &runs {
        match cells
            .iter_mut()
            .find(|(n, h, _)| *n == id.n_objects && *h == id.h_max)
        {
            Some((_, _, list)) => list.push(*summary),
            None => cells.push((id.n_objects, id.h_max, vec![*summary])),
        }
    }
    let summary_rows: Vec<_> = cells
        .iter()
        .map(|(n, h, runs)| (*n, *h, runs.len(), aggregate(runs)))
        .collect();
    write_summary(&out_dir.join("recomputed_summary.csv"), &summary_rows)?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate {
            common,
            objects,
            scenario,
            out,
        } => cmd_simulate(common, *objects, scenario, out),
        Command::Track {
            common,
            scenario,
            hmax,
            tracker,
            out,
        } => cmd_track(common, scenario, *hmax, tracker, out),
        Command::Bench {
            common,
            objects,
            hmax,
            reps,
            scenario,
            tracker,
            trace,
            out,
        } => cmd_bench(
            common, objects, hmax, *reps, scenario, tracker, *trace, out,
        ),
        Command::Metrics { out } => cmd_metrics(out),
    }
}
