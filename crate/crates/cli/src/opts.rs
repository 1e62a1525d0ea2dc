//! Flag and config-file resolution.
//!
//! Every tracker and scenario parameter can come from (highest precedence
//! first) a command-line flag, a `key = value` config file, or the built-in
//! default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use glmb_core::scenario::Region;
use glmb_core::{Region64, ScenarioParams64, TrackerConfig64};

/// Flat `key = value` config file mirroring the long flag names
/// (e.g. `p-detect = 0.9`). `#` starts a comment.
#[derive(Debug, Default, Clone)]
pub struct KvConfig {
    values: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected 'key = value', found {raw:?}",
                    path.display(),
                    idx + 1
                );
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key {key} = {raw:?}: {e}"),
            },
        }
    }
}

/// Picks flag, then config file, then default.
fn pick<T: FromStr + Copy>(flag: Option<T>, file: &KvConfig, key: &str, default: T) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    Ok(flag.or(file.get(key)?).unwrap_or(default))
}

/// Tracker parameter overrides shared by `track` and `bench`.
#[derive(Args, Debug, Default, Clone)]
pub struct TrackerOpts {
    /// Detection probability P_D.
    #[arg(long)]
    pub p_detect: Option<f64>,
    /// Survival probability P_S.
    #[arg(long)]
    pub p_survival: Option<f64>,
    /// Clutter density (per square meter); overrides the value derived from
    /// the clutter rate.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Squared-Mahalanobis gate threshold.
    #[arg(long)]
    pub gate: Option<f64>,
    /// Particles per track.
    #[arg(long)]
    pub particles: Option<usize>,
    /// Successor samples per parent hypothesis H_up.
    #[arg(long)]
    pub hup: Option<usize>,
    /// Hypothesis pruning threshold tau.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Birth particle position sigma, m.
    #[arg(long)]
    pub birth_pos_sigma: Option<f64>,
    /// Birth speed prior upper bound, m/s.
    #[arg(long)]
    pub birth_v_max: Option<f64>,
    /// Birth turn-rate sigma, rad/s.
    #[arg(long)]
    pub birth_omega_sigma: Option<f64>,
    /// Maximum births per step.
    #[arg(long)]
    pub birth_max: Option<usize>,
    /// Birth seeding evidence threshold.
    #[arg(long)]
    pub birth_threshold: Option<f64>,
    /// Prior existence probability of newborn tracks.
    #[arg(long)]
    pub r_birth: Option<f64>,
    /// Process position noise sigma, m.
    #[arg(long)]
    pub sigma_pos: Option<f64>,
    /// Process speed noise sigma, m/s.
    #[arg(long)]
    pub sigma_v: Option<f64>,
    /// Process turn-rate noise sigma, rad/s.
    #[arg(long)]
    pub sigma_omega: Option<f64>,
}

/// Scenario parameters shared by `simulate` and `bench`. `sigma`, `clutter`,
/// and `dt` also drive the tracker's measurement model, matching the
/// benchmark protocol.
#[derive(Args, Debug, Default, Clone)]
pub struct ScenarioOpts {
    /// Scenario duration, seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Step duration, seconds.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Entry stagger between convoy objects, steps.
    #[arg(long)]
    pub delta: Option<usize>,
    /// Detections per object per step D.
    #[arg(long)]
    pub detections: Option<usize>,
    /// Detection noise sigma, m (also the tracker measurement sigma).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Expected clutter detections per step (Poisson rate).
    #[arg(long)]
    pub clutter: Option<f64>,
    /// Side length of the square tracking region, m.
    #[arg(long)]
    pub region_size: Option<f64>,
    /// Ground-track CSV (`step,x,y`) to replace the synthetic loop.
    #[arg(long)]
    pub track_file: Option<PathBuf>,
}

/// Fully resolved scenario generation inputs.
#[derive(Debug, Clone)]
pub struct ScenarioSetup {
    pub duration: f64,
    pub dt: f64,
    pub region: Region64,
    pub params_template: ScenarioParams64,
    pub track_file: Option<PathBuf>,
}

pub fn resolve_scenario(opts: &ScenarioOpts, file: &KvConfig) -> Result<ScenarioSetup> {
    let duration = pick(opts.duration, file, "duration", 54.8)?;
    let dt = pick(opts.dt, file, "dt", 0.1)?;
    let region_size = pick(opts.region_size, file, "region-size", 80.0)?;
    let track_file = opts
        .track_file
        .clone()
        .or(file.get::<PathBuf>("track-file")?);
    let params_template = ScenarioParams64 {
        n_objects: 1,
        detections_per_object: pick(opts.detections, file, "detections", 5)?,
        lambda_clutter: pick(opts.clutter, file, "clutter", 0.0)?,
        sigma: pick(opts.sigma, file, "sigma", 0.25)?,
        delta: pick(opts.delta, file, "delta", 2)?,
        seed: 0,
    };
    Ok(ScenarioSetup {
        duration,
        dt,
        region: Region::square(region_size),
        params_template,
        track_file,
    })
}

pub fn resolve_tracker(
    opts: &TrackerOpts,
    scenario: &ScenarioSetup,
    file: &KvConfig,
    h_max: usize,
    seed: u64,
) -> Result<TrackerConfig64> {
    let defaults = TrackerConfig64::default();
    let lambda = scenario.params_template.lambda_clutter;
    let derived_kappa = TrackerConfig64::kappa_from_rate(lambda, scenario.region.area());
    let config = TrackerConfig64 {
        p_survival: pick(opts.p_survival, file, "p-survival", defaults.p_survival)?,
        p_detect: pick(opts.p_detect, file, "p-detect", defaults.p_detect)?,
        clutter_kappa: pick(opts.kappa, file, "kappa", derived_kappa)?,
        gate_chi2: pick(opts.gate, file, "gate", defaults.gate_chi2)?,
        particles_per_track: pick(opts.particles, file, "particles", defaults.particles_per_track)?,
        h_max,
        h_up: pick(opts.hup, file, "hup", defaults.h_up)?,
        prune_tau: pick(opts.tau, file, "tau", defaults.prune_tau)?,
        meas_sigma: scenario.params_template.sigma,
        birth: glmb_core::types::BirthConfig {
            pos_sigma: pick(opts.birth_pos_sigma, file, "birth-pos-sigma", defaults.birth.pos_sigma)?,
            v_max: pick(opts.birth_v_max, file, "birth-v-max", defaults.birth.v_max)?,
            omega_sigma: pick(
                opts.birth_omega_sigma,
                file,
                "birth-omega-sigma",
                defaults.birth.omega_sigma,
            )?,
            max_per_step: pick(opts.birth_max, file, "birth-max", defaults.birth.max_per_step)?,
            seed_threshold: pick(
                opts.birth_threshold,
                file,
                "birth-threshold",
                defaults.birth.seed_threshold,
            )?,
            r_birth: pick(opts.r_birth, file, "r-birth", defaults.birth.r_birth)?,
        },
        noise: glmb_core::types::ProcessNoise {
            sigma_pos: pick(opts.sigma_pos, file, "sigma-pos", defaults.noise.sigma_pos)?,
            sigma_v: pick(opts.sigma_v, file, "sigma-v", defaults.noise.sigma_v)?,
            sigma_omega: pick(opts.sigma_omega, file, "sigma-omega", defaults.noise.sigma_omega)?,
        },
        dt: scenario.dt,
        seed,
    };
    config
        .validate()
        .map_err(|e| anyhow::anyhow!("invalid tracker config: {e}"))?;
    Ok(config)
}

/// Parses a comma-separated list flag like `1,2,5,10,20`.
pub fn parse_list(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("bad list element {s:?}"))
        })
        .collect()
}
