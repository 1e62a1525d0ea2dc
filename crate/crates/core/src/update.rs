//! Batched particle updates, systematic resampling, hypothesis pruning,
//! state extraction, and the per-step filter recursion.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;

use crate::dynamics::{predict, spawn_births};
use crate::error::{Error, Result};
use crate::likelihood::{build_compatibility, death_probability, extend_with_births};
use crate::num::{real, Real};
use crate::rng::{uniform, KeyedStream, StreamDomain, StreamKey};
use crate::sampler::generate_hypotheses;
use crate::types::{
    AssocSignature, GlmbPosterior, Hypothesis, Label, LabeledTrack, MeasurementSet, Particle,
    TrackerConfig,
};
use crate::weights::{log_sum_exp, normalize_log_weights};

/// Systematic (stratified single-uniform) resampling: `target` offspring
/// whose per-parent counts are always `floor(target * w)` or
/// `ceil(target * w)`. Input weights must be normalized; output weights are
/// uniform `1/target`.
pub fn resample_systematic<T: Real>(
    particles: &[Particle<T>],
    target: usize,
    u: T,
) -> Vec<Particle<T>> {
    debug_assert!(!particles.is_empty() && target > 0);
    let n = real::<T>(target as f64);
    let log_uniform = -n.ln();
    let mut out = Vec::with_capacity(target);
    let mut j = 0usize;
    let mut cum = particles[0].weight();
    for i in 0..target {
        let pos = (real::<T>(i as f64) + u) / n;
        while pos >= cum && j + 1 < particles.len() {
            j += 1;
            cum += particles[j].weight();
        }
        out.push(Particle {
            log_weight: log_uniform,
            ..particles[j]
        });
    }
    out
}

/// What happened inside one particle update.
#[derive(Clone, Copy, Debug, Default)]
pub struct UpdateOutcome {
    pub resampled: bool,
    /// All weights underflowed and were reset to uniform.
    pub underflow: bool,
}

/// Bayes-reweights a predicted cloud by the product of Gaussian measurement
/// likelihoods of its assigned detections, renormalizes, and systematically
/// resamples when the effective sample size drops below half the cloud.
///
/// An empty assignment is the identity. Total weight underflow falls back to
/// uniform weights and raises a diagnostic flag rather than aborting.
pub fn update_particles<T: Real>(
    track: &LabeledTrack<T>,
    assigned: &[u32],
    measurements: &MeasurementSet<T>,
    config: &TrackerConfig<T>,
    resample_rng: &mut KeyedStream,
) -> (LabeledTrack<T>, UpdateOutcome) {
    let mut outcome = UpdateOutcome::default();
    if assigned.is_empty() {
        return (track.clone(), outcome);
    }

    let var = config.meas_sigma * config.meas_sigma;
    let half = real::<T>(0.5);
    let log_norm = -((T::PI() + T::PI()) * var).ln();
    let mut particles: Vec<Particle<T>> = track
        .particles
        .iter()
        .map(|p| {
            let mut lw = p.log_weight;
            for &i in assigned {
                let z = measurements.detections[i as usize];
                let dx = z[0] - p.px;
                let dy = z[1] - p.py;
                lw += log_norm - half * (dx * dx + dy * dy) / var;
            }
            Particle {
                log_weight: lw,
                ..*p
            }
        })
        .collect();

    let logs: Vec<T> = particles.iter().map(|p| p.log_weight).collect();
    let lse = log_sum_exp(&logs);
    if lse.is_finite() {
        for p in &mut particles {
            p.log_weight -= lse;
        }
    } else {
        outcome.underflow = true;
        let log_uniform = -real::<T>(particles.len() as f64).ln();
        for p in &mut particles {
            p.log_weight = log_uniform;
        }
    }

    let ess = T::one()
        / particles
            .iter()
            .map(|p| {
                let w = p.weight();
                w * w
            })
            .sum::<T>();
    let frac: f64 = std::env::var("ESS_FRAC").ok().and_then(|v| v.parse().ok()).unwrap_or(0.5);
    if ess < real::<T>(particles.len() as f64 * frac) {
        particles = resample_systematic(&particles, particles.len(), uniform(resample_rng));
        outcome.resampled = true;
    }

    let mut updated = LabeledTrack::new(track.label, particles);
    updated.assoc_signature = AssocSignature::from_indices(assigned.to_vec());
    (updated, outcome)
}

/// Drops hypotheses below `tau` (the single highest-weight hypothesis is
/// exempt), keeps the `h_max` largest with ties broken by id, and
/// renormalizes the survivors.
pub fn prune<T: Real>(hypotheses: Vec<Hypothesis<T>>, tau: T, h_max: usize) -> Vec<Hypothesis<T>> {
    if hypotheses.is_empty() {
        return hypotheses;
    }
    let best = hypotheses
        .iter()
        .max_by(|a, b| {
            a.weight
                .partial_cmp(&b.weight)
                .expect("finite weights")
                .then(b.id.cmp(&a.id))
        })
        .map(|h| h.id)
        .unwrap();
    let mut kept: Vec<Hypothesis<T>> = hypotheses
        .into_iter()
        .filter(|h| h.weight >= tau || h.id == best)
        .collect();
    kept.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .expect("finite weights")
            .then(a.id.cmp(&b.id))
    });
    kept.truncate(h_max);
    let total: T = kept.iter().map(|h| h.weight).sum();
    for h in &mut kept {
        h.weight /= total;
    }
    kept
}

/// Point estimate of one track: weighted particle means, heading averaged
/// circularly.
#[derive(Clone, Copy, Debug)]
pub struct TrackEstimate<T> {
    pub label: Label,
    pub px: T,
    pub py: T,
    pub v: T,
    pub phi: T,
    pub omega: T,
}

impl<T: Real> TrackEstimate<T> {
    pub fn position(&self) -> [T; 2] {
        [self.px, self.py]
    }
}

/// Extracts the estimate from the maximum-weight hypothesis: one entry per
/// track, estimated cardinality is the number of entries.
pub fn extract_estimate<T: Real>(posterior: &GlmbPosterior<T>) -> Vec<TrackEstimate<T>> {
    let Some(map_hyp) = posterior.map_hypothesis() else {
        return Vec::new();
    };
    map_hyp
        .labels
        .iter()
        .map(|&label| {
            let key = (label, map_hyp.signature_for(label));
            let track = &posterior.track_pool[&key];
            let mut px = T::zero();
            let mut py = T::zero();
            let mut v = T::zero();
            let mut omega = T::zero();
            let mut sin = T::zero();
            let mut cos = T::zero();
            for p in &track.particles {
                let w = p.weight();
                px += w * p.px;
                py += w * p.py;
                v += w * p.v;
                omega += w * p.omega;
                sin += w * p.phi.sin();
                cos += w * p.phi.cos();
            }
            TrackEstimate {
                label,
                px,
                py,
                v,
                phi: sin.atan2(cos),
                omega,
            }
        })
        .collect()
}

/// Diagnostics for one filter step.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepStats {
    /// Wall time of the whole update (everything after measurement arrival).
    pub update_seconds: f64,
    /// Hypotheses retained after pruning.
    pub n_hypotheses: usize,
    /// Unique candidates before pruning.
    pub n_candidates: usize,
    /// Unique (label, signature) particle updates performed.
    pub n_unique_pairs: usize,
    /// Clouds whose weights underflowed to uniform.
    pub underflow_tracks: usize,
}

/// Result of one filter step.
#[derive(Clone, Debug)]
pub struct StepOutput<T> {
    pub posterior: GlmbPosterior<T>,
    pub estimates: Vec<TrackEstimate<T>>,
    pub stats: StepStats,
}

/// Runs one full recursion step: predict, gate and build the compatibility
/// matrix, spawn births, compute death probabilities, sample successor
/// hypotheses, prune, and update each unique (label, signature) cloud
/// exactly once.
pub fn filter_step<T: Real>(
    posterior: &GlmbPosterior<T>,
    measurements: &MeasurementSet<T>,
    config: &TrackerConfig<T>,
    key: &StreamKey,
) -> Result<StepOutput<T>> {
    if measurements.step != posterior.step + 1 {
        return Err(Error::ContractViolation(format!(
            "measurement step {} does not follow posterior step {}",
            measurements.step, posterior.step
        )));
    }
    let started = Instant::now();
    let step = measurements.step;

    let mut predicted = predict(posterior, config, key);

    let pred_tracks: Vec<&LabeledTrack<T>> = predicted.track_pool.values().collect();
    let compat_base = build_compatibility(measurements, &pred_tracks, config);

    let births = spawn_births(measurements, &compat_base, config, step, key)?;
    drop(pred_tracks);
    let birth_tracks: Vec<&LabeledTrack<T>> = births.iter().map(|(_, t)| t).collect();
    let compat = extend_with_births(&compat_base, measurements, &birth_tracks, config);

    // Birth tracks join the predicted track set of every hypothesis. Birth
    // labels are strictly newer than all existing ones, so order holds.
    for h in &mut predicted.hypotheses {
        h.labels.extend(births.iter().map(|(c, _)| c.label));
    }
    for (_, track) in &births {
        predicted
            .track_pool
            .insert((track.label, AssocSignature::empty()), track.clone());
    }

    let survival_priors: Vec<T> = compat
        .track_order
        .iter()
        .map(|l| {
            if l.birth_step == step {
                config.birth.r_birth
            } else {
                config.p_survival
            }
        })
        .collect();
    let death_probs: Vec<T> = (0..compat.num_tracks())
        .map(|j| death_probability(j, &compat, survival_priors[j], config))
        .collect();

    let candidates = generate_hypotheses(
        &predicted,
        &compat,
        &survival_priors,
        &death_probs,
        config,
        key,
    );
    if candidates.is_empty() {
        return Err(Error::ContractViolation(
            "no successor hypothesis has positive probability".into(),
        ));
    }
    let n_candidates = candidates.len();

    let logs: Vec<T> = candidates.iter().map(|c| c.log_weight).collect();
    let normalized = normalize_log_weights(&logs)?;
    let hypotheses: Vec<Hypothesis<T>> = candidates
        .into_iter()
        .zip(normalized)
        .enumerate()
        .map(|(id, (c, weight))| Hypothesis {
            id: id as u64,
            parent_id: c.parent_id,
            labels: c.labels,
            assoc: c.assoc,
            weight,
        })
        .collect();

    let hypotheses = prune(hypotheses, config.prune_tau, config.h_max);

    // Batched particle update, once per unique (label, signature) pair
    // referenced by a retained hypothesis.
    let pairs: BTreeSet<(Label, AssocSignature)> = hypotheses
        .iter()
        .flat_map(|h| h.labels.iter().map(|&l| (l, h.signature_for(l))))
        .collect();
    let pair_list: Vec<(Label, AssocSignature)> = pairs.into_iter().collect();
    let updated: Vec<((Label, AssocSignature), LabeledTrack<T>, UpdateOutcome)> = pair_list
        .into_par_iter()
        .enumerate()
        .map(|(pair_idx, (label, sig))| {
            let predicted_cloud = &predicted.track_pool[&(label, AssocSignature::empty())];
            let mut rng = key.stream(step, StreamDomain::Resample, pair_idx as u64, 0);
            let (track, outcome) =
                update_particles(predicted_cloud, sig.indices(), measurements, config, &mut rng);
            ((label, sig), track, outcome)
        })
        .collect();

    let underflow_tracks = updated.iter().filter(|(_, _, o)| o.underflow).count();
    let n_unique_pairs = updated.len();
    let track_pool = updated
        .into_iter()
        .map(|(pair, track, _)| (pair, track))
        .collect();

    let out_posterior = GlmbPosterior {
        step,
        hypotheses,
        track_pool,
    };
    debug_assert!(
        out_posterior.check_invariants(config.h_max).is_ok(),
        "posterior invariants violated at step {step}"
    );
    let estimates = extract_estimate(&out_posterior);

    let stats = StepStats {
        update_seconds: started.elapsed().as_secs_f64(),
        n_hypotheses: out_posterior.hypotheses.len(),
        n_candidates,
        n_unique_pairs,
        underflow_tracks,
    };
    Ok(StepOutput {
        posterior: out_posterior,
        estimates,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    fn particle(px: f64, py: f64, w: f64) -> Particle<f64> {
        Particle {
            px,
            py,
            v: 0.0,
            phi: 0.0,
            omega: 0.0,
            log_weight: w.ln(),
        }
    }

    fn offspring_counts(parents: &[Particle<f64>], out: &[Particle<f64>]) -> Vec<usize> {
        parents
            .iter()
            .map(|p| {
                out.iter()
                    .filter(|q| q.px == p.px && q.py == p.py)
                    .count()
            })
            .collect()
    }

    #[test]
    fn resample_uniform_identity_counts() {
        let parents: Vec<_> = (0..4).map(|i| particle(i as f64, 0.0, 0.25)).collect();
        for &u in &[0.0, 0.3, 0.77, 0.999] {
            let out = resample_systematic(&parents, 4, u);
            assert_eq!(offspring_counts(&parents, &out), vec![1, 1, 1, 1]);
        }
    }

    #[test]
    fn resample_degenerate_weight() {
        let mut parents: Vec<_> = (0..4).map(|i| particle(i as f64, 0.0, 1e-12)).collect();
        parents[0].log_weight = 0.0f64.ln(); // weight ~1 after the others underflow
        parents[0].log_weight = (1.0f64).ln();
        let out = resample_systematic(&parents, 4, 0.5);
        assert_eq!(offspring_counts(&parents, &out)[0], 4);
    }

    #[test]
    fn resample_integral_expectations_exact() {
        // Weights (0.5, 0.3, 0.2) with 10 offspring: counts are exactly
        // (5, 3, 2) for every uniform draw, checked over a dense grid.
        let parents = vec![
            particle(0.0, 0.0, 0.5),
            particle(1.0, 0.0, 0.3),
            particle(2.0, 0.0, 0.2),
        ];
        for i in 0..10_000 {
            let u = (i as f64 + 0.5) / 10_000.0;
            let out = resample_systematic(&parents, 10, u);
            assert_eq!(offspring_counts(&parents, &out), vec![5, 3, 2]);
        }
    }

    #[test]
    fn resample_floor_ceil_guarantee() {
        let weights = [0.17, 0.42, 0.03, 0.38];
        let parents: Vec<_> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| particle(i as f64, 0.0, w))
            .collect();
        for i in 0..1000 {
            let u = (i as f64 + 0.5) / 1000.0;
            let out = resample_systematic(&parents, 20, u);
            for (count, &w) in offspring_counts(&parents, &out).iter().zip(&weights) {
                let exact = 20.0 * w;
                assert!(
                    *count == exact.floor() as usize || *count == exact.ceil() as usize,
                    "count {count} outside [floor, ceil] of {exact}"
                );
            }
        }
    }

    #[test]
    fn resample_preserves_mean_in_expectation() {
        let parents = vec![
            particle(0.0, 0.0, 0.6),
            particle(1.0, 0.0, 0.3),
            particle(5.0, 0.0, 0.1),
        ];
        let target_mean: f64 = parents.iter().map(|p| p.weight() * p.px).sum();
        let key = StreamKey::new(17);
        let trials = 10_000;
        let means: Vec<f64> = (0..trials)
            .map(|t| {
                let mut rng = key.stream(0, StreamDomain::Custom(1), t as u64, 0);
                let out = resample_systematic(&parents, 64, uniform(&mut rng));
                out.iter().map(|p| p.px).sum::<f64>() / 64.0
            })
            .collect();
        let grand = means.iter().sum::<f64>() / trials as f64;
        let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!(
            (grand - target_mean).abs() < 3.0 * se + 1e-12,
            "bias {} vs se {se}",
            grand - target_mean
        );
    }

    fn meas(points: Vec<[f64; 2]>) -> MeasurementSet<f64> {
        MeasurementSet {
            step: 0,
            detections: points,
        }
    }

    #[test]
    fn update_empty_assignment_is_identity() {
        let config = TrackerConfig::<f64>::default();
        let track = LabeledTrack::new(
            Label::new(0, 0),
            vec![particle(0.0, 0.0, 0.5), particle(1.0, 0.0, 0.5)],
        );
        let key = StreamKey::new(1);
        let mut rng = key.stream(0, StreamDomain::Resample, 0, 0);
        let (out, flags) = update_particles(&track, &[], &meas(vec![]), &config, &mut rng);
        assert_eq!(out.particles, track.particles);
        assert!(!flags.resampled && !flags.underflow);
    }

    #[test]
    fn update_bayes_reweight() {
        let mut config = TrackerConfig::<f64>::default();
        config.meas_sigma = 1.0;
        let track = LabeledTrack::new(
            Label::new(0, 0),
            vec![particle(0.0, 0.0, 0.5), particle(1.0, 0.0, 0.5)],
        );
        let key = StreamKey::new(1);
        let mut rng = key.stream(0, StreamDomain::Resample, 0, 0);
        let (out, _) = update_particles(&track, &[0], &meas(vec![[0.0, 0.0]]), &config, &mut rng);
        let w = out.weights();
        assert_relative_eq!(w[0], 0.62246, epsilon = 1e-5);
        assert_relative_eq!(w[1], 0.37754, epsilon = 1e-5);
        assert_eq!(out.assoc_signature.indices(), &[0]);
    }

    #[test]
    fn update_multi_detection_product() {
        let mut config = TrackerConfig::<f64>::default();
        config.meas_sigma = 1.0;
        let track = LabeledTrack::new(
            Label::new(0, 0),
            vec![particle(0.0, 0.0, 0.5), particle(1.0, 0.0, 0.5)],
        );
        let key = StreamKey::new(1);
        let mut rng = key.stream(0, StreamDomain::Resample, 0, 0);
        let (out, _) = update_particles(
            &track,
            &[0, 1],
            &meas(vec![[0.0, 0.0], [0.0, 0.0]]),
            &config,
            &mut rng,
        );
        let w = out.weights();
        assert_relative_eq!(w[0], 0.73106, epsilon = 1e-5);
        assert_relative_eq!(w[1], 0.26894, epsilon = 1e-5);
    }

    #[test]
    fn update_underflow_falls_back_to_uniform() {
        let config = TrackerConfig::<f64>::default();
        let track = LabeledTrack::new(
            Label::new(0, 0),
            vec![particle(0.0, 0.0, 0.5), particle(0.1, 0.0, 0.5)],
        );
        let key = StreamKey::new(1);
        let mut rng = key.stream(0, StreamDomain::Resample, 0, 0);
        // A measurement so far away the squared distance overflows, driving
        // every log-weight to -inf.
        let (out, flags) =
            update_particles(&track, &[0], &meas(vec![[1e200, 1e200]]), &config, &mut rng);
        assert!(flags.underflow);
        let w = out.weights();
        assert_relative_eq!(w[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(w[1], 0.5, epsilon = 1e-12);
    }

    fn hyp(id: u64, weight: f64) -> Hypothesis<f64> {
        Hypothesis {
            id,
            parent_id: 0,
            labels: Vec::new(),
            assoc: Vec::new(),
            weight,
        }
    }

    #[test]
    fn prune_example() {
        let out = prune(
            vec![hyp(0, 0.6), hyp(1, 0.3), hyp(2, 0.05), hyp(3, 0.05)],
            0.1,
            2,
        );
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].id, 0);
        assert_relative_eq!(out[0].weight, 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(out[1].weight, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn prune_identity_when_nothing_to_drop() {
        let out = prune(vec![hyp(0, 0.5), hyp(1, 0.5)], 0.1, 10);
        assert_eq!(out.len(), 2);
        assert_relative_eq!(out[0].weight, 0.5);
    }

    #[test]
    fn prune_max_weight_exempt_from_tau() {
        let out = prune(vec![hyp(0, 1.0)], 0.5, 10);
        assert_eq!(out.len(), 1);
        assert_relative_eq!(out[0].weight, 1.0);

        // Even if every hypothesis is under tau, the best one survives.
        let out = prune(vec![hyp(0, 0.4), hyp(1, 0.6)], 0.99, 10);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].id, 1);
        assert_relative_eq!(out[0].weight, 1.0);
    }

    #[test]
    fn prune_idempotent() {
        let input = vec![
            hyp(0, 0.5),
            hyp(1, 0.2),
            hyp(2, 0.15),
            hyp(3, 0.1),
            hyp(4, 0.05),
        ];
        let once = prune(input, 0.12, 3);
        let twice = prune(once.clone(), 0.12, 3);
        assert_eq!(once.len(), twice.len());
        for (a, b) in once.iter().zip(&twice) {
            assert_eq!(a.id, b.id);
            assert_relative_eq!(a.weight, b.weight, epsilon = 1e-12);
        }
    }

    fn posterior_with_tracks(
        weights_and_tracks: Vec<(f64, Vec<LabeledTrack<f64>>)>,
    ) -> GlmbPosterior<f64> {
        let mut pool = BTreeMap::new();
        let hypotheses = weights_and_tracks
            .into_iter()
            .enumerate()
            .map(|(id, (weight, tracks))| {
                let labels = tracks.iter().map(|t| t.label).collect();
                for t in tracks {
                    pool.insert((t.label, AssocSignature::empty()), t);
                }
                Hypothesis {
                    id: id as u64,
                    parent_id: 0,
                    labels,
                    assoc: Vec::new(),
                    weight,
                }
            })
            .collect();
        GlmbPosterior {
            step: 0,
            hypotheses,
            track_pool: pool,
        }
    }

    #[test]
    fn extract_weighted_mean() {
        let track = LabeledTrack::new(
            Label::new(0, 0),
            vec![particle(0.0, 0.0, 0.5), particle(2.0, 0.0, 0.5)],
        );
        let posterior = posterior_with_tracks(vec![(1.0, vec![track])]);
        let est = extract_estimate(&posterior);
        assert_eq!(est.len(), 1);
        assert_relative_eq!(est[0].px, 1.0);
        assert_relative_eq!(est[0].py, 0.0);
    }

    #[test]
    fn extract_empty_hypothesis() {
        let posterior = GlmbPosterior::<f64>::initial();
        assert!(extract_estimate(&posterior).is_empty());
    }

    #[test]
    fn extract_uses_map_hypothesis_cardinality() {
        let t = |i: u32, x: f64| LabeledTrack::new(Label::new(0, i), vec![particle(x, 0.0, 1.0)]);
        let posterior = posterior_with_tracks(vec![
            (0.7, vec![t(0, 0.0), t(1, 1.0)]),
            (0.3, vec![t(2, 2.0), t(3, 3.0), t(4, 4.0)]),
        ]);
        assert_eq!(extract_estimate(&posterior).len(), 2);
    }

    #[test]
    fn filter_step_cold_start_births_only() {
        let config = TrackerConfig::<f64>::default();
        let key = StreamKey::new(42);
        let z = MeasurementSet {
            step: 0,
            detections: vec![[5.0, 5.0]],
        };
        let out = filter_step(&GlmbPosterior::initial(), &z, &config, &key).unwrap();
        out.posterior.check_invariants(config.h_max).unwrap();
        assert_eq!(out.posterior.step, 0);
        // Every label in play is a step-0 birth.
        for h in &out.posterior.hypotheses {
            for l in &h.labels {
                assert_eq!(l.birth_step, 0);
            }
        }
    }

    #[test]
    fn filter_step_rejects_wrong_step() {
        let config = TrackerConfig::<f64>::default();
        let key = StreamKey::new(42);
        let z = MeasurementSet {
            step: 3,
            detections: vec![],
        };
        assert!(filter_step(&GlmbPosterior::initial(), &z, &config, &key).is_err());
    }

    #[test]
    fn filter_step_extinction_without_measurements() {
        // A lone steady track starved of measurements dies out: the MAP
        // cardinality reaches zero well within 30 steps.
        let config = TrackerConfig::<f64>::default();
        let key = StreamKey::new(7);
        let cloud: Vec<Particle<f64>> = (0..64)
            .map(|i| Particle {
                px: (i % 8) as f64 * 0.01,
                py: (i / 8) as f64 * 0.01,
                v: 0.0,
                phi: 0.0,
                omega: 0.0,
                log_weight: -(64f64).ln(),
            })
            .collect();
        let track = LabeledTrack::new(Label::new(0, 0), cloud);
        let mut posterior = posterior_with_tracks(vec![(1.0, vec![track])]);
        let mut final_card = usize::MAX;
        for k in 1..=30 {
            let z = MeasurementSet {
                step: k,
                detections: vec![],
            };
            let out = filter_step(&posterior, &z, &config, &key).unwrap();
            out.posterior.check_invariants(config.h_max).unwrap();
            posterior = out.posterior;
            final_card = out.estimates.len();
        }
        assert_eq!(final_card, 0);
    }

    #[test]
    fn filter_step_conservation_invariants() {
        let mut config = TrackerConfig::<f64>::default();
        config.particles_per_track = 64;
        let key = StreamKey::new(3);
        let mut posterior = GlmbPosterior::initial();
        // Two objects moving apart, three detections each.
        for k in 0..10i64 {
            let t = k as f64 * 0.1;
            let a = [10.0 + t, 10.0];
            let b = [30.0, 30.0 - t];
            let mut detections = Vec::new();
            for d in 0..3 {
                let off = (d as f64 - 1.0) * 0.05;
                detections.push([a[0] + off, a[1] + off]);
                detections.push([b[0] + off, b[1] - off]);
            }
            detections.sort_by(|p, q| p.partial_cmp(q).unwrap());
            let z = MeasurementSet { step: k, detections };
            let out = filter_step(&posterior, &z, &config, &key).unwrap();
            out.posterior.check_invariants(config.h_max).unwrap();
            assert!(out.stats.n_hypotheses <= config.h_max);
            assert!(out.stats.n_unique_pairs >= out.posterior.track_pool.len());
            posterior = out.posterior;
        }
    }
}
