//! Constant-turn-rate-and-velocity kinematics, survival prediction, and the
//! measurement-driven labeled multi-Bernoulli birth process.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::likelihood::CompatibilityMatrix;
use crate::num::{real, wrap_angle, Real};
use crate::rng::{normal, standard_normal, uniform, uniform_range, StreamDomain, StreamKey};
use crate::types::{
    AssocSignature, GlmbPosterior, Label, LabeledTrack, MeasurementSet, Particle, TrackerConfig,
};
use crate::update::resample_systematic;

/// Pre-scaled kinematic perturbations for one prediction step. Heading
/// receives no direct noise; it diffuses only through the turn rate.
#[derive(Clone, Copy, Debug, Default)]
pub struct CtrvNoise<T> {
    pub dpx: T,
    pub dpy: T,
    pub dv: T,
    pub domega: T,
}

/// One constant-turn transition of the 5-D state over `dt` seconds.
///
/// For `|omega| <= 1e-6` rad/s the straight-line limit is used; the two
/// branches agree to well under a micrometer at the boundary for
/// vehicle-scale speeds and `dt = 0.1`.
pub fn ctrv_step<T: Real>(p: &Particle<T>, dt: T, noise: Option<&CtrvNoise<T>>) -> Particle<T> {
    let dphi = p.omega * dt;
    let (mut px, mut py) = if p.omega.abs() > real(1e-6) {
        let radius = p.v / p.omega;
        (
            p.px + radius * ((p.phi + dphi).sin() - p.phi.sin()),
            p.py + radius * (p.phi.cos() - (p.phi + dphi).cos()),
        )
    } else {
        (
            p.px + p.v * dt * p.phi.cos(),
            p.py + p.v * dt * p.phi.sin(),
        )
    };
    let phi = wrap_angle(p.phi + dphi);
    let mut v = p.v;
    let mut omega = p.omega;
    if let Some(n) = noise {
        px += n.dpx;
        py += n.dpy;
        v = (v + n.dv).max(T::zero());
        omega += n.domega;
    }
    Particle {
        px,
        py,
        v,
        phi,
        omega,
        log_weight: p.log_weight,
    }
}

/// Advances the posterior one step: every pooled particle moves through
/// [`ctrv_step`] with independent keyed process noise. Hypothesis ids,
/// labels, and weights are unchanged; association maps and signatures reset
/// to empty.
///
/// When a label's posterior cloud differs across hypotheses (several
/// signatures pooled for it), the clouds are first merged into one
/// hypothesis-weight-marginalized mixture and systematically resampled back
/// to the configured particle count, keeping exactly one predicted cloud per
/// label.
pub fn predict<T: Real>(
    posterior: &GlmbPosterior<T>,
    config: &TrackerConfig<T>,
    key: &StreamKey,
) -> GlmbPosterior<T> {
    let step = posterior.step + 1;
    let labels = posterior.live_labels();

    // Marginal probability of each (label, signature) cloud among the
    // hypotheses that carry the label.
    let mut marginals: BTreeMap<Label, BTreeMap<AssocSignature, T>> = BTreeMap::new();
    for h in &posterior.hypotheses {
        for &label in &h.labels {
            let sig = h.signature_for(label);
            *marginals
                .entry(label)
                .or_default()
                .entry(sig)
                .or_insert_with(T::zero) += h.weight;
        }
    }

    let consolidated: Vec<LabeledTrack<T>> = labels
        .iter()
        .enumerate()
        .map(|(track_idx, &label)| {
            let sigs = &marginals[&label];
            if sigs.len() == 1 {
                let sig = sigs.keys().next().unwrap();
                return posterior.track_pool[&(label, sig.clone())].clone();
            }
            // Tempered marginal mixture over the top signatures; see the
            // CONSOLIDATE env experiments.
            let mode = std::env::var("CONSOLIDATE").unwrap_or_default();
            let (gamma, top): (i32, usize) = match mode.as_str() {
                "g1" => (1, usize::MAX),
                "g2" => (2, usize::MAX),
                "g4" => (4, usize::MAX),
                "g1t2" => (1, 2),
                "g2t2" => (2, 2),
                "g2t3" => (2, 3),
                _ => (2, usize::MAX),
            };
            let mut ordered: Vec<(&AssocSignature, T)> =
                sigs.iter().map(|(s, &m)| (s, m.powi(gamma))).collect();
            ordered.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite mass").then(a.0.cmp(b.0)));
            ordered.truncate(top);
            if ordered.len() == 1 {
                return posterior.track_pool[&(label, ordered[0].0.clone())].clone();
            }
            let total: T = ordered.iter().map(|(_, m)| *m).sum();
            let mut mixture: Vec<Particle<T>> = Vec::new();
            for (sig, mass) in &ordered {
                let track = &posterior.track_pool[&(label, (*sig).clone())];
                let log_mass = (*mass / total).ln();
                mixture.extend(track.particles.iter().map(|p| Particle {
                    log_weight: p.log_weight + log_mass,
                    ..*p
                }));
            }
            let mut rng = key.stream(step, StreamDomain::Consolidate, track_idx as u64, 0);
            let particles =
                resample_systematic(&mixture, config.particles_per_track, uniform(&mut rng));
            LabeledTrack::new(label, particles)
        })
        .collect();

    let advanced: Vec<LabeledTrack<T>> = consolidated
        .into_par_iter()
        .enumerate()
        .map(|(track_idx, track)| {
            let particles = track
                .particles
                .iter()
                .enumerate()
                .map(|(particle_idx, p)| {
                    let mut rng = key.stream(
                        step,
                        StreamDomain::Predict,
                        track_idx as u64,
                        particle_idx as u64,
                    );
                    let noise = CtrvNoise {
                        dpx: config.noise.sigma_pos * standard_normal(&mut rng),
                        dpy: config.noise.sigma_pos * standard_normal(&mut rng),
                        dv: config.noise.sigma_v * standard_normal(&mut rng),
                        domega: config.noise.sigma_omega * standard_normal(&mut rng),
                    };
                    ctrv_step(p, config.dt, Some(&noise))
                })
                .collect();
            LabeledTrack::new(track.label, particles)
        })
        .collect();

    let track_pool = advanced
        .into_iter()
        .map(|t| ((t.label, AssocSignature::empty()), t))
        .collect();

    let hypotheses = posterior
        .hypotheses
        .iter()
        .map(|h| {
            let mut h = h.clone();
            h.assoc.clear();
            h
        })
        .collect();

    GlmbPosterior {
        step,
        hypotheses,
        track_pool,
    }
}

/// A pending birth: the detection that seeded it, its fresh label, and the
/// prior existence probability standing in for survival at the first update.
#[derive(Clone, Debug)]
pub struct BirthCandidate<T> {
    pub seed_point: [T; 2],
    pub label: Label,
    pub r_birth: T,
}

/// Spawns birth tracks from measurements that no existing track explains.
///
/// A measurement seeds a birth when its best track-origin probability
/// `max_j C[i,j] / (C[i,j] + kappa)` is below the configured threshold
/// (trivially every measurement when there are no tracks). When tracks
/// exist, a low-evidence measurement additionally needs `min_support`
/// low-evidence neighbors (itself included) within `confirm_radius`: a
/// detectable object presents a whole cluster of unexplained detections,
/// while an isolated gate-tail detection presents one, and a track born on
/// such a stray would sit close enough to a covered object to live off its
/// detections indefinitely. At most `max_per_step` births are created,
/// lowest-evidence measurements first.
pub fn spawn_births<T: Real>(
    measurements: &MeasurementSet<T>,
    compat: &CompatibilityMatrix<T>,
    config: &TrackerConfig<T>,
    step: i64,
    key: &StreamKey,
) -> Result<Vec<(BirthCandidate<T>, LabeledTrack<T>)>> {
    let kappa = config.clutter_kappa;
    let mut low: Vec<(T, usize)> = Vec::new();
    for (i, _z) in measurements.detections.iter().enumerate() {
        let mut evidence = T::zero();
        for j in 0..compat.num_tracks() {
            let c = compat.entry(i, j + 1);
            evidence = evidence.max(c / (c + kappa));
        }
        if evidence < config.birth.seed_threshold {
            low.push((evidence, i));
        }
    }
    let mut seeds: Vec<(T, usize)> = if compat.num_tracks() == 0 || config.birth.min_support <= 1
    {
        low
    } else {
        let radius2 = config.birth.confirm_radius * config.birth.confirm_radius;
        low.iter()
            .copied()
            .filter(|&(_, i)| {
                let zi = measurements.detections[i];
                let support = low
                    .iter()
                    .filter(|&&(_, j)| {
                        let zj = measurements.detections[j];
                        let dx = zi[0] - zj[0];
                        let dy = zi[1] - zj[1];
                        dx * dx + dy * dy <= radius2
                    })
                    .count();
                support >= config.birth.min_support
            })
            .collect()
    };
    seeds.sort_by(|a, b| a.partial_cmp(b).expect("finite evidence"));
    seeds.truncate(config.birth.max_per_step);

    let log_uniform = -(real::<T>(config.particles_per_track as f64)).ln();
    let mut births = Vec::with_capacity(seeds.len());
    for (ordinal, &(_e, i)) in seeds.iter().enumerate() {
        if ordinal > u32::MAX as usize {
            return Err(Error::LabelOverflow { step });
        }
        let seed_point = measurements.detections[i];
        let label = Label::new(step, ordinal as u32);
        let mut rng = key.stream(step, StreamDomain::Birth, ordinal as u64, 0);
        let particles = (0..config.particles_per_track)
            .map(|_| {
                let px = normal(&mut rng, seed_point[0], config.birth.pos_sigma);
                let py = normal(&mut rng, seed_point[1], config.birth.pos_sigma);
                let v = uniform_range(&mut rng, T::zero(), config.birth.v_max);
                // Heading uniform over the canonical interval (-pi, pi].
                let phi = T::PI() - (T::PI() + T::PI()) * uniform::<T>(&mut rng);
                let omega = normal(&mut rng, T::zero(), config.birth.omega_sigma);
                Particle {
                    px,
                    py,
                    v,
                    phi,
                    omega,
                    log_weight: log_uniform,
                }
            })
            .collect();
        births.push((
            BirthCandidate {
                seed_point,
                label,
                r_birth: config.birth.r_birth,
            },
            LabeledTrack::new(label, particles),
        ));
    }
    Ok(births)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::build_compatibility;
    use crate::types::Hypothesis;
    use approx::assert_relative_eq;

    fn particle(px: f64, py: f64, v: f64, phi: f64, omega: f64) -> Particle<f64> {
        Particle {
            px,
            py,
            v,
            phi,
            omega,
            log_weight: 0.0,
        }
    }

    #[test]
    fn ctrv_stationary_identity() {
        let p = particle(0.0, 0.0, 0.0, 0.0, 0.0);
        let q = ctrv_step(&p, 0.1, None);
        assert_eq!((q.px, q.py, q.v, q.phi, q.omega), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn ctrv_straight_line() {
        let p = particle(0.0, 0.0, 1.0, 0.0, 0.0);
        let q = ctrv_step(&p, 0.1, None);
        assert_relative_eq!(q.px, 0.1);
        assert_relative_eq!(q.py, 0.0);
        assert_relative_eq!(q.v, 1.0);
        assert_relative_eq!(q.phi, 0.0);
    }

    #[test]
    fn ctrv_half_circle() {
        // v = 1, omega = pi over one second: radius 1/pi, half turn.
        let p = particle(0.0, 0.0, 1.0, 0.0, std::f64::consts::PI);
        let q = ctrv_step(&p, 1.0, None);
        assert_relative_eq!(q.px, 0.0, epsilon = 1e-12);
        assert_relative_eq!(q.py, 2.0 / std::f64::consts::PI, epsilon = 1e-12);
        assert_relative_eq!(q.v, 1.0);
        assert_relative_eq!(q.phi, std::f64::consts::PI);
        assert_relative_eq!(q.omega, std::f64::consts::PI);
    }

    #[test]
    fn ctrv_branch_continuity() {
        // Turning and straight-line formulas agree near the branch point.
        for &omega in &[-1e-5, -1e-7, 1e-7, 1e-5] {
            for &v in &[1.0, 15.0] {
                let p = particle(3.0, -2.0, v, 0.7, omega);
                let turn = {
                    let radius = p.v / omega;
                    let dphi = omega * 0.1;
                    (
                        p.px + radius * ((p.phi + dphi).sin() - p.phi.sin()),
                        p.py + radius * (p.phi.cos() - (p.phi + dphi).cos()),
                    )
                };
                let straight = (
                    p.px + p.v * 0.1 * p.phi.cos(),
                    p.py + p.v * 0.1 * p.phi.sin(),
                );
                assert!(
                    (turn.0 - straight.0).abs() < 1e-6 && (turn.1 - straight.1).abs() < 1e-6,
                    "branch mismatch at omega={omega}, v={v}"
                );
            }
        }
    }

    #[test]
    fn ctrv_preserves_speed_and_advances_heading() {
        for &omega in &[-2.0, -0.3, 0.0, 0.4, 3.1] {
            let p = particle(1.0, 2.0, 4.2, 1.1, omega);
            let q = ctrv_step(&p, 0.1, None);
            assert_eq!(q.v, p.v);
            assert_relative_eq!(q.phi, wrap_angle(p.phi + omega * 0.1), epsilon = 1e-12);
        }
    }

    #[test]
    fn ctrv_speed_clamped_nonnegative() {
        let p = particle(0.0, 0.0, 0.1, 0.0, 0.0);
        let noise = CtrvNoise {
            dv: -1.0,
            ..Default::default()
        };
        let q = ctrv_step(&p, 0.1, Some(&noise));
        assert_eq!(q.v, 0.0);
    }

    fn single_track_posterior(particles: Vec<Particle<f64>>) -> GlmbPosterior<f64> {
        let label = Label::new(0, 0);
        let track = LabeledTrack::new(label, particles);
        let mut pool = BTreeMap::new();
        pool.insert((label, AssocSignature::empty()), track);
        GlmbPosterior {
            step: 0,
            hypotheses: vec![Hypothesis {
                id: 0,
                parent_id: 0,
                labels: vec![label],
                assoc: Vec::new(),
                weight: 1.0,
            }],
            track_pool: pool,
        }
    }

    #[test]
    fn predict_empty_posterior() {
        let config = TrackerConfig::<f64>::default();
        let key = StreamKey::new(1);
        let out = predict(&GlmbPosterior::initial(), &config, &key);
        assert_eq!(out.step, 0);
        assert!(out.track_pool.is_empty());
        assert_eq!(out.hypotheses.len(), 1);
    }

    #[test]
    fn predict_noise_free_matches_ctrv() {
        let mut config = TrackerConfig::<f64>::default();
        config.noise.sigma_pos = 0.0;
        config.noise.sigma_v = 0.0;
        config.noise.sigma_omega = 0.0;
        let p = Particle {
            log_weight: -(4.0f64).ln(),
            ..particle(1.0, 2.0, 3.0, 0.5, 0.2)
        };
        let posterior = single_track_posterior(vec![p; 4]);
        let out = predict(&posterior, &config, &StreamKey::new(7));
        let expected = ctrv_step(&p, config.dt, None);
        let track = out.track_pool.values().next().unwrap();
        for q in &track.particles {
            assert_eq!((q.px, q.py, q.v, q.phi, q.omega), (
                expected.px,
                expected.py,
                expected.v,
                expected.phi,
                expected.omega
            ));
        }
    }

    #[test]
    fn predict_keeps_structure() {
        let config = TrackerConfig::<f64>::default();
        let posterior = single_track_posterior(vec![
            Particle {
                log_weight: -(2.0f64).ln(),
                ..particle(0.0, 0.0, 1.0, 0.0, 0.0)
            };
            2
        ]);
        let out = predict(&posterior, &config, &StreamKey::new(3));
        assert_eq!(out.hypotheses.len(), posterior.hypotheses.len());
        assert_eq!(out.track_pool.len(), posterior.track_pool.len());
        assert_eq!(out.hypotheses[0].weight, 1.0);
        assert_eq!(out.hypotheses[0].labels, posterior.hypotheses[0].labels);
        assert!(out
            .track_pool
            .keys()
            .all(|(_, sig)| sig == &AssocSignature::empty()));
    }

    #[test]
    fn predict_mean_displacement_statistics() {
        // 10k particles, only position noise: sample mean displacement is
        // v*dt*(cos phi, sin phi) within 3*sigma_pos/sqrt(10k).
        let mut config = TrackerConfig::<f64>::default();
        config.noise.sigma_v = 0.0;
        config.noise.sigma_omega = 0.0;
        let n = 10_000;
        let p = Particle {
            log_weight: -(n as f64).ln(),
            ..particle(0.0, 0.0, 2.0, 0.9, 0.0)
        };
        let posterior = single_track_posterior(vec![p; n]);
        let out = predict(&posterior, &config, &StreamKey::new(11));
        let track = out.track_pool.values().next().unwrap();
        let mean_dx: f64 = track.particles.iter().map(|q| q.px - p.px).sum::<f64>() / n as f64;
        let mean_dy: f64 = track.particles.iter().map(|q| q.py - p.py).sum::<f64>() / n as f64;
        let tol = 3.0 * config.noise.sigma_pos / (n as f64).sqrt();
        assert!((mean_dx - 2.0 * 0.1 * 0.9f64.cos()).abs() < tol);
        assert!((mean_dy - 2.0 * 0.1 * 0.9f64.sin()).abs() < tol);
    }

    #[test]
    fn births_empty_measurements() {
        let config = TrackerConfig::<f64>::default();
        let meas = MeasurementSet {
            step: 0,
            detections: vec![],
        };
        let compat = build_compatibility(&meas, &[], &config);
        let births = spawn_births(&meas, &compat, &config, 0, &StreamKey::new(1)).unwrap();
        assert!(births.is_empty());
    }

    #[test]
    fn birth_anchored_at_seed() {
        let mut config = TrackerConfig::<f64>::default();
        config.particles_per_track = 4096;
        let meas = MeasurementSet {
            step: 0,
            detections: vec![[10.0, -3.0]],
        };
        let compat = build_compatibility(&meas, &[], &config);
        let births = spawn_births(&meas, &compat, &config, 0, &StreamKey::new(5)).unwrap();
        assert_eq!(births.len(), 1);
        let (cand, track) = &births[0];
        assert_eq!(cand.label, Label::new(0, 0));
        let n = track.particles.len() as f64;
        let mx: f64 = track.particles.iter().map(|p| p.px).sum::<f64>() / n;
        let my: f64 = track.particles.iter().map(|p| p.py).sum::<f64>() / n;
        let tol = 3.0 * config.birth.pos_sigma / n.sqrt();
        assert!((mx - 10.0).abs() < tol && (my - -3.0).abs() < tol);
        for p in &track.particles {
            assert!(p.v >= 0.0 && p.v < config.birth.v_max);
            assert!(p.phi > -std::f64::consts::PI && p.phi <= std::f64::consts::PI);
        }
    }

    #[test]
    fn birth_suppressed_by_strong_track_evidence() {
        // Point cloud directly on the measurement: origin probability ~1,
        // above the 0.5 threshold, so no birth.
        let mut config = TrackerConfig::<f64>::default();
        config.clutter_kappa = 0.01;
        let label = Label::new(0, 0);
        let track = LabeledTrack::new(
            label,
            vec![Particle {
                log_weight: 0.0,
                ..particle(0.0, 0.0, 0.0, 0.0, 0.0)
            }],
        );
        let meas = MeasurementSet {
            step: 1,
            detections: vec![[0.0, 0.0]],
        };
        let compat = build_compatibility(&meas, &[&track], &config);
        let e = compat.entry(0, 1) / (compat.entry(0, 1) + config.clutter_kappa);
        assert!(e > 0.5, "evidence {e}");
        let births = spawn_births(&meas, &compat, &config, 1, &StreamKey::new(5)).unwrap();
        assert!(births.is_empty());
    }

    #[test]
    fn birth_requires_cluster_support_near_tracks() {
        // With a track present, a lone unexplained detection (e.g. a gate
        // tail excursion) must not seed a birth, while a cluster of
        // unexplained detections must.
        let config = TrackerConfig::<f64>::default();
        assert_eq!(config.birth.min_support, 3);
        let track = LabeledTrack::new(
            Label::new(0, 0),
            vec![Particle {
                log_weight: 0.0,
                ..particle(0.0, 0.0, 0.0, 0.0, 0.0)
            }],
        );
        let lone = MeasurementSet {
            step: 1,
            detections: vec![[0.0, 0.1], [3.0, 0.0]],
        };
        let compat = build_compatibility(&lone, &[&track], &config);
        let births = spawn_births(&lone, &compat, &config, 1, &StreamKey::new(5)).unwrap();
        assert!(births.is_empty());

        let cluster = MeasurementSet {
            step: 1,
            detections: vec![[0.0, 0.1], [2.9, 0.1], [3.0, 0.0], [3.1, -0.1]],
        };
        let compat = build_compatibility(&cluster, &[&track], &config);
        let births = spawn_births(&cluster, &compat, &config, 1, &StreamKey::new(5)).unwrap();
        assert!(!births.is_empty());
        // Without tracks the support requirement is waived.
        let lone_cold = MeasurementSet {
            step: 0,
            detections: vec![[3.0, 0.0]],
        };
        let compat = build_compatibility(&lone_cold, &[], &config);
        let births = spawn_births(&lone_cold, &compat, &config, 0, &StreamKey::new(5)).unwrap();
        assert_eq!(births.len(), 1);
    }

    #[test]
    fn birth_labels_strictly_newer() {
        let config = TrackerConfig::<f64>::default();
        let meas = MeasurementSet {
            step: 4,
            detections: vec![[0.0, 0.0], [30.0, 30.0]],
        };
        let compat = build_compatibility(&meas, &[], &config);
        let births = spawn_births(&meas, &compat, &config, 4, &StreamKey::new(5)).unwrap();
        let existing = Label::new(3, 99);
        for (cand, _) in &births {
            assert!(cand.label > existing);
        }
        assert!(births.windows(2).all(|w| w[0].0.label < w[1].0.label));
    }

    #[test]
    fn birth_cap_prefers_lowest_evidence() {
        let mut config = TrackerConfig::<f64>::default();
        config.birth.max_per_step = 2;
        let meas = MeasurementSet {
            step: 0,
            detections: vec![[0.0, 0.0], [5.0, 5.0], [9.0, 9.0]],
        };
        let compat = build_compatibility(&meas, &[], &config);
        let births = spawn_births(&meas, &compat, &config, 0, &StreamKey::new(5)).unwrap();
        // All evidence ties at zero; index order breaks ties.
        assert_eq!(births.len(), 2);
        assert_eq!(births[0].0.seed_point, [0.0, 0.0]);
        assert_eq!(births[1].0.seed_point, [5.0, 5.0]);
    }
}
