//! Shared domain types: labels, particles, tracks, hypotheses, posteriors,
//! measurement sets, and the tracker configuration.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::num::{real, Real};
use crate::weights::{log_sum_exp, normalize_log_weights};

/// Persistent track identity: `(birth step, ordinal among that step's births)`.
///
/// Pairs are globally unique within one filter run because step indices never
/// repeat and ordinals are issued sequentially within a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub birth_step: i64,
    pub birth_index: u32,
}

impl Label {
    pub fn new(birth_step: i64, birth_index: u32) -> Self {
        debug_assert!(birth_step >= 0);
        Self {
            birth_step,
            birth_index,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}.{}", self.birth_step, self.birth_index)
    }
}

/// One weighted sample of the 5-D constant-turn kinematic state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle<T> {
    /// Position x, meters.
    pub px: T,
    /// Position y, meters.
    pub py: T,
    /// Speed, meters/second, nonnegative.
    pub v: T,
    /// Heading, radians, wrapped to `(-pi, pi]`.
    pub phi: T,
    /// Turn rate, radians/second.
    pub omega: T,
    /// Log of the normalized particle weight.
    pub log_weight: T,
}

impl<T: Real> Particle<T> {
    pub fn weight(&self) -> T {
        self.log_weight.exp()
    }

    pub fn position(&self) -> [T; 2] {
        [self.px, self.py]
    }
}

/// Canonical encoding of the measurement indices a track claimed this step:
/// strictly increasing, within `[0, M_k)`. Empty for predicted clouds.
///
/// Serves as the dedup/cache key for batched particle updates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AssocSignature(Vec<u32>);

impl AssocSignature {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a signature from measurement indices in any order.
    pub fn from_indices(mut indices: Vec<u32>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for AssocSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in &self.0 {
            if !first {
                write!(f, "-")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        Ok(())
    }
}

/// A labeled particle cloud, plus the association signature that produced it.
#[derive(Clone, Debug)]
pub struct LabeledTrack<T> {
    pub label: Label,
    pub particles: Vec<Particle<T>>,
    pub assoc_signature: AssocSignature,
}

impl<T: Real> LabeledTrack<T> {
    pub fn new(label: Label, particles: Vec<Particle<T>>) -> Self {
        debug_assert!(!particles.is_empty());
        Self {
            label,
            particles,
            assoc_signature: AssocSignature::empty(),
        }
    }

    pub fn weights(&self) -> Vec<T> {
        self.particles.iter().map(|p| p.weight()).collect()
    }

    /// Renormalizes particle log-weights in place. Errors if all weights
    /// have underflowed to zero.
    pub fn normalize(&mut self) -> Result<()> {
        let logs: Vec<T> = self.particles.iter().map(|p| p.log_weight).collect();
        let lse = log_sum_exp(&logs);
        if !lse.is_finite() {
            return Err(Error::DegenerateWeights);
        }
        for p in &mut self.particles {
            p.log_weight -= lse;
        }
        Ok(())
    }

    /// Weighted mean position of the cloud.
    pub fn mean_position(&self) -> [T; 2] {
        let mut mx = T::zero();
        let mut my = T::zero();
        for p in &self.particles {
            let w = p.weight();
            mx += w * p.px;
            my += w * p.py;
        }
        [mx, my]
    }
}

/// Association target of one measurement: clutter or a labeled track.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssocTarget {
    Clutter,
    Track(Label),
}

/// One global association hypothesis: a set of surviving labels, this step's
/// measurement-to-target map, and a normalized probability weight.
///
/// The association history is not stored in full; `parent_id` plus per-step
/// logs reconstruct it when needed.
#[derive(Clone, Debug)]
pub struct Hypothesis<T> {
    /// Identifier, unique within the posterior of one step.
    pub id: u64,
    /// Identifier of the step-(k-1) hypothesis this one extends.
    pub parent_id: u64,
    /// Surviving track labels, sorted ascending, unique.
    pub labels: Vec<Label>,
    /// Target of measurement `i` at the current step; empty when `M_k = 0`
    /// or for predicted (not yet updated) hypotheses.
    pub assoc: Vec<AssocTarget>,
    /// Normalized hypothesis probability.
    pub weight: T,
}

impl<T: Real> Hypothesis<T> {
    /// The association signature this hypothesis implies for `label`.
    pub fn signature_for(&self, label: Label) -> AssocSignature {
        let indices: Vec<u32> = self
            .assoc
            .iter()
            .enumerate()
            .filter_map(|(i, t)| match t {
                AssocTarget::Track(l) if *l == label => Some(i as u32),
                _ => None,
            })
            .collect();
        AssocSignature::from_indices(indices)
    }

    pub fn contains(&self, label: Label) -> bool {
        self.labels.binary_search(&label).is_ok()
    }
}

/// Key of one particle cloud in the shared pool.
pub type TrackKey = (Label, AssocSignature);

/// The multi-object posterior at one step: weighted hypotheses over a shared
/// pool of per-`(label, signature)` particle clouds.
#[derive(Clone, Debug)]
pub struct GlmbPosterior<T> {
    /// Index of the measurement step this posterior incorporates; `-1` for
    /// the initial empty posterior.
    pub step: i64,
    pub hypotheses: Vec<Hypothesis<T>>,
    pub track_pool: BTreeMap<TrackKey, LabeledTrack<T>>,
}

impl<T: Real> GlmbPosterior<T> {
    /// The empty posterior before any measurements: one empty hypothesis of
    /// weight one.
    pub fn initial() -> Self {
        Self {
            step: -1,
            hypotheses: vec![Hypothesis {
                id: 0,
                parent_id: 0,
                labels: Vec::new(),
                assoc: Vec::new(),
                weight: T::one(),
            }],
            track_pool: BTreeMap::new(),
        }
    }

    /// Highest-weight hypothesis, ties broken by lowest id.
    pub fn map_hypothesis(&self) -> Option<&Hypothesis<T>> {
        self.hypotheses.iter().max_by(|a, b| {
            a.weight
                .partial_cmp(&b.weight)
                .expect("finite weights")
                .then(b.id.cmp(&a.id))
        })
    }

    /// All labels carried by at least one hypothesis, sorted.
    pub fn live_labels(&self) -> Vec<Label> {
        let mut labels: Vec<Label> = self
            .hypotheses
            .iter()
            .flat_map(|h| h.labels.iter().copied())
            .collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    /// Structural validity: normalized weights, bounded hypothesis count,
    /// unique labels, association targets within hypothesis labels, and
    /// every referenced `(label, signature)` pooled with normalized
    /// particle weights.
    pub fn check_invariants(&self, h_max: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::ContractViolation(msg));

        if self.hypotheses.is_empty() {
            return fail("posterior has no hypotheses".into());
        }
        if self.hypotheses.len() > h_max {
            return fail(format!(
                "{} hypotheses exceeds h_max {}",
                self.hypotheses.len(),
                h_max
            ));
        }
        let sum: T = self.hypotheses.iter().map(|h| h.weight).sum();
        let tol = real::<T>(1e-9).max(T::epsilon() * real(64.0));
        if (sum - T::one()).abs() > tol {
            return fail(format!("hypothesis weights sum to {sum}"));
        }
        for h in &self.hypotheses {
            if h.labels.windows(2).any(|w| w[0] >= w[1]) {
                return fail(format!("hypothesis {} labels not sorted unique", h.id));
            }
            for t in &h.assoc {
                if let AssocTarget::Track(l) = t {
                    if !h.contains(*l) {
                        return fail(format!(
                            "hypothesis {} assigns a measurement to non-member track {l}",
                            h.id
                        ));
                    }
                }
            }
            for &label in &h.labels {
                let key = (label, h.signature_for(label));
                if !self.track_pool.contains_key(&key) {
                    return fail(format!(
                        "hypothesis {} references missing pool entry ({label}, {})",
                        h.id, key.1
                    ));
                }
            }
        }
        for ((label, sig), track) in &self.track_pool {
            if track.label != *label || track.assoc_signature != *sig {
                return fail(format!("pool entry ({label}, {sig}) mislabeled"));
            }
            if track.particles.is_empty() {
                return fail(format!("pool entry ({label}, {sig}) has no particles"));
            }
            let wsum: T = track.particles.iter().map(|p| p.weight()).sum();
            if (wsum - T::one()).abs() > tol {
                return fail(format!(
                    "pool entry ({label}, {sig}) particle weights sum to {wsum}"
                ));
            }
        }
        Ok(())
    }

    /// Normalizes hypothesis weights in place.
    pub fn normalize(&mut self) -> Result<()> {
        let logs: Vec<T> = self.hypotheses.iter().map(|h| h.weight.ln()).collect();
        let normalized = normalize_log_weights(&logs)?;
        for (h, w) in self.hypotheses.iter_mut().zip(normalized) {
            h.weight = w;
        }
        Ok(())
    }
}

/// The detection set fed to the filter at one step.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet<T> {
    pub step: i64,
    /// 2-D points, meters.
    pub detections: Vec<[T; 2]>,
}

impl<T> MeasurementSet<T> {
    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }
}

/// Measurement-driven birth parameters.
#[derive(Clone, Copy, Debug)]
pub struct BirthConfig<T> {
    /// Std dev of birth particle positions around the seeding detection, m.
    pub pos_sigma: T,
    /// Upper bound of the uniform birth speed prior, m/s.
    pub v_max: T,
    /// Std dev of the birth turn-rate prior, rad/s.
    pub omega_sigma: T,
    /// Cap on births per step.
    pub max_per_step: usize,
    /// A measurement seeds a birth when its best track-origin probability
    /// falls below this threshold.
    pub seed_threshold: T,
    /// Prior existence probability, used in place of survival probability at
    /// a newborn track's first update.
    pub r_birth: T,
    /// Minimum number of mutually close low-evidence detections (the
    /// candidate included) required to seed a birth when tracks exist.
    /// Guards against tracks born on isolated gate-tail detections.
    pub min_support: usize,
    /// Radius within which low-evidence detections count as supporting the
    /// same birth candidate, m. Should cover the detection noise spread.
    pub confirm_radius: T,
}

/// Constant-turn process noise, applied per prediction step.
#[derive(Clone, Copy, Debug)]
pub struct ProcessNoise<T> {
    /// Position jitter, m.
    pub sigma_pos: T,
    /// Speed jitter, m/s.
    pub sigma_v: T,
    /// Turn-rate jitter, rad/s.
    pub sigma_omega: T,
}

/// Full tracker configuration.
#[derive(Clone, Copy, Debug)]
pub struct TrackerConfig<T> {
    pub p_survival: T,
    pub p_detect: T,
    /// Clutter spatial density, per square meter.
    pub clutter_kappa: T,
    /// Squared-Mahalanobis gate threshold (chi-square, 2 dof).
    pub gate_chi2: T,
    /// Particles per track cloud.
    pub particles_per_track: usize,
    /// Maximum retained hypotheses after pruning.
    pub h_max: usize,
    /// Successor hypothesis samples per parent hypothesis.
    pub h_up: usize,
    /// Hypothesis weight pruning threshold.
    pub prune_tau: T,
    /// Measurement noise std dev, m.
    pub meas_sigma: T,
    pub birth: BirthConfig<T>,
    pub noise: ProcessNoise<T>,
    /// Step duration, seconds.
    pub dt: T,
    pub seed: u64,
}

impl<T: Real> Default for TrackerConfig<T> {
    fn default() -> Self {
        Self {
            p_survival: real(0.99),
            p_detect: real(0.95),
            clutter_kappa: real(1e-4),
            gate_chi2: real(9.21),
            particles_per_track: 1024,
            h_max: 100,
            h_up: 100,
            prune_tau: real(1e-5),
            meas_sigma: real(0.25),
            birth: BirthConfig {
                pos_sigma: real(0.3),
                v_max: real(15.0),
                omega_sigma: real(0.5),
                max_per_step: 10,
                seed_threshold: real(0.5),
                r_birth: real(0.01),
                min_support: 3,
                confirm_radius: real(1.0),
            },
            noise: ProcessNoise {
                sigma_pos: real(0.05),
                sigma_v: real(1.0),
                sigma_omega: real(0.3),
            },
            dt: real(0.1),
            seed: 0,
        }
    }
}

impl<T: Real> TrackerConfig<T> {
    /// Clutter density from an expected per-step clutter count over a region
    /// area; floored at `1e-4` so the clutter column stays positive even in
    /// clutter-free scenarios.
    pub fn kappa_from_rate(lambda: T, region_area: T) -> T {
        (lambda / region_area).max(real(1e-4))
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: T| -> Result<()> {
            if v > T::zero() && v <= T::one() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} = {v} not in (0, 1]")))
            }
        };
        let pos = |name: &str, v: T| -> Result<()> {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} = {v} not positive")))
            }
        };
        prob("p_survival", self.p_survival)?;
        prob("p_detect", self.p_detect)?;
        prob("prune_tau", self.prune_tau)?;
        prob("birth.seed_threshold", self.birth.seed_threshold)?;
        prob("birth.r_birth", self.birth.r_birth)?;
        pos("clutter_kappa", self.clutter_kappa)?;
        pos("gate_chi2", self.gate_chi2)?;
        pos("meas_sigma", self.meas_sigma)?;
        pos("birth.pos_sigma", self.birth.pos_sigma)?;
        pos("birth.v_max", self.birth.v_max)?;
        pos("birth.omega_sigma", self.birth.omega_sigma)?;
        pos("birth.confirm_radius", self.birth.confirm_radius)?;
        pos("dt", self.dt)?;
        if self.noise.sigma_pos < T::zero()
            || self.noise.sigma_v < T::zero()
            || self.noise.sigma_omega < T::zero()
        {
            return Err(Error::InvalidConfig("process noise sigma negative".into()));
        }
        for (name, v) in [
            ("particles_per_track", self.particles_per_track),
            ("h_max", self.h_max),
            ("h_up", self.h_up),
            ("birth.max_per_step", self.birth.max_per_step),
            ("birth.min_support", self.birth.min_support),
        ] {
            if v < 1 {
                return Err(Error::InvalidConfig(format!("{name} must be >= 1")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn particle(px: f64, py: f64, log_weight: f64) -> Particle<f64> {
        Particle {
            px,
            py,
            v: 1.0,
            phi: 0.0,
            omega: 0.0,
            log_weight,
        }
    }

    #[test]
    fn signature_canonical_form() {
        let sig = AssocSignature::from_indices(vec![5, 1, 3, 1]);
        assert_eq!(sig.indices(), &[1, 3, 5]);
        assert_eq!(sig.to_string(), "1-3-5");
        assert_eq!(AssocSignature::empty().to_string(), "");
    }

    #[test]
    fn label_ordering_newer_is_greater() {
        assert!(Label::new(3, 0) > Label::new(2, 9));
        assert!(Label::new(3, 1) > Label::new(3, 0));
    }

    #[test]
    fn hypothesis_signature_extraction() {
        let a = Label::new(0, 0);
        let b = Label::new(0, 1);
        let h = Hypothesis {
            id: 0,
            parent_id: 0,
            labels: vec![a, b],
            assoc: vec![
                AssocTarget::Track(b),
                AssocTarget::Clutter,
                AssocTarget::Track(a),
                AssocTarget::Track(b),
            ],
            weight: 1.0,
        };
        assert_eq!(h.signature_for(a).indices(), &[2]);
        assert_eq!(h.signature_for(b).indices(), &[0, 3]);
    }

    #[test]
    fn initial_posterior_is_valid() {
        let p = GlmbPosterior::<f64>::initial();
        assert!(p.check_invariants(100).is_ok());
        assert_eq!(p.map_hypothesis().unwrap().labels.len(), 0);
    }

    #[test]
    fn invariant_check_catches_bad_weight_sum() {
        let mut p = GlmbPosterior::<f64>::initial();
        p.hypotheses[0].weight = 0.5;
        assert!(p.check_invariants(100).is_err());
    }

    #[test]
    fn invariant_check_catches_missing_pool_entry() {
        let mut p = GlmbPosterior::<f64>::initial();
        p.hypotheses[0].labels = vec![Label::new(0, 0)];
        assert!(p.check_invariants(100).is_err());
    }

    #[test]
    fn track_normalize() {
        let mut track = LabeledTrack::new(
            Label::new(0, 0),
            vec![particle(0.0, 0.0, -700.0), particle(1.0, 0.0, -700.0)],
        );
        track.normalize().unwrap();
        let w = track.weights();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(TrackerConfig::<f64>::default().validate().is_ok());
        let mut bad = TrackerConfig::<f64>::default();
        bad.p_detect = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = TrackerConfig::<f64>::default();
        bad.h_up = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn kappa_floor() {
        assert_eq!(TrackerConfig::<f64>::kappa_from_rate(0.0, 6400.0), 1e-4);
        assert!((TrackerConfig::<f64>::kappa_from_rate(64.0, 6400.0) - 0.01).abs() < 1e-15);
    }
}
