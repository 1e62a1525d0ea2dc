//! Measurement model: particle-mixture likelihoods, Mahalanobis gating,
//! compatibility-matrix construction, and posterior track-death
//! probabilities.

use rayon::prelude::*;

use crate::num::{real, Real};
use crate::types::{Label, LabeledTrack, MeasurementSet, TrackerConfig};
use crate::weights::log_sum_exp;

/// Gated detection likelihoods of every (measurement, track) pair plus the
/// clutter column: an `M x (T+1)` dense matrix with column 0 equal to the
/// clutter density `kappa` in every row.
#[derive(Clone, Debug)]
pub struct CompatibilityMatrix<T> {
    m: usize,
    t: usize,
    /// Row-major `m x (t+1)`; column 0 is clutter.
    entries: Vec<T>,
    /// Row-major `m x t` gate indicators.
    gate: Vec<bool>,
    /// Labels fixing the track-column order (column `j+1` is track `j`).
    pub track_order: Vec<Label>,
}

impl<T: Real> CompatibilityMatrix<T> {
    pub fn num_measurements(&self) -> usize {
        self.m
    }

    pub fn num_tracks(&self) -> usize {
        self.t
    }

    /// Entry at row `i`, column `col` (0 = clutter, `j+1` = track `j`).
    #[inline]
    pub fn entry(&self, i: usize, col: usize) -> T {
        self.entries[i * (self.t + 1) + col]
    }

    /// Whether measurement `i` passed the gate of track `j` (0-based).
    #[inline]
    pub fn gated(&self, i: usize, j: usize) -> bool {
        self.gate[i * self.t + j]
    }
}

/// Weighted second-order statistics of one particle cloud's positions,
/// prepared for repeated gating/likelihood evaluation.
struct CloudStats<T> {
    mean: [T; 2],
    /// Inverse of `S = cloud position covariance + meas_sigma^2 I`.
    s_inv: [[T; 2]; 2],
}

fn cloud_stats<T: Real>(track: &LabeledTrack<T>, meas_sigma: T) -> CloudStats<T> {
    let mut mx = T::zero();
    let mut my = T::zero();
    for p in &track.particles {
        let w = p.weight();
        mx += w * p.px;
        my += w * p.py;
    }
    let mut cxx = T::zero();
    let mut cxy = T::zero();
    let mut cyy = T::zero();
    for p in &track.particles {
        let w = p.weight();
        let dx = p.px - mx;
        let dy = p.py - my;
        cxx += w * dx * dx;
        cxy += w * dx * dy;
        cyy += w * dy * dy;
    }
    let var = meas_sigma * meas_sigma;
    let mut sxx = cxx + var;
    let mut syy = cyy + var;
    let mut sxy = cxy;
    let mut det = sxx * syy - sxy * sxy;
    if !(det.is_finite() && det > T::zero()) {
        // Zero-spread cloud with a degenerate sigma; regularize, never fail.
        let reg = real(1e-9);
        sxx += reg;
        syy += reg;
        det = sxx * syy - sxy * sxy;
        if !(det.is_finite() && det > T::zero()) {
            sxy = T::zero();
            det = sxx * syy;
        }
    }
    CloudStats {
        mean: [mx, my],
        s_inv: [[syy / det, -sxy / det], [-sxy / det, sxx / det]],
    }
}

fn mahalanobis2<T: Real>(z: &[T; 2], stats: &CloudStats<T>) -> T {
    let dx = z[0] - stats.mean[0];
    let dy = z[1] - stats.mean[1];
    dx * (stats.s_inv[0][0] * dx + stats.s_inv[0][1] * dy)
        + dy * (stats.s_inv[1][0] * dx + stats.s_inv[1][1] * dy)
}

/// Particle-mixture likelihood of a 2-D measurement under a track:
/// `sum_p w_p * Normal(z; position_p, meas_sigma^2 I)`, in density units
/// (per square meter). Underflows cleanly to zero far from the cloud.
pub fn measurement_likelihood<T: Real>(z: &[T; 2], track: &LabeledTrack<T>, meas_sigma: T) -> T {
    let var = meas_sigma * meas_sigma;
    let half = real::<T>(0.5);
    let logs: Vec<T> = track
        .particles
        .iter()
        .map(|p| {
            let dx = z[0] - p.px;
            let dy = z[1] - p.py;
            p.log_weight - half * (dx * dx + dy * dy) / var
        })
        .collect();
    let lse = log_sum_exp(&logs);
    if lse == T::neg_infinity() {
        return T::zero();
    }
    lse.exp() / ((T::PI() + T::PI()) * var)
}

/// Mahalanobis gate against the cloud's weighted mean and covariance
/// (inflated by the measurement variance), thresholded at `gate_chi2`.
pub fn gate<T: Real>(z: &[T; 2], track: &LabeledTrack<T>, config: &TrackerConfig<T>) -> bool {
    let stats = cloud_stats(track, config.meas_sigma);
    mahalanobis2(z, &stats) <= config.gate_chi2
}

/// Builds the compatibility matrix for a fixed, recorded track order.
///
/// `entries[i][0] = kappa`; `entries[i][j+1]` is
/// `p_detect * measurement_likelihood(z_i, track_j)` where the gate passes
/// and zero elsewhere. Rows are computed in parallel.
pub fn build_compatibility<T: Real>(
    measurements: &MeasurementSet<T>,
    tracks: &[&LabeledTrack<T>],
    config: &TrackerConfig<T>,
) -> CompatibilityMatrix<T> {
    let m = measurements.len();
    let t = tracks.len();
    let stats: Vec<CloudStats<T>> = tracks
        .iter()
        .map(|tr| cloud_stats(tr, config.meas_sigma))
        .collect();

    let rows: Vec<(Vec<T>, Vec<bool>)> = measurements
        .detections
        .par_iter()
        .map(|z| {
            let mut entries = Vec::with_capacity(t + 1);
            let mut gates = Vec::with_capacity(t);
            entries.push(config.clutter_kappa);
            for (j, track) in tracks.iter().enumerate() {
                let inside = mahalanobis2(z, &stats[j]) <= config.gate_chi2;
                gates.push(inside);
                entries.push(if inside {
                    config.p_detect * measurement_likelihood(z, track, config.meas_sigma)
                } else {
                    T::zero()
                });
            }
            (entries, gates)
        })
        .collect();

    let mut entries = Vec::with_capacity(m * (t + 1));
    let mut gate = Vec::with_capacity(m * t);
    for (e, g) in rows {
        entries.extend(e);
        gate.extend(g);
    }
    CompatibilityMatrix {
        m,
        t,
        entries,
        gate,
        track_order: tracks.iter().map(|tr| tr.label).collect(),
    }
}

/// Appends freshly computed columns for birth tracks to an existing matrix,
/// leaving the original columns untouched.
pub fn extend_with_births<T: Real>(
    base: &CompatibilityMatrix<T>,
    measurements: &MeasurementSet<T>,
    births: &[&LabeledTrack<T>],
    config: &TrackerConfig<T>,
) -> CompatibilityMatrix<T> {
    if births.is_empty() {
        return base.clone();
    }
    let m = base.m;
    let t = base.t + births.len();
    let stats: Vec<CloudStats<T>> = births
        .iter()
        .map(|tr| cloud_stats(tr, config.meas_sigma))
        .collect();

    let rows: Vec<(Vec<T>, Vec<bool>)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let z = &measurements.detections[i];
            let mut entries = Vec::with_capacity(t + 1);
            let mut gates = Vec::with_capacity(t);
            for col in 0..=base.t {
                entries.push(base.entry(i, col));
            }
            for j in 0..base.t {
                gates.push(base.gated(i, j));
            }
            for (j, track) in births.iter().enumerate() {
                let inside = mahalanobis2(z, &stats[j]) <= config.gate_chi2;
                gates.push(inside);
                entries.push(if inside {
                    config.p_detect * measurement_likelihood(z, track, config.meas_sigma)
                } else {
                    T::zero()
                });
            }
            (entries, gates)
        })
        .collect();

    let mut entries = Vec::with_capacity(m * (t + 1));
    let mut gate = Vec::with_capacity(m * t);
    for (e, g) in rows {
        entries.extend(e);
        gate.extend(g);
    }
    let mut track_order = base.track_order.clone();
    track_order.extend(births.iter().map(|tr| tr.label));
    CompatibilityMatrix {
        m,
        t,
        entries,
        gate,
        track_order,
    }
}

/// Posterior probability that track `j` (0-based column) died, balancing the
/// prior survival probability against its detection evidence.
///
/// With evidence `e_j = max_i C[i,j] / (C[i,j] + kappa)` over gated
/// measurements (zero when none gate), the death probability is
/// `(1 - p_s) / ((1 - p_s) + p_s * ((1 - p_d) + p_d * e_j))` where `p_s` is
/// the survival prior (`r_birth` for newborn tracks). Monotone decreasing in
/// the evidence.
pub fn death_probability<T: Real>(
    j: usize,
    compat: &CompatibilityMatrix<T>,
    survival_prior: T,
    config: &TrackerConfig<T>,
) -> T {
    let kappa = config.clutter_kappa;
    let mut evidence = T::zero();
    for i in 0..compat.m {
        if compat.gated(i, j) {
            let c = compat.entry(i, j + 1);
            evidence = evidence.max(c / (c + kappa));
        }
    }
    let died = T::one() - survival_prior;
    let detected = (T::one() - config.p_detect) + config.p_detect * evidence;
    died / (died + survival_prior * detected)
}
