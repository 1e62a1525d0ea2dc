//! Two-stage successor-hypothesis sampling.
//!
//! For each parent hypothesis, stage one draws Bernoulli track deaths from
//! the posterior death probabilities, and stage two draws one association
//! per measurement from the categorical distribution given by its
//! compatibility row restricted to surviving tracks (plus clutter). Because
//! no cap is placed on detections per track, measurement draws are mutually
//! independent and the whole batch parallelizes over hypotheses, samples,
//! and measurements. Duplicate samples collapse to unique candidates whose
//! weights are recomputed once from the target measure, so sample
//! multiplicity never enters the weight.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::likelihood::CompatibilityMatrix;
use crate::num::Real;
use crate::rng::{uniform, KeyedStream, StreamDomain, StreamKey};
use crate::types::{AssocTarget, GlmbPosterior, Hypothesis, Label, TrackerConfig};

/// One deduplicated successor hypothesis with its unnormalized log weight.
#[derive(Clone, Debug)]
pub struct Candidate<T> {
    pub parent_id: u64,
    /// Surviving labels, sorted.
    pub labels: Vec<Label>,
    /// Per-measurement association targets.
    pub assoc: Vec<AssocTarget>,
    pub log_weight: T,
}

/// Stage one: independent Bernoulli survival draws for the tracks of one
/// hypothesis. `death_probs[j]` aligns with `hypothesis.labels[j]`; track
/// `j` survives with probability `1 - death_probs[j]`.
pub fn sample_survival<T: Real>(
    hypothesis: &Hypothesis<T>,
    death_probs: &[T],
    rng: &mut KeyedStream,
) -> Vec<bool> {
    debug_assert_eq!(hypothesis.labels.len(), death_probs.len());
    death_probs
        .iter()
        .map(|&d| uniform::<T>(rng) >= d)
        .collect()
}

/// Stage two: one categorical association draw per measurement over the
/// clutter column and the still-alive track columns (dead columns are
/// treated as zeroed). Returns, per measurement, `0` for clutter or
/// `col` (1-based compatibility column) for a track. Multiple measurements
/// may pick the same track.
pub fn sample_associations<T: Real>(
    compat: &CompatibilityMatrix<T>,
    alive_cols: &[usize],
    rng: &mut KeyedStream,
) -> Vec<u32> {
    let m = compat.num_measurements();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let kappa = compat.entry(i, 0);
        let mut total = kappa;
        for &col in alive_cols {
            total += compat.entry(i, col);
        }
        let target = uniform::<T>(rng) * total;
        let mut acc = kappa;
        let mut picked = 0u32;
        if target >= acc {
            for &col in alive_cols {
                acc += compat.entry(i, col);
                if target < acc {
                    picked = col as u32;
                    break;
                }
            }
            if picked == 0 && target >= acc {
                // Rounding pushed the target past the last bucket.
                picked = alive_cols.last().copied().unwrap_or(0) as u32;
            }
        }
        out.push(picked);
    }
    out
}

/// Unnormalized log target weight of one successor hypothesis:
/// parent weight times the survival/death priors, the compatibility entries
/// of every sampled association, and a missed-detection factor for each
/// surviving track that claimed no measurement.
///
/// `cols` are the parent's 1-based compatibility columns in label order,
/// `survival_priors[j]` the matching priors. The association map must only
/// reference surviving columns.
pub fn hypothesis_weight<T: Real>(
    parent_log_weight: T,
    cols: &[usize],
    mask: &[bool],
    assoc: &[u32],
    compat: &CompatibilityMatrix<T>,
    survival_priors: &[T],
    p_detect: T,
) -> Result<T> {
    let mut log_w = parent_log_weight;
    let mut claimed = vec![false; cols.len()];

    for (i, &a) in assoc.iter().enumerate() {
        if a == 0 {
            log_w += compat.entry(i, 0).ln();
        } else {
            let j = cols
                .iter()
                .position(|&c| c == a as usize)
                .ok_or_else(|| {
                    Error::ContractViolation(format!(
                        "measurement {i} assigned to column {a} outside the hypothesis"
                    ))
                })?;
            if !mask[j] {
                return Err(Error::ContractViolation(format!(
                    "measurement {i} assigned to dead track column {a}"
                )));
            }
            claimed[j] = true;
            log_w += compat.entry(i, a as usize).ln();
        }
    }
    for (j, &alive) in mask.iter().enumerate() {
        let p = survival_priors[j];
        if alive {
            log_w += p.ln();
            if !claimed[j] {
                log_w += (T::one() - p_detect).ln();
            }
        } else {
            log_w += (T::one() - p).ln();
        }
    }
    Ok(log_w)
}

/// Sample identity: parent, survival mask over the parent's tracks, and the
/// association vector. Weights are recomputed from this key, so dedup is
/// order-independent.
type SampleKey = (u64, Vec<bool>, Vec<u32>);

/// Draws `h_up` two-stage samples per parent hypothesis, collapses
/// duplicates, and weights each unique candidate once under the target
/// measure. Candidates from all parents are concatenated, unnormalized;
/// the caller normalizes globally.
///
/// `survival_priors` and `death_probs` align with `compat.track_order`.
/// Deterministic for a fixed key regardless of thread count.
pub fn generate_hypotheses<T: Real>(
    predicted: &GlmbPosterior<T>,
    compat: &CompatibilityMatrix<T>,
    survival_priors: &[T],
    death_probs: &[T],
    config: &TrackerConfig<T>,
    key: &StreamKey,
) -> Vec<Candidate<T>> {
    let step = predicted.step;
    let col_of: BTreeMap<Label, usize> = compat
        .track_order
        .iter()
        .enumerate()
        .map(|(j, &l)| (l, j + 1))
        .collect();

    struct Parent<'a, T> {
        hyp: &'a Hypothesis<T>,
        cols: Vec<usize>,
        deaths: Vec<T>,
        priors: Vec<T>,
    }
    let parents: Vec<Parent<'_, T>> = predicted
        .hypotheses
        .iter()
        .map(|h| {
            let cols: Vec<usize> = h.labels.iter().map(|l| col_of[l]).collect();
            let deaths = cols.iter().map(|&c| death_probs[c - 1]).collect();
            let priors = cols.iter().map(|&c| survival_priors[c - 1]).collect();
            Parent {
                hyp: h,
                cols,
                deaths,
                priors,
            }
        })
        .collect();

    let h_up = config.h_up;
    let total = parents.len() * h_up;
    let mut keys: Vec<SampleKey> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let parent = &parents[flat / h_up];
            let sample = (flat % h_up) as u64;
            let mut survival_rng =
                key.stream(step, StreamDomain::Survival, parent.hyp.id, sample);
            let mask = sample_survival(parent.hyp, &parent.deaths, &mut survival_rng);
            let alive: Vec<usize> = parent
                .cols
                .iter()
                .zip(&mask)
                .filter_map(|(&c, &a)| a.then_some(c))
                .collect();
            let mut assoc_rng = key.stream(step, StreamDomain::Assoc, parent.hyp.id, sample);
            let assoc = sample_associations(compat, &alive, &mut assoc_rng);
            (parent.hyp.id, mask, assoc)
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();

    let parent_of: BTreeMap<u64, usize> = parents
        .iter()
        .enumerate()
        .map(|(i, p)| (p.hyp.id, i))
        .collect();

    keys.into_par_iter()
        .filter_map(|(parent_id, mask, assoc)| {
            let parent = &parents[parent_of[&parent_id]];
            let log_w = hypothesis_weight(
                parent.hyp.weight.ln(),
                &parent.cols,
                &mask,
                &assoc,
                compat,
                &parent.priors,
                config.p_detect,
            )
            .expect("sampled associations stay within surviving tracks");
            // Zero-probability candidates (only possible at the p_detect = 1
            // boundary) carry no posterior mass.
            if !log_w.is_finite() {
                return None;
            }
            let labels: Vec<Label> = parent
                .hyp
                .labels
                .iter()
                .zip(&mask)
                .filter_map(|(&l, &alive)| alive.then_some(l))
                .collect();
            let assoc = assoc
                .iter()
                .map(|&a| {
                    if a == 0 {
                        AssocTarget::Clutter
                    } else {
                        AssocTarget::Track(compat.track_order[a as usize - 1])
                    }
                })
                .collect();
            Some(Candidate {
                parent_id,
                labels,
                assoc,
                log_weight: log_w,
            })
        })
        .collect()
}
