//! Log-space weight arithmetic.
//!
//! Hypothesis and particle weights are products of many likelihood factors,
//! so they are carried as log-weights and only exponentiated at
//! normalization boundaries.

use crate::error::{Error, Result};
use crate::num::{real, Real};

/// `log(sum(exp(x)))` with the usual max shift; `-inf` entries are allowed.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return T::neg_infinity();
    }
    let sum: T = xs.iter().map(|&x| (x - max).exp()).sum();
    sum.ln() + max
}

/// Normalizes nonnegative linear-domain weights to probabilities.
///
/// Internally works in log space, so inputs scaled by any positive constant
/// normalize identically and values as small as `1e-300` do not underflow.
pub fn normalize_weights<T: Real>(weights: &[T]) -> Result<Vec<T>> {
    let logs: Vec<T> = weights.iter().map(|&w| w.ln()).collect();
    normalize_log_weights(&logs)
}

/// Normalizes log-domain weights, returning linear-domain probabilities.
pub fn normalize_log_weights<T: Real>(log_weights: &[T]) -> Result<Vec<T>> {
    let lse = log_sum_exp(log_weights);
    if log_weights.is_empty() || !lse.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    Ok(log_weights.iter().map(|&lw| (lw - lse).exp()).collect())
}

/// Effective sample size `1 / sum(w^2)` of a normalized weight vector.
///
/// Errors if the weights do not sum to one (within `1e-6`), since ESS is
/// only meaningful for probabilities.
pub fn effective_sample_size<T: Real>(weights: &[T]) -> Result<T> {
    let sum: T = weights.iter().copied().sum();
    if (sum - T::one()).abs() > real(1e-6) {
        return Err(Error::UnnormalizedWeights {
            sum: sum.to_f64().unwrap_or(f64::NAN),
        });
    }
    let sq: T = weights.iter().map(|&w| w * w).sum();
    Ok(T::one() / sq)
}
