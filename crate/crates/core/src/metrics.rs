//! Evaluation metrics: minimum-cost assignment, Hungarian tracking error,
//! cardinality error, and per-run aggregation with standard errors.

use crate::num::Real;

/// Minimum-total-cost one-to-one partial assignment of a rectangular cost
/// matrix, covering `min(rows, cols)` pairs. Returns `(row, col)` pairs
/// sorted by row. Empty matrices give an empty assignment.
///
/// Shortest-augmenting-path formulation with row/column potentials, O(n^3).
pub fn hungarian<T: Real>(cost: &[Vec<T>]) -> Vec<(usize, usize)> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    if rows > cols {
        // Solve the transpose and flip the pairs back.
        let transposed: Vec<Vec<T>> = (0..cols)
            .map(|j| (0..rows).map(|i| cost[i][j]).collect())
            .collect();
        let mut pairs: Vec<(usize, usize)> =
            hungarian(&transposed).into_iter().map(|(r, c)| (c, r)).collect();
        pairs.sort_unstable();
        return pairs;
    }

    // 1-based potentials; `matched_row[j]` is the row assigned to column j.
    let n = rows;
    let m = cols;
    let inf = T::infinity();
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); m + 1];
    let mut matched_row = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| matched_row[j] != 0)
        .map(|j| (matched_row[j] - 1, j - 1))
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Mean Euclidean distance of the optimal matching between true and
/// estimated positions. `None` when either side is empty (excluded from
/// time averages). Unmatched surplus objects contribute no penalty;
/// cardinality error is reported separately.
pub fn tracking_error<T: Real>(truth: &[[T; 2]], estimates: &[[T; 2]]) -> Option<T> {
    if truth.is_empty() || estimates.is_empty() {
        return None;
    }
    let cost: Vec<Vec<T>> = truth
        .iter()
        .map(|t| {
            estimates
                .iter()
                .map(|e| {
                    let dx = t[0] - e[0];
                    let dy = t[1] - e[1];
                    (dx * dx + dy * dy).sqrt()
                })
                .collect()
        })
        .collect();
    let pairs = hungarian(&cost);
    let total: T = pairs.iter().map(|&(i, j)| cost[i][j]).sum();
    Some(total / T::from_usize(pairs.len()).unwrap())
}

/// Absolute and relative cardinality error; the relative form is undefined
/// when the true count is zero.
pub fn cardinality_error(true_n: usize, estimated_n: usize) -> (usize, Option<f64>) {
    let absolute = true_n.abs_diff(estimated_n);
    let relative = (true_n > 0).then(|| absolute as f64 / true_n as f64);
    (absolute, relative)
}

/// Per-step metrics of one tracker run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub k: i64,
    pub update_seconds: f64,
    pub n_hypotheses: usize,
    pub est_cardinality: usize,
    pub true_cardinality: usize,
    /// `None` when truth or estimate was empty at this step.
    pub tracking_error_m: Option<f64>,
}

impl StepRecord {
    pub fn rel_cardinality_error(&self) -> Option<f64> {
        cardinality_error(self.true_cardinality, self.est_cardinality).1
    }
}

/// Time averages of one run. Undefined steps (empty truth or estimate) are
/// excluded from their metric's average; a metric with no defined steps is
/// `NaN`.
#[derive(Clone, Copy, Debug)]
pub struct RunSummary {
    pub mean_update_s: f64,
    pub p95_update_s: f64,
    pub rel_card_err: f64,
    pub track_err_m: f64,
    pub mean_hypotheses: f64,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Nearest-rank 95th percentile.
fn p95(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let rank = ((0.95 * sorted.len() as f64).ceil() as usize).max(1);
    sorted[rank - 1]
}

pub fn summarize_run(records: &[StepRecord]) -> RunSummary {
    let updates: Vec<f64> = records.iter().map(|r| r.update_seconds).collect();
    let card: Vec<f64> = records
        .iter()
        .filter_map(StepRecord::rel_cardinality_error)
        .collect();
    let track: Vec<f64> = records.iter().filter_map(|r| r.tracking_error_m).collect();
    let hyps: Vec<f64> = records.iter().map(|r| r.n_hypotheses as f64).collect();
    RunSummary {
        mean_update_s: mean(&updates),
        p95_update_s: p95(&updates),
        rel_card_err: mean(&card),
        track_err_m: mean(&track),
        mean_hypotheses: mean(&hyps),
    }
}

/// Mean and standard error of the mean across runs.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanSem {
    pub mean: f64,
    pub sem: f64,
}

/// Sample (n-1) standard deviation based SEM over the finite values.
fn mean_sem(values: impl Iterator<Item = f64>) -> MeanSem {
    let finite: Vec<f64> = values.filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return MeanSem {
            mean: f64::NAN,
            sem: f64::NAN,
        };
    }
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    if finite.len() < 2 {
        return MeanSem { mean, sem: 0.0 };
    }
    let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    MeanSem {
        mean,
        sem: (var / n).sqrt(),
    }
}

/// Across-run aggregate for one benchmark configuration.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConfigSummary {
    pub update_s: MeanSem,
    pub rel_card_err: MeanSem,
    pub track_err_m: MeanSem,
    pub mean_hypotheses: MeanSem,
}

pub fn aggregate(runs: &[RunSummary]) -> ConfigSummary {
    ConfigSummary {
        update_s: mean_sem(runs.iter().map(|r| r.mean_update_s)),
        rel_card_err: mean_sem(runs.iter().map(|r| r.rel_card_err)),
        track_err_m: mean_sem(runs.iter().map(|r| r.track_err_m)),
        mean_hypotheses: mean_sem(runs.iter().map(|r| r.mean_hypotheses)),
    }
}
