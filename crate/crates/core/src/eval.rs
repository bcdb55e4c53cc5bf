//! Prediction metrics over a holdout set.

use crate::error::{Error, Result};
use crate::matrix::{NonNegMatrix, ObservationMask};
use crate::objective::js_phi;

/// Held-out `(truth, prediction)` pairs grouped by row, in row-major order.
/// Entries missing from `truth` are skipped.
fn holdout_rows(
    truth: &NonNegMatrix,
    pred: &NonNegMatrix,
    holdout: &ObservationMask,
) -> Result<Vec<Vec<(f64, f64)>>> {
    truth.check_same_shape("holdout metrics", pred.shape())?;
    truth.check_same_shape("holdout metrics", holdout.shape())?;
    if !pred.is_fully_observed() {
        return Err(Error::MissingEntries("predictions"));
    }
    Ok((0..truth.rows())
        .map(|i| {
            (0..truth.cols())
                .filter(|&j| holdout.get(i, j))
                .filter_map(|j| truth.get(i, j).map(|t| (t, pred.value(i, j))))
                .collect()
        })
        .collect())
}

fn flat_pairs(
    truth: &NonNegMatrix,
    pred: &NonNegMatrix,
    holdout: &ObservationMask,
) -> Result<Vec<(f64, f64)>> {
    let pairs: Vec<(f64, f64)> = holdout_rows(truth, pred, holdout)?
        .into_iter()
        .flatten()
        .collect();
    if pairs.is_empty() {
        return Err(Error::Precondition("holdout set is empty".into()));
    }
    Ok(pairs)
}

/// Fraction of held-out entries whose rounded prediction equals the truth.
/// With `ignore_zeros`, entries with true value 0 are left out entirely.
pub fn prediction_accuracy(
    truth: &NonNegMatrix,
    pred: &NonNegMatrix,
    holdout: &ObservationMask,
    ignore_zeros: bool,
) -> Result<f64> {
    let pairs: Vec<(f64, f64)> = holdout_rows(truth, pred, holdout)?
        .into_iter()
        .flatten()
        .filter(|&(t, _)| !ignore_zeros || t != 0.0)
        .collect();
    if pairs.is_empty() {
        return Err(Error::Precondition(
            "no held-out entries left to score".into(),
        ));
    }
    let hits = pairs.iter().filter(|&&(t, p)| p.round() == t).count();
    Ok(hits as f64 / pairs.len() as f64)
}

pub fn rmse(truth: &NonNegMatrix, pred: &NonNegMatrix, holdout: &ObservationMask) -> Result<f64> {
    let pairs = flat_pairs(truth, pred, holdout)?;
    let sq: f64 = pairs.iter().map(|(t, p)| (t - p) * (t - p)).sum();
    Ok((sq / pairs.len() as f64).sqrt())
}

pub fn mae(truth: &NonNegMatrix, pred: &NonNegMatrix, holdout: &ObservationMask) -> Result<f64> {
    let pairs = flat_pairs(truth, pred, holdout)?;
    Ok(pairs.iter().map(|(t, p)| (t - p).abs()).sum::<f64>() / pairs.len() as f64)
}

/// Mean Jensen–Shannon cost per held-out entry.
pub fn js_holdout(
    truth: &NonNegMatrix,
    pred: &NonNegMatrix,
    holdout: &ObservationMask,
) -> Result<f64> {
    let pairs = flat_pairs(truth, pred, holdout)?;
    Ok(pairs.iter().map(|&(t, p)| js_phi(t, p)).sum::<f64>() / pairs.len() as f64)
}

/// `‖T − P‖_F / ‖T‖_F` over held-out entries.
pub fn relative_frobenius_holdout(
    truth: &NonNegMatrix,
    pred: &NonNegMatrix,
    holdout: &ObservationMask,
) -> Result<f64> {
    let pairs = flat_pairs(truth, pred, holdout)?;
    let num: f64 = pairs.iter().map(|(t, p)| (t - p) * (t - p)).sum();
    let den: f64 = pairs.iter().map(|(t, _)| t * t).sum();
    if den == 0.0 {
        return Err(Error::Undefined("held-out truth is all zero".into()));
    }
    Ok((num / den).sqrt())
}

/// Descending ranks starting at 1; ties share the average of their positions,
/// or the smallest position when `optimistic`.
pub fn descending_ranks(values: &[f64], optimistic: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let r = if optimistic {
            (start + 1) as f64
        } else {
            (start + 1 + end) as f64 / 2.0
        };
        for &idx in &order[start..end] {
            ranks[idx] = r;
        }
        start = end;
    }
    ranks
}

/// Mean over rows of `1 / min_{m ∈ H(u)} rank(m)`, where `H(u)` holds the
/// held-out items with the row's highest true rating and ranks come from the
/// predictions within the row's holdout.
pub fn mean_reciprocal_rank(
    truth: &NonNegMatrix,
    pred: &NonNegMatrix,
    holdout: &ObservationMask,
    optimistic: bool,
) -> Result<f64> {
    let rows = holdout_rows(truth, pred, holdout)?;
    let mut total = 0.0;
    let mut used = 0usize;
    for row in rows.iter().filter(|r| !r.is_empty()) {
        let preds: Vec<f64> = row.iter().map(|&(_, p)| p).collect();
        let ranks = descending_ranks(&preds, optimistic);
        let top = row
            .iter()
            .map(|&(t, _)| t)
            .fold(f64::NEG_INFINITY, f64::max);
        let best = row
            .iter()
            .zip(&ranks)
            .filter(|((t, _), _)| *t == top)
            .map(|(_, &r)| r)
            .fold(f64::INFINITY, f64::min);
        total += 1.0 / best;
        used += 1;
    }
    if used == 0 {
        return Err(Error::Precondition("no row has a held-out entry".into()));
    }
    Ok(total / used as f64)
}

/// Row-averaged rank correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankCorrelation {
    /// `None` when no row qualified.
    pub mean: Option<f64>,
    pub rows_used: usize,
    /// Rows with at least two entries but no variation on one side.
    pub rows_skipped: usize,
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Spearman's ρ of one row: Pearson correlation of averaged ranks.
pub fn spearman_row(truth: &[f64], pred: &[f64]) -> Option<f64> {
    if truth.len() < 2 {
        return None;
    }
    pearson(
        &descending_ranks(truth, false),
        &descending_ranks(pred, false),
    )
}

fn tie_pairs(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .chunk_by(|a, b| a == b)
        .map(|g| (g.len() * (g.len() - 1) / 2) as f64)
        .sum()
}

/// Kendall's τ-b of one row.
pub fn kendall_row(truth: &[f64], pred: &[f64]) -> Option<f64> {
    let n = truth.len();
    if n < 2 {
        return None;
    }
    let sgn = |d: f64| {
        if d > 0.0 {
            1.0
        } else if d < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += sgn(truth[i] - truth[j]) * sgn(pred[i] - pred[j]);
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let den = ((n0 - tie_pairs(truth)) * (n0 - tie_pairs(pred))).sqrt();
    if den == 0.0 {
        None
    } else {
        Some((s / den).clamp(-1.0, 1.0))
    }
}

fn rank_correlation(
    truth: &NonNegMatrix,
    pred: &NonNegMatrix,
    holdout: &ObservationMask,
    per_row: fn(&[f64], &[f64]) -> Option<f64>,
) -> Result<RankCorrelation> {
    let rows = holdout_rows(truth, pred, holdout)?;
    let mut total = 0.0;
    let mut used = 0;
    let mut skipped = 0;
    for row in rows.iter().filter(|r| r.len() >= 2) {
        let (t, p): (Vec<f64>, Vec<f64>) = row.iter().copied().unzip();
        match per_row(&t, &p) {
            Some(v) => {
                total += v;
                used += 1;
            }
            None => skipped += 1,
        }
    }
    Ok(RankCorrelation {
        mean: (used > 0).then(|| total / used as f64),
        rows_used: used,
        rows_skipped: skipped,
    })
}

pub fn spearman_rho(
    truth: &NonNegMatrix,
    pred: &NonNegMatrix,
    holdout: &ObservationMask,
) -> Result<RankCorrelation> {
    rank_correlation(truth, pred, holdout, spearman_row)
}

pub fn kendall_tau(
    truth: &NonNegMatrix,
    pred: &NonNegMatrix,
    holdout: &ObservationMask,
) -> Result<RankCorrelation> {
    rank_correlation(truth, pred, holdout, kendall_row)
}

/// All holdout metrics at once. Metrics that are undefined for the input are
/// `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionReport {
    pub count: usize,
    pub frobenius: Option<f64>,
    pub rmse: f64,
    pub mae: f64,
    pub js: f64,
    pub spearman_rho: RankCorrelation,
    pub kendall_tau: RankCorrelation,
    pub mrr: f64,
    pub mrr_optimistic: f64,
    pub accuracy: f64,
    pub accuracy_nonzero: Option<f64>,
    pub count_nonzero: usize,
}

impl PredictionReport {
    pub fn compute(
        truth: &NonNegMatrix,
        pred: &NonNegMatrix,
        holdout: &ObservationMask,
    ) -> Result<Self> {
        let pairs = flat_pairs(truth, pred, holdout)?;
        let count_nonzero = pairs.iter().filter(|(t, _)| *t != 0.0).count();
        Ok(Self {
            count: pairs.len(),
            frobenius: relative_frobenius_holdout(truth, pred, holdout).ok(),
            rmse: rmse(truth, pred, holdout)?,
            mae: mae(truth, pred, holdout)?,
            js: js_holdout(truth, pred, holdout)?,
            spearman_rho: spearman_rho(truth, pred, holdout)?,
            kendall_tau: kendall_tau(truth, pred, holdout)?,
            mrr: mean_reciprocal_rank(truth, pred, holdout, false)?,
            mrr_optimistic: mean_reciprocal_rank(truth, pred, holdout, true)?,
            accuracy: prediction_accuracy(truth, pred, holdout, false)?,
            accuracy_nonzero: (count_nonzero > 0)
                .then(|| prediction_accuracy(truth, pred, holdout, true))
                .transpose()?,
            count_nonzero,
        })
    }

    /// `(name, value)` pairs in a fixed order; undefined metrics are `None`.
    pub fn metrics(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("frobenius", self.frobenius),
            ("rmse", Some(self.rmse)),
            ("mae", Some(self.mae)),
            ("js", Some(self.js)),
            ("spearman_rho", self.spearman_rho.mean),
            ("kendall_tau", self.kendall_tau.mean),
            ("mrr", Some(self.mrr)),
            ("mrr_optimistic", Some(self.mrr_optimistic)),
            ("accuracy", Some(self.accuracy)),
            ("accuracy_nonzero", self.accuracy_nonzero),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn row(v: &[f64]) -> NonNegMatrix {
        NonNegMatrix::from_rows(&[v.to_vec()]).unwrap()
    }

    fn all(n: usize, m: usize) -> ObservationMask {
        ObservationMask::new(n, m, vec![true; n * m]).unwrap()
    }

    #[test]
    fn accuracy_examples() {
        let t = row(&[1.0, 2.0, 0.0]);
        let p = row(&[1.4, 2.6, 0.2]);
        let h = all(1, 3);
        // 0.2 rounds to 0, so the zero entry is a hit as well
        assert_abs_diff_eq!(prediction_accuracy(&t, &p, &h, false).unwrap(), 2.0 / 3.0);
        assert_abs_diff_eq!(prediction_accuracy(&t, &p, &h, true).unwrap(), 0.5);
        assert_eq!(prediction_accuracy(&t, &t, &h, false).unwrap(), 1.0);
        let nz = row(&[1.0, 3.0]);
        assert_eq!(
            prediction_accuracy(&nz, &row(&[0.0, 0.0]), &all(1, 2), false).unwrap(),
            0.0
        );
        assert!(prediction_accuracy(&row(&[0.0]), &row(&[0.0]), &all(1, 1), true).is_err());
        assert!(prediction_accuracy(&t, &p, &ObservationMask::zeros(1, 3), false).is_err());
    }

    #[test]
    fn error_metric_examples() {
        let t = row(&[1.0, 3.0]);
        let p = row(&[2.0, 5.0]);
        let h = all(1, 2);
        assert_abs_diff_eq!(rmse(&t, &p, &h).unwrap(), 2.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(mae(&t, &p, &h).unwrap(), 1.5);
        for f in [rmse, mae, js_holdout] {
            assert_eq!(f(&t, &t, &h).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(
            js_holdout(&t, &p, &h).unwrap(),
            js_holdout(&p, &t, &h).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn holdout_restricts_entries() {
        let t = row(&[1.0, 3.0]);
        let p = row(&[1.0, 5.0]);
        let h = ObservationMask::from_rows(&[vec![1, 0]]).unwrap();
        assert_eq!(rmse(&t, &p, &h).unwrap(), 0.0);
    }

    #[test]
    fn mrr_examples() {
        let t = row(&[5.0, 3.0, 5.0]);
        let h = all(1, 3);
        assert_eq!(
            mean_reciprocal_rank(&t, &row(&[4.0, 2.0, 3.0]), &h, false).unwrap(),
            1.0
        );
        let tied = row(&[4.0, 4.0, 2.0]);
        assert_abs_diff_eq!(
            mean_reciprocal_rank(&t, &tied, &h, false).unwrap(),
            1.0 / 1.5
        );
        assert_eq!(mean_reciprocal_rank(&t, &tied, &h, true).unwrap(), 1.0);
        let single = ObservationMask::from_rows(&[vec![0, 1, 0]]).unwrap();
        assert_eq!(
            mean_reciprocal_rank(&t, &tied, &single, false).unwrap(),
            1.0
        );
        assert!(mean_reciprocal_rank(&t, &tied, &ObservationMask::zeros(1, 3), false).is_err());
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(
            descending_ranks(&[4.0, 4.0, 2.0], false),
            vec![1.5, 1.5, 3.0]
        );
        assert_eq!(
            descending_ranks(&[4.0, 4.0, 2.0], true),
            vec![1.0, 1.0, 3.0]
        );
        assert_eq!(
            descending_ranks(&[1.0, 3.0, 2.0, 3.0], false),
            vec![4.0, 1.5, 3.0, 1.5]
        );
    }

    #[test]
    fn correlation_examples() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let rev = [4.0, 3.0, 2.0, 1.0];
        assert_abs_diff_eq!(spearman_row(&t, &t).unwrap(), 1.0);
        assert_abs_diff_eq!(kendall_row(&t, &t).unwrap(), 1.0);
        assert_abs_diff_eq!(spearman_row(&t, &rev).unwrap(), -1.0);
        assert_abs_diff_eq!(kendall_row(&t, &rev).unwrap(), -1.0);
        assert_eq!(spearman_row(&t, &[2.0; 4]), None);
        assert_eq!(kendall_row(&[1.0], &[1.0]), None);
    }

    #[test]
    fn correlation_skips_flat_rows() {
        let t = NonNegMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 2.0, 2.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        let p = NonNegMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![1.0, 2.0, 3.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        let h = ObservationMask::from_rows(&[vec![1, 1, 1], vec![1, 1, 1], vec![1, 0, 0]]).unwrap();
        let rho = spearman_rho(&t, &p, &h).unwrap();
        assert_eq!(
            (rho.mean, rho.rows_used, rho.rows_skipped),
            (Some(1.0), 1, 1)
        );
    }

    #[test]
    fn report_collects_everything() {
        let t = NonNegMatrix::from_rows(&[vec![5.0, 3.0, 0.0], vec![1.0, 4.0, 2.0]]).unwrap();
        let p = NonNegMatrix::from_rows(&[vec![4.6, 3.2, 0.4], vec![1.1, 3.6, 2.4]]).unwrap();
        let r = PredictionReport::compute(&t, &p, &all(2, 3)).unwrap();
        assert_eq!(r.count, 6);
        assert_eq!(r.count_nonzero, 5);
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.accuracy_nonzero, Some(1.0));
        assert_eq!(r.metrics().len(), 10);
        assert!(r.mrr_optimistic >= r.mrr);
    }

    /// Pair-counting τ-b straight from the definition.
    fn kendall_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
        let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
        for i in 0..x.len() {
            for j in 0..i {
                let dx = x[i].partial_cmp(&x[j]).unwrap();
                let dy = y[i].partial_cmp(&y[j]).unwrap();
                use std::cmp::Ordering::Equal;
                match (dx, dy) {
                    (Equal, Equal) => {}
                    (Equal, _) => tx += 1,
                    (_, Equal) => ty += 1,
                    (a, b) if a == b => c += 1,
                    _ => d += 1,
                }
            }
        }
        let den = (((c + d + tx) * (c + d + ty)) as f64).sqrt();
        (den > 0.0).then(|| (c - d) as f64 / den)
    }

    /// Spearman via explicit average-rank loops and the covariance formula.
    fn spearman_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
        let rank = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .map(|a| {
                    let less = v.iter().filter(|b| *b < a).count() as f64;
                    let eq = v.iter().filter(|b| *b == a).count() as f64;
                    less + (eq + 1.0) / 2.0
                })
                .collect()
        };
        let (rx, ry) = (rank(x), rank(y));
        let n = x.len() as f64;
        let mean = (n + 1.0) / 2.0;
        let cov: f64 = rx
            .iter()
            .zip(&ry)
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum();
        let vx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
        let vy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
        (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
    }

    proptest! {
        #[test]
        fn kendall_matches_pair_counting(
            x in proptest::collection::vec(0u8..4, 6),
            y in proptest::collection::vec(0u8..4, 6),
        ) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            match (kendall_row(&x, &y), kendall_oracle(&x, &y)) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (a, b) => prop_assert_eq!(a, b),
            }
            match (spearman_row(&x, &y), spearman_oracle(&x, &y)) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (a, b) => prop_assert_eq!(a, b),
            }
        }

        #[test]
        fn optimistic_mrr_dominates(
            t in proptest::collection::vec(0u8..6, 12),
            p in proptest::collection::vec(0u8..6, 12),
        ) {
            let t = NonNegMatrix::new(3, 4, t.into_iter().map(f64::from).collect()).unwrap();
            let p = NonNegMatrix::new(3, 4, p.into_iter().map(f64::from).collect()).unwrap();
            let h = all(3, 4);
            prop_assert!(mean_reciprocal_rank(&t, &p, &h, true).unwrap() >= mean_reciprocal_rank(&t, &p, &h, false).unwrap());
        }

        #[test]
        fn metrics_invariant_under_row_permutation(
            t in proptest::collection::vec(0u8..6, 12),
            p in proptest::collection::vec(0.0f64..6.0, 12),
        ) {
            let tv: Vec<f64> = t.into_iter().map(f64::from).collect();
            let swap = |v: &[f64]| -> Vec<f64> { [&v[8..12], &v[0..8]].concat() };
            let a = PredictionReport::compute(
                &NonNegMatrix::new(3, 4, tv.clone()).unwrap(),
                &NonNegMatrix::new(3, 4, p.clone()).unwrap(),
                &all(3, 4),
            ).unwrap();
            let b = PredictionReport::compute(
                &NonNegMatrix::new(3, 4, swap(&tv)).unwrap(),
                &NonNegMatrix::new(3, 4, swap(&p)).unwrap(),
                &all(3, 4),
            ).unwrap();
            for ((_, x), (_, y)) in a.metrics().into_iter().zip(b.metrics()) {
                match (x, y) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                    (x, y) => prop_assert_eq!(x, y),
                }
            }
        }
    }
}
