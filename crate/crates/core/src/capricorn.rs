//! Block updater for discrete ("flipping") noise.
//!
//! A new block is grown around the row with the largest uncovered mass:
//! rows whose log-ratio against the seed row is nearly constant on some
//! column set are taken to belong to the same rank-1 block. The values are
//! then recovered by a least-squares fit and the block is expanded with any
//! further rows and columns that fit it without overcovering the data.

use rand::RngCore;
use rayon::prelude::*;

use crate::equator::{block_index, Block, BlockUpdater};
use crate::error::{Error, Result};
use crate::matrix::{maxtimes_product_excluding, NonNegMatrix, PatternMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapricornParams {
    /// Minimum number of columns with a shared ratio (`bucketSize`).
    pub bucket_size: usize,
    /// Bucket width on the log-ratio scale.
    pub delta: f64,
    /// Expansion threshold on the overcover impact.
    pub theta: f64,
    /// Correlation threshold in `[0, 1]`; higher keeps more rows.
    pub tau: f64,
}

impl Default for CapricornParams {
    fn default() -> Self {
        Self {
            bucket_size: 3,
            delta: 0.01,
            theta: 0.5,
            tau: 0.5,
        }
    }
}

impl CapricornParams {
    pub fn validate(&self) -> Result<()> {
        if self.bucket_size == 0 {
            return Err(Error::InvalidParameter("bucket_size must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        if !(self.theta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must be > 0, got {}",
                self.theta
            )));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::InvalidParameter(format!(
                "tau must be in [0, 1], got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Capricorn {
    pub params: CapricornParams,
}

impl Capricorn {
    pub fn new(params: CapricornParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }
}

/// Lowest index of the maximum.
fn argmax_by<T: PartialOrd + Copy>(values: impl IntoIterator<Item = T>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, bv)) if !(v > bv) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Largest set of indices on which `u ./ v` is nearly constant.
///
/// Only indices where both vectors are strictly positive take part. Their
/// log-ratios are bucketed into `⌈(max − min)/δ⌉` buckets of width `δ`
/// starting at the minimum; the most populous bucket is returned (lowest
/// bucket on ties), or nothing if it has fewer than `bucket_size` members.
pub fn find_row_set(u: &[f64], v: &[f64], bucket_size: usize, delta: f64) -> Vec<usize> {
    let mut ratios: Vec<(usize, f64)> = u
        .iter()
        .zip(v)
        .enumerate()
        .filter(|(_, (&x, &y))| x > 0.0 && y > 0.0)
        .map(|(i, (&x, &y))| (i, (x / y).ln()))
        .collect();
    if ratios.is_empty() {
        return Vec::new();
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, r)| {
            (lo.min(r), hi.max(r))
        });
    let n_buckets = (((hi - lo) / delta).ceil() as u64).max(1);
    let mut keyed: Vec<(u64, usize)> = ratios
        .drain(..)
        .map(|(i, r)| ((((r - lo) / delta).floor() as u64).min(n_buckets - 1), i))
        .collect();
    keyed.sort_unstable();

    // longest run of equal bucket keys, earliest bucket on ties
    let (mut best_start, mut best_len) = (0, 0);
    let mut start = 0;
    for end in 1..=keyed.len() {
        if end == keyed.len() || keyed[end].0 != keyed[start].0 {
            if end - start > best_len {
                best_start = start;
                best_len = end - start;
            }
            start = end;
        }
    }
    if best_len < bucket_size {
        return Vec::new();
    }
    keyed[best_start..best_start + best_len]
        .iter()
        .map(|&(_, i)| i)
        .collect()
}

/// Row correlation `⟨h_i, h_seed⟩ / (⟨h_i, h_i⟩ + 1)` of two pattern rows.
pub fn row_correlation(row: &[bool], seed: &[bool]) -> f64 {
    let inner = row.iter().zip(seed).filter(|(&x, &y)| x && y).count();
    let norm = row.iter().filter(|&&x| x).count();
    inner as f64 / (norm as f64 + 1.0)
}

/// Pattern of the block passing through row `idx` of the residual `r`.
/// Missing entries of `r` are treated as zero.
pub fn correlations_with_row(
    r: &NonNegMatrix,
    idx: usize,
    bucket_size: usize,
    delta: f64,
    tau: f64,
) -> PatternMatrix {
    let (n, m) = r.shape();
    let mut h = PatternMatrix::zeros(n, m);
    if n < 2 {
        return h;
    }
    let seed = r.row(idx);
    let sets: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| find_row_set(seed, r.row(i), bucket_size, delta))
        .collect();
    for (i, set) in sets.iter().enumerate() {
        let row = h.row_mut(i);
        for &j in set {
            row[j] = true;
        }
    }

    let s = argmax_by((0..n).map(|i| if i == idx { None } else { Some(h.row_sum(i)) }))
        .expect("n >= 2");
    let second = h.row(s).to_vec();
    h.row_mut(idx).copy_from_slice(&second);

    let cutoff = row_correlation(&second, &second) - tau;
    for i in 0..n {
        if row_correlation(h.row(i), &second) < cutoff {
            h.row_mut(i).fill(false);
        }
    }
    h
}

/// Fits a rank-1 block to `r` restricted to `b_idx × c_idx`.
///
/// Each row `p` of the restricted matrix is tried as the row vector `c`; the
/// column vector is then the least-squares fit `b_i = ⟨r_i, c⟩ / ⟨c, c⟩`.
/// The candidate with the smallest Frobenius residual wins (lowest `p` on
/// ties). Missing entries count as zero.
pub fn recover_block(r: &NonNegMatrix, b_idx: &[usize], c_idx: &[usize]) -> Block {
    let (n, m) = r.shape();
    let mut out = Block::zeros(n, m);
    if b_idx.is_empty() || c_idx.is_empty() {
        return out;
    }
    let width = c_idx.len();
    let sub: Vec<f64> = b_idx
        .iter()
        .flat_map(|&i| c_idx.iter().map(move |&j| r.value(i, j)))
        .collect();
    let sub_row = |q: usize| &sub[q * width..(q + 1) * width];
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();

    let fit = |p: usize| -> Option<(f64, Vec<f64>)> {
        let c = sub_row(p);
        let cc = dot(c, c);
        if cc == 0.0 {
            return None;
        }
        let mut err = 0.0;
        let mut weights = Vec::with_capacity(b_idx.len());
        for q in 0..b_idx.len() {
            let row = sub_row(q);
            let t = (dot(row, c) / cc).max(0.0);
            err += row
                .iter()
                .zip(c)
                .map(|(x, y)| (x - t * y).powi(2))
                .sum::<f64>();
            weights.push(t);
        }
        Some((err, weights))
    };

    let candidates: Vec<Option<(f64, Vec<f64>)>> =
        (0..b_idx.len()).into_par_iter().map(fit).collect();
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    for (p, cand) in candidates.into_iter().enumerate() {
        if let Some((err, weights)) = cand {
            if best.as_ref().is_none_or(|(_, be, _)| err < *be) {
                best = Some((p, err, weights));
            }
        }
    }
    if let Some((p, _, weights)) = best {
        for (q, &i) in b_idx.iter().enumerate() {
            out.b[i] = weights[q];
        }
        for (t, &j) in c_idx.iter().enumerate() {
            out.c[j] = sub_row(p)[t];
        }
    }
    out
}

/// Median of a nonempty sample; the mean of the two middle values for even sizes.
fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    let h = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[h]
    } else {
        0.5 * (xs[h - 1] + xs[h])
    }
}

/// Refits each nonzero `b_i` as the median ratio `r_ij / c_j` over the columns
/// where row `i` of `r` is a constant multiple of `c` (its [`find_row_set`]
/// bucket). Rows without a bucket keep their weight.
pub fn refine_weights(
    r: &NonNegMatrix,
    b: &[f64],
    c: &[f64],
    bucket_size: usize,
    delta: f64,
) -> Vec<f64> {
    (0..r.rows())
        .into_par_iter()
        .map(|i| {
            if b[i] == 0.0 {
                return 0.0;
            }
            let row = r.row(i);
            let set = find_row_set(c, row, bucket_size, delta);
            if set.is_empty() {
                return b[i];
            }
            median(set.iter().map(|&j| row[j] / c[j]).collect())
        })
        .collect()
}

/// Overcover impact of adding `alpha * c` to a data row: overcover summed
/// over `cover` (every observed column the new row would reach) against the
/// gain over a zero row on the matched columns `gain`.
///
/// Returns `None` when the denominator is not positive.
pub fn impact(
    alpha: f64,
    c: &[f64],
    a_row: &[f64],
    cover: &[usize],
    gain: &[usize],
) -> Option<f64> {
    let num: f64 = cover
        .iter()
        .map(|&s| (alpha * c[s] - a_row[s]).max(0.0))
        .sum();
    let den: f64 = gain
        .iter()
        .map(|&s| a_row[s] - (a_row[s] - alpha * c[s]).abs())
        .sum();
    (den > 0.0).then_some(num / den)
}

/// Expands the block `b c` with rows of `a` that are multiples of `c` on
/// enough columns and whose impact stays within `theta`.
pub fn add_rows(
    b: &[f64],
    c: &[f64],
    a: &NonNegMatrix,
    theta: f64,
    bucket_size: usize,
    delta: f64,
) -> Vec<f64> {
    (0..a.rows())
        .into_par_iter()
        .map(|i| {
            if b[i] != 0.0 {
                return b[i];
            }
            // missing entries read as zero and are excluded by find_row_set
            let row = a.row(i);
            let set = find_row_set(c, row, bucket_size, delta);
            if set.is_empty() {
                return 0.0;
            }
            let alpha = median(set.iter().map(|&s| row[s] / c[s]).collect());
            let mask = a.row_mask(i);
            let support: Vec<usize> = (0..c.len())
                .filter(|&s| c[s] > 0.0 && mask.is_none_or(|m| m[s]))
                .collect();
            match impact(alpha, c, row, &support, &set) {
                Some(psi) if psi <= theta => alpha,
                _ => 0.0,
            }
        })
        .collect()
}

/// Relative slack under which an entry still counts as covered, so that
/// rounding in recovered blocks does not re-expose them.
pub const COVER_TOLERANCE: f64 = 1e-9;

/// Uncovered part of `a`: entries the other blocks underestimate keep their
/// value, everything else (and everything missing in `a`) is missing. An entry
/// within [`COVER_TOLERANCE`] (relative) of `a` counts as covered.
pub fn residual(a: &NonNegMatrix, others: &NonNegMatrix) -> Result<NonNegMatrix> {
    a.check_same_shape("residual", others.shape())?;
    let (n, m) = a.shape();
    let mut entries = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            entries.push(match a.get(i, j) {
                Some(v) if others.value(i, j) < v * (1.0 - COVER_TOLERANCE) => Some(v),
                _ => None,
            });
        }
    }
    NonNegMatrix::from_options(n, m, entries)
}

impl Capricorn {
    pub fn update(
        &self,
        a: &NonNegMatrix,
        b: &NonNegMatrix,
        c: &NonNegMatrix,
        count: usize,
    ) -> Result<Block> {
        let p = &self.params;
        let (n, m) = a.shape();
        if count == 0 {
            return Err(Error::InvalidParameter("count starts at 1".into()));
        }
        let l = block_index(count, b.cols());
        let others = maxtimes_product_excluding(b, c, l)?;
        let r = residual(a, &others)?;

        let row_mass = (0..n).map(|i| r.row(i).iter().sum::<f64>());
        let seed = match argmax_by(row_mass) {
            Some(i) if r.row(i).iter().any(|&v| v > 0.0) => i,
            _ => return Ok(Block::zeros(n, m)),
        };

        let h = correlations_with_row(&r, seed, p.bucket_size, p.delta, p.tau);
        if h.count_ones() == 0 {
            return Ok(Block::zeros(n, m));
        }
        let top_row = argmax_by((0..n).map(|i| h.row_sum(i))).expect("n > 0");
        let top_col = argmax_by((0..m).map(|j| h.col_sum(j))).expect("m > 0");
        let b_idx: Vec<usize> = (0..n).filter(|&i| h.get(i, top_col)).collect();
        let c_idx: Vec<usize> = (0..m).filter(|&j| h.get(top_row, j)).collect();

        let mut core = recover_block(&r, &b_idx, &c_idx);
        core.b = refine_weights(&r, &core.b, &core.c, p.bucket_size, p.delta);
        let b_new = add_rows(&core.b, &core.c, a, p.theta, p.bucket_size, p.delta);
        let c_new = add_rows(
            &core.c,
            &b_new,
            &a.transpose(),
            p.theta,
            p.bucket_size,
            p.delta,
        );
        Ok(Block { b: b_new, c: c_new })
    }
}

impl BlockUpdater for Capricorn {
    fn name(&self) -> &'static str {
        "capricorn"
    }

    fn update_block(
        &self,
        a: &NonNegMatrix,
        b: &NonNegMatrix,
        c: &NonNegMatrix,
        count: usize,
        _rng: &mut dyn RngCore,
    ) -> Result<Block> {
        self.update(a, b, c, count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> NonNegMatrix {
        NonNegMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn defaults_match_published_settings() {
        let p = CapricornParams::default();
        assert_eq!(
            (p.bucket_size, p.delta, p.theta, p.tau),
            (3, 0.01, 0.5, 0.5)
        );
        assert!(p.validate().is_ok());
        assert!(CapricornParams { tau: 1.5, ..p }.validate().is_err());
        assert!(CapricornParams { delta: 0.0, ..p }.validate().is_err());
        assert!(CapricornParams {
            bucket_size: 0,
            ..p
        }
        .validate()
        .is_err());
    }

    #[test]
    fn row_set_isolates_outlier_ratio() {
        // log-ratios: -0.693 three times, then log 8 = 2.079
        let set = find_row_set(&[1.0, 2.0, 4.0, 8.0], &[2.0, 4.0, 8.0, 1.0], 3, 0.7);
        assert_eq!(set, vec![0, 1, 2]);
    }

    #[test]
    fn row_set_of_equal_vectors_is_support() {
        let u = [0.5, 0.0, 2.0, 1.0, 3.0];
        assert_eq!(find_row_set(&u, &u, 3, 0.01), vec![0, 2, 3, 4]);
        assert_eq!(find_row_set(&u, &u, 5, 0.01), Vec::<usize>::new());
    }

    #[test]
    fn row_set_too_small() {
        assert!(find_row_set(&[1.0, 2.0], &[3.0, 5.0], 3, 0.01).is_empty());
        assert!(find_row_set(&[0.0, 0.0], &[3.0, 5.0], 1, 0.01).is_empty());
    }

    #[test]
    fn correlation_by_hand() {
        assert_abs_diff_eq!(
            row_correlation(&[true, true, false], &[true, false, false]),
            1.0 / 3.0
        );
    }

    #[test]
    fn identical_rows_flag_common_support() {
        let r = m(&[&[1.0, 2.0, 0.0, 3.0], &[1.0, 2.0, 0.0, 3.0]]);
        let h = correlations_with_row(&r, 0, 3, 0.01, 1.0);
        let expected = PatternMatrix::from_rows(&[vec![1, 1, 0, 1], vec![1, 1, 0, 1]]).unwrap();
        assert_eq!(h, expected);
    }

    #[test]
    fn single_nonzero_row_gives_empty_pattern() {
        let r = m(&[&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        assert_eq!(correlations_with_row(&r, 0, 1, 0.01, 0.5).count_ones(), 0);
        let single = m(&[&[1.0, 2.0, 3.0]]);
        assert_eq!(
            correlations_with_row(&single, 0, 1, 0.01, 0.5).count_ones(),
            0
        );
    }

    #[test]
    fn weakly_correlated_rows_are_dropped() {
        // rows 0..2 share a block on columns 0..4; row 3 only matches on 3 columns
        let r = m(&[
            &[1.0, 2.0, 3.0, 4.0, 5.0, 0.0],
            &[0.5, 1.0, 1.5, 2.0, 2.5, 0.0],
            &[2.0, 4.0, 6.0, 8.0, 10.0, 0.0],
            &[0.3, 0.6, 0.9, 9.0, 9.0, 0.0],
        ]);
        let h = correlations_with_row(&r, 0, 3, 0.01, 0.05);
        assert_eq!(h.row_sum(0), 5);
        assert_eq!(h.row_sum(1), 5);
        assert_eq!(h.row_sum(2), 5);
        assert_eq!(h.row_sum(3), 0);
    }

    #[test]
    fn recover_block_closed_form() {
        let r = m(&[&[2.0, 4.0], &[1.0, 2.0]]);
        let blk = recover_block(&r, &[0, 1], &[0, 1]);
        assert_eq!(blk.c, vec![2.0, 4.0]);
        assert_eq!(blk.b, vec![1.0, 0.5]);
    }

    #[test]
    fn recover_block_ignores_outside_pattern() {
        let r = m(&[&[2.0, 4.0, 9.0], &[1.0, 2.0, 9.0], &[9.0, 9.0, 9.0]]);
        let blk = recover_block(&r, &[0, 1], &[0, 1]);
        assert_eq!(blk.b, vec![1.0, 0.5, 0.0]);
        assert_eq!(blk.c, vec![2.0, 4.0, 0.0]);
        assert_eq!(recover_block(&r, &[], &[0]), Block::zeros(3, 3));
    }

    /// Brute force: for each candidate row, fit every other row with the best
    /// scalar on a dense grid.
    fn grid_recover_error(sub: &[[f64; 3]; 3]) -> f64 {
        let mut best = f64::INFINITY;
        for c in sub.iter() {
            if c.iter().all(|&x| x == 0.0) {
                continue;
            }
            let mut total = 0.0;
            for row in sub.iter() {
                let mut row_best = f64::INFINITY;
                for g in 0..=40_000 {
                    let t = g as f64 * 1e-4;
                    let e: f64 = row.iter().zip(c).map(|(x, y)| (x - t * y).powi(2)).sum();
                    row_best = row_best.min(e);
                }
                total += row_best;
            }
            best = best.min(total);
        }
        best
    }

    #[test]
    fn recover_block_matches_grid_oracle() {
        let blocks = [
            [[0.5, 0.2, 0.9], [0.4, 0.1, 0.7], [0.8, 0.3, 0.2]],
            [[0.1, 0.6, 0.3], [0.9, 0.9, 0.1], [0.2, 0.5, 0.35]],
            [[1.0, 0.0, 0.4], [0.0, 0.7, 0.4], [0.3, 0.3, 0.3]],
        ];
        for sub in &blocks {
            let r = NonNegMatrix::new(3, 3, sub.iter().flatten().copied().collect()).unwrap();
            let blk = recover_block(&r, &[0, 1, 2], &[0, 1, 2]);
            let fit = NonNegMatrix::outer(&blk.b, &blk.c).unwrap();
            let err: f64 = r
                .values()
                .iter()
                .zip(fit.values())
                .map(|(x, y)| (x - y).powi(2))
                .sum();
            let oracle = grid_recover_error(sub);
            assert!(err <= oracle + 1e-9, "err {err} oracle {oracle}");
            assert!(err >= oracle - 1e-6, "err {err} oracle {oracle}");
        }
    }

    #[test]
    fn impact_examples() {
        assert_eq!(
            impact(1.0, &[1.0, 2.0], &[1.0, 2.0], &[0, 1], &[0, 1]),
            Some(0.0)
        );
        assert_eq!(impact(2.0, &[1.0], &[1.0], &[0], &[0]), None);
    }

    #[test]
    fn add_rows_takes_exact_multiple() {
        let a = m(&[
            &[1.0, 2.0, 3.0, 0.0],
            &[0.5, 1.0, 1.5, 0.0],
            &[5.0, 0.1, 7.0, 0.0],
        ]);
        let c = [1.0, 2.0, 3.0, 0.0];
        let b = add_rows(&[1.0, 0.0, 0.0], &c, &a, 0.5, 3, 0.01);
        assert_eq!(b[0], 1.0);
        assert_abs_diff_eq!(b[1], 0.5, epsilon = 1e-15);
        assert_eq!(b[2], 0.0);
    }

    #[test]
    fn add_rows_rejects_overcovering_rows() {
        // one wide bucket: alpha = median(0.2, 1, 1.5) = 1, impact = 0.8 / 1.4
        let a = m(&[&[1.0, 1.0, 1.0], &[0.2, 1.0, 1.5]]);
        let c = [1.0, 1.0, 1.0];
        let b = add_rows(&[1.0, 0.0], &c, &a, 0.5, 3, 3.0);
        assert_eq!(b[1], 0.0);
        let b = add_rows(&[1.0, 0.0], &c, &a, 0.6, 3, 3.0);
        assert_eq!(b[1], 1.0);
    }

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn refine_weights_ignores_dominated_entries() {
        // row 1 is 2 c except where another block pushed the entry to 9
        let r = m(&[
            &[1.0, 2.0, 3.0, 4.0],
            &[2.0, 4.0, 6.0, 9.0],
            &[5.0, 0.0, 0.0, 0.0],
        ]);
        let c = [1.0, 2.0, 3.0, 4.0];
        let b = refine_weights(&r, &[1.0, 2.7, 0.3], &c, 3, 0.01);
        assert_eq!(b[0], 1.0);
        assert_eq!(b[1], 2.0);
        // no bucket of 3 columns: weight kept
        assert_eq!(b[2], 0.3);
        assert_eq!(refine_weights(&r, &[0.0; 3], &c, 3, 0.01), vec![0.0; 3]);
    }

    #[test]
    fn residual_treats_near_cover_as_covered() {
        let a = m(&[&[1.0, 1.0]]);
        let others = m(&[&[1.0 - 1e-12, 1.0 - 1e-6]]);
        let r = residual(&a, &others).unwrap();
        assert_eq!(r.get(0, 0), None);
        assert_eq!(r.get(0, 1), Some(1.0));
    }

    #[test]
    fn residual_masks_covered_and_missing() {
        let a = NonNegMatrix::from_options(1, 3, vec![Some(1.0), Some(2.0), None]).unwrap();
        let others = m(&[&[1.0, 0.5, 0.0]]);
        let r = residual(&a, &others).unwrap();
        assert_eq!(r.get(0, 0), None);
        assert_eq!(r.get(0, 1), Some(2.0));
        assert_eq!(r.get(0, 2), None);
    }

    #[test]
    fn update_recovers_exact_rank_one() {
        let b0 = [1.0, 0.5, 0.25, 0.0, 0.8];
        let c0 = [0.2, 0.4, 0.6, 0.8, 0.0, 0.3];
        let a = NonNegMatrix::outer(&b0, &c0).unwrap();
        let cap = Capricorn::default();
        let blk = cap
            .update(
                &a,
                &NonNegMatrix::zeros(5, 1),
                &NonNegMatrix::zeros(1, 6),
                1,
            )
            .unwrap();
        let rec = NonNegMatrix::outer(&blk.b, &blk.c).unwrap();
        for (x, y) in rec.values().iter().zip(a.values()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn update_on_zero_or_covered_data_is_zero() {
        let cap = Capricorn::default();
        let a = NonNegMatrix::zeros(4, 5);
        let blk = cap
            .update(
                &a,
                &NonNegMatrix::zeros(4, 2),
                &NonNegMatrix::zeros(2, 5),
                1,
            )
            .unwrap();
        assert!(blk.b.iter().chain(&blk.c).all(|&x| x == 0.0));

        let a = NonNegMatrix::outer(&[1.0, 0.5, 0.2, 0.7], &[0.3, 0.9, 0.4, 0.6, 0.8]).unwrap();
        let big_b = NonNegMatrix::new(4, 2, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let big_c = NonNegMatrix::new(2, 5, vec![0.0; 5].into_iter().chain(vec![1.0; 5]).collect())
            .unwrap();
        let blk = cap.update(&a, &big_b, &big_c, 1).unwrap();
        assert!(blk.b.iter().chain(&blk.c).all(|&x| x == 0.0));
    }

    fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(prop_oneof![Just(0.0), 0.01f64..10.0], len)
    }

    proptest! {
        #[test]
        fn row_set_size_and_width(u in vec_strategy(20), v in vec_strategy(20), bs in 1usize..5, delta in 0.01f64..1.0) {
            let set = find_row_set(&u, &v, bs, delta);
            prop_assert!(set.is_empty() || set.len() >= bs);
            if !set.is_empty() {
                let logs: Vec<f64> = set.iter().map(|&i| (u[i] / v[i]).ln()).collect();
                let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(hi - lo <= delta + 1e-12);
            }
        }

        #[test]
        fn recover_block_is_stationary_in_each_weight(vals in proptest::collection::vec(0.01f64..1.0, 12)) {
            let r = NonNegMatrix::new(3, 4, vals).unwrap();
            let blk = recover_block(&r, &[0, 1, 2], &[0, 1, 2, 3]);
            let row_err = |i: usize, t: f64| -> f64 {
                (0..4).map(|j| (r.value(i, j) - t * blk.c[j]).powi(2)).sum()
            };
            for i in 0..3 {
                let base = row_err(i, blk.b[i]);
                for eps in [1e-4, -1e-4, 1e-2, -1e-2] {
                    prop_assert!(row_err(i, blk.b[i] * (1.0 + eps)) >= base - 1e-12);
                }
            }
        }

        #[test]
        fn update_is_nonnegative(vals in proptest::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], 42)) {
            let a = NonNegMatrix::new(6, 7, vals).unwrap();
            let blk = Capricorn::default()
                .update(&a, &NonNegMatrix::zeros(6, 2), &NonNegMatrix::zeros(2, 7), 2)
                .unwrap();
            prop_assert!(blk.b.iter().chain(&blk.c).all(|&x| x >= 0.0 && x.is_finite()));
        }
    }
}
