//! Dense nonnegative matrices with an optional observation mask, the
//! max-times product and the pattern / dominance / sparsity utilities built
//! on top of it.
//!
//! Storage is row-major: `values[i * cols + j]` holds entry `(i, j)`.
//! Missing entries are tracked by the mask; their slot in `values` is kept
//! at `0.0` and never read as data.

mod io;

pub use io::{read_csv, read_mask_csv, write_csv, write_mask_csv};

use crate::error::{Error, Result};

/// Dense row-major nonnegative matrix with optional missing entries.
#[derive(Debug, Clone, PartialEq)]
pub struct NonNegMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    /// `true` = observed. `None` means every entry is observed.
    mask: Option<Vec<bool>>,
}

/// Row-major binary matrix. Used for patterns, holdout sets and
/// observation masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

/// Binary indicator of a matrix's nonzero entries.
pub type PatternMatrix = BinaryMatrix;

/// Set of matrix positions, e.g. a holdout set.
pub type ObservationMask = BinaryMatrix;

fn check_value(row: usize, col: usize, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidValue { row, col, value })
    }
}

impl NonNegMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidLength {
                rows,
                cols,
                got: values.len(),
            });
        }
        for (idx, &v) in values.iter().enumerate() {
            check_value(idx / cols.max(1), idx % cols.max(1), v)?;
        }
        Ok(Self {
            rows,
            cols,
            values,
            mask: None,
        })
    }

    /// Builds a matrix from optional entries; `None` marks a missing entry.
    pub fn from_options(rows: usize, cols: usize, entries: Vec<Option<f64>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidLength {
                rows,
                cols,
                got: entries.len(),
            });
        }
        let mut values = Vec::with_capacity(entries.len());
        let mut mask = Vec::with_capacity(entries.len());
        for (idx, e) in entries.into_iter().enumerate() {
            match e {
                Some(v) => {
                    check_value(idx / cols, idx % cols, v)?;
                    values.push(v);
                    mask.push(true);
                }
                None => {
                    values.push(0.0);
                    mask.push(false);
                }
            }
        }
        let mut m = Self {
            rows,
            cols,
            values,
            mask: Some(mask),
        };
        m.normalize_mask();
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * m);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(Error::DimensionMismatch {
                    op: "from_rows",
                    expected: (n, m),
                    got: (i, r.len()),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(n, m, values)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
            mask: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    /// Outer product `b c` of a column and a row vector.
    pub fn outer(b: &[f64], c: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(b.len() * c.len());
        for &bi in b {
            values.extend(c.iter().map(|&cj| bi * cj));
        }
        Self::new(b.len(), c.len(), values)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Entry `(i, j)`, or `None` if it is missing.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let idx = i * self.cols + j;
        if self.observed_at(idx) {
            Some(self.values[idx])
        } else {
            None
        }
    }

    /// Entry `(i, j)` with missing entries read as zero.
    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    #[inline]
    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.observed_at(i * self.cols + j)
    }

    #[inline]
    fn observed_at(&self, idx: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[idx])
    }

    /// Row `i` with missing entries read as zero.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` copied out, missing entries read as zero.
    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.value(i, j)).collect()
    }

    /// Raw row-major values; missing slots hold zero.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    /// Observation flags of row `i`, or `None` when the matrix is fully observed.
    pub fn row_mask(&self, i: usize) -> Option<&[bool]> {
        self.mask
            .as_ref()
            .map(|m| &m[i * self.cols..(i + 1) * self.cols])
    }

    pub fn is_fully_observed(&self) -> bool {
        self.mask.is_none()
    }

    pub fn observed_count(&self) -> usize {
        match &self.mask {
            None => self.values.len(),
            Some(m) => m.iter().filter(|&&b| b).count(),
        }
    }

    /// Number of observed nonzero entries.
    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        check_value(i, j, value)?;
        let idx = i * self.cols + j;
        self.values[idx] = value;
        if let Some(m) = &mut self.mask {
            m[idx] = true;
        }
        self.normalize_mask();
        Ok(())
    }

    /// Marks entry `(i, j)` as missing.
    pub fn set_missing(&mut self, i: usize, j: usize) {
        let idx = i * self.cols + j;
        let len = self.values.len();
        self.mask.get_or_insert_with(|| vec![true; len])[idx] = false;
        self.values[idx] = 0.0;
    }

    /// Copy with every position set in `holdout` marked missing.
    pub fn with_missing(&self, holdout: &ObservationMask) -> Result<Self> {
        self.check_same_shape("with_missing", holdout.shape())?;
        let mut out = self.clone();
        for (idx, &h) in holdout.bits.iter().enumerate() {
            if h {
                out.set_missing(idx / self.cols, idx % self.cols);
            }
        }
        Ok(out)
    }

    pub fn column_vector(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn row_vector(values: &[f64]) -> Result<Self> {
        Self::new(1, values.len(), values.to_vec())
    }

    /// Overwrites column `j`. The matrix must be fully observed afterwards.
    pub fn set_col(&mut self, j: usize, col: &[f64]) -> Result<()> {
        if col.len() != self.rows {
            return Err(Error::DimensionMismatch {
                op: "set_col",
                expected: (self.rows, 1),
                got: (col.len(), 1),
            });
        }
        for (i, &v) in col.iter().enumerate() {
            check_value(i, j, v)?;
        }
        for (i, &v) in col.iter().enumerate() {
            self.values[i * self.cols + j] = v;
        }
        Ok(())
    }

    pub fn set_row(&mut self, i: usize, row: &[f64]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "set_row",
                expected: (1, self.cols),
                got: (1, row.len()),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            check_value(i, j, v)?;
        }
        self.values[i * self.cols..(i + 1) * self.cols].copy_from_slice(row);
        Ok(())
    }

    /// Largest observed value (0 for an empty or all-missing matrix).
    pub fn max_observed(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every entry by `factor` (must be finite and nonnegative).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        check_value(0, 0, factor)?;
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= factor;
        }
        Ok(out)
    }

    /// Elementwise map over observed entries; missing entries stay missing.
    pub fn map_observed(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = self.clone();
        for (idx, v) in out.values.iter_mut().enumerate() {
            if self.observed_at(idx) {
                *v = f(*v);
                check_value(idx / self.cols, idx % self.cols, *v)?;
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut values = vec![0.0; self.values.len()];
        let mut mask = self.mask.as_ref().map(|_| vec![true; self.values.len()]);
        for i in 0..self.rows {
            for j in 0..self.cols {
                values[j * self.rows + i] = self.values[i * self.cols + j];
                if let (Some(dst), Some(src)) = (&mut mask, &self.mask) {
                    dst[j * self.rows + i] = src[i * self.cols + j];
                }
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            values,
            mask,
        }
    }

    fn normalize_mask(&mut self) {
        if self.mask.as_ref().is_some_and(|m| m.iter().all(|&b| b)) {
            self.mask = None;
        }
    }

    pub(crate) fn check_same_shape(&self, op: &'static str, other: (usize, usize)) -> Result<()> {
        if self.shape() != other {
            return Err(Error::DimensionMismatch {
                op,
                expected: self.shape(),
                got: other,
            });
        }
        Ok(())
    }

    fn require_full(&self, op: &'static str) -> Result<()> {
        if self.is_fully_observed() {
            Ok(())
        } else {
            Err(Error::MissingEntries(op))
        }
    }
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bits: vec![false; rows * cols],
        }
    }

    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::InvalidLength {
                rows,
                cols,
                got: bits.len(),
            });
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut bits = Vec::with_capacity(n * m);
        for r in rows {
            if r.len() != m {
                return Err(Error::DimensionMismatch {
                    op: "from_rows",
                    expected: (n, m),
                    got: (n, r.len()),
                });
            }
            bits.extend(r.iter().map(|&b| b != 0));
        }
        Self::new(n, m, bits)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        self.bits[i * self.cols + j] = bit;
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.bits[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [bool] {
        &mut self.bits[i * self.cols..(i + 1) * self.cols]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn row_sum(&self, i: usize) -> usize {
        self.row(i).iter().filter(|&&b| b).count()
    }

    pub fn col_sum(&self, j: usize) -> usize {
        (0..self.rows).filter(|&i| self.get(i, j)).count()
    }

    /// Positions `(i, j)` that are set, in row-major order.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(idx, _)| (idx / self.cols, idx % self.cols))
    }

    /// Boolean matrix product `(B ∘ C)_ij = OR_s B_is AND C_sj`.
    pub fn boolean_product(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "boolean_product",
                expected: (self.cols, other.cols),
                got: other.shape(),
            });
        }
        let mut out = BinaryMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for s in 0..self.cols {
                if self.get(i, s) {
                    for j in 0..other.cols {
                        if other.get(s, j) {
                            out.set(i, j, true);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// 0/1 matrix with the same shape.
    pub fn to_matrix(&self) -> NonNegMatrix {
        NonNegMatrix {
            rows: self.rows,
            cols: self.cols,
            values: self
                .bits
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
            mask: None,
        }
    }
}

/// Max-times product: `(B ⊠ C)_ij = max_s B_is * C_sj`.
pub fn maxtimes_product(b: &NonNegMatrix, c: &NonNegMatrix) -> Result<NonNegMatrix> {
    maxtimes_product_skipping(b, c, None)
}

/// Max-times product of the factors with block `block` (1-based) removed.
///
/// For a rank-1 factorization this is the all-zero matrix.
pub fn maxtimes_product_excluding(
    b: &NonNegMatrix,
    c: &NonNegMatrix,
    block: usize,
) -> Result<NonNegMatrix> {
    let rank = b.cols();
    if block == 0 || block > rank {
        return Err(Error::IndexOutOfRange {
            index: block,
            max: rank,
        });
    }
    maxtimes_product_skipping(b, c, Some(block - 1))
}

fn maxtimes_product_skipping(
    b: &NonNegMatrix,
    c: &NonNegMatrix,
    skip: Option<usize>,
) -> Result<NonNegMatrix> {
    if b.cols != c.rows {
        return Err(Error::DimensionMismatch {
            op: "maxtimes_product",
            expected: (b.cols, c.cols),
            got: c.shape(),
        });
    }
    b.require_full("maxtimes_product")?;
    c.require_full("maxtimes_product")?;
    let (n, k, m) = (b.rows, b.cols, c.cols);
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        let dst = &mut out[i * m..(i + 1) * m];
        for s in 0..k {
            if Some(s) == skip {
                continue;
            }
            let bis = b.values[i * k + s];
            if bis == 0.0 {
                continue;
            }
            let crow = &c.values[s * m..(s + 1) * m];
            for (d, &csj) in dst.iter_mut().zip(crow) {
                let p = bis * csj;
                if p > *d {
                    *d = p;
                }
            }
        }
    }
    Ok(NonNegMatrix {
        rows: n,
        cols: m,
        values: out,
        mask: None,
    })
}

/// Pattern of a fully observed matrix: bit set iff the entry is nonzero.
pub fn pattern(a: &NonNegMatrix) -> Result<PatternMatrix> {
    a.require_full("pattern")?;
    Ok(BinaryMatrix {
        rows: a.rows,
        cols: a.cols,
        bits: a.values.iter().map(|&v| v != 0.0).collect(),
    })
}

/// Whether `x` dominates `a` (`x_ij >= a_ij`) within `region`.
///
/// Without a region, every position observed in both matrices is checked.
/// Positions in the region that are missing in either matrix are skipped.
pub fn dominates(
    x: &NonNegMatrix,
    a: &NonNegMatrix,
    region: Option<&BinaryMatrix>,
) -> Result<bool> {
    x.check_same_shape("dominates", a.shape())?;
    if let Some(r) = region {
        x.check_same_shape("dominates", r.shape())?;
    }
    for idx in 0..x.values.len() {
        if region.is_some_and(|r| !r.bits[idx]) {
            continue;
        }
        if x.observed_at(idx) && a.observed_at(idx) && x.values[idx] < a.values[idx] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fraction of zero entries, `(nm - nnz) / nm`.
pub fn sparsity(a: &NonNegMatrix) -> Result<f64> {
    a.require_full("sparsity")?;
    let total = a.values.len();
    if total == 0 {
        return Err(Error::Undefined("sparsity of an empty matrix".into()));
    }
    Ok((total - a.nnz()) as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> NonNegMatrix {
        NonNegMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn example_factors() -> (NonNegMatrix, NonNegMatrix) {
        (
            m(&[&[1.0, 0.0], &[2.0, 1.0], &[0.0, 2.0]]),
            m(&[&[1.0, 2.0, 0.0], &[0.0, 2.0, 1.0]]),
        )
    }

    #[test]
    fn rank_two_example_product() {
        let (b, c) = example_factors();
        let a = maxtimes_product(&b, &c).unwrap();
        assert_eq!(
            a,
            m(&[&[1.0, 2.0, 0.0], &[2.0, 4.0, 1.0], &[0.0, 4.0, 2.0]])
        );
    }

    #[test]
    fn identity_product_is_noop() {
        let c = m(&[&[0.3, 1.0, 2.0], &[4.0, 0.0, 0.5]]);
        assert_eq!(maxtimes_product(&NonNegMatrix::identity(2), &c).unwrap(), c);
    }

    #[test]
    fn small_product_by_hand() {
        let b = m(&[&[1.0, 0.5], &[0.0, 2.0]]);
        let c = m(&[&[0.2, 1.0], &[1.0, 0.4]]);
        assert_eq!(
            maxtimes_product(&b, &c).unwrap(),
            m(&[&[0.5, 1.0], &[2.0, 0.8]])
        );
    }

    #[test]
    fn product_rejects_bad_shapes_and_missing() {
        let b = NonNegMatrix::zeros(2, 3);
        let c = NonNegMatrix::zeros(2, 2);
        assert!(matches!(
            maxtimes_product(&b, &c),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut c = NonNegMatrix::zeros(3, 2);
        c.set_missing(0, 0);
        assert!(matches!(
            maxtimes_product(&b, &c),
            Err(Error::MissingEntries(_))
        ));
    }

    #[test]
    fn excluding_last_block_of_example() {
        let (b, c) = example_factors();
        let n = maxtimes_product_excluding(&b, &c, 2).unwrap();
        assert_eq!(
            n,
            m(&[&[1.0, 2.0, 0.0], &[2.0, 4.0, 0.0], &[0.0, 0.0, 0.0]])
        );
        assert!(maxtimes_product_excluding(&b, &c, 0).is_err());
        assert!(maxtimes_product_excluding(&b, &c, 3).is_err());
    }

    #[test]
    fn excluding_only_block_gives_zero() {
        let b = m(&[&[1.0], &[2.0]]);
        let c = m(&[&[3.0, 4.0]]);
        assert_eq!(
            maxtimes_product_excluding(&b, &c, 1).unwrap(),
            NonNegMatrix::zeros(2, 2)
        );
    }

    #[test]
    fn excluding_matches_explicit_deletion() {
        let b = m(&[
            &[0.1, 0.9, 0.4],
            &[0.7, 0.0, 0.2],
            &[0.3, 0.5, 0.8],
            &[0.0, 0.6, 0.1],
        ]);
        let c = m(&[&[0.5, 0.2, 0.9], &[0.1, 0.8, 0.3], &[0.7, 0.4, 0.6]]);
        for l in 1..=3 {
            let keep: Vec<usize> = (0..3).filter(|&s| s != l - 1).collect();
            let b2 = NonNegMatrix::new(
                4,
                2,
                (0..4)
                    .flat_map(|i| keep.iter().map(move |&s| (i, s)))
                    .map(|(i, s)| b.value(i, s))
                    .collect(),
            )
            .unwrap();
            let c2 = NonNegMatrix::new(
                2,
                3,
                keep.iter()
                    .flat_map(|&s| (0..3).map(move |j| (s, j)))
                    .map(|(s, j)| c.value(s, j))
                    .collect(),
            )
            .unwrap();
            assert_eq!(
                maxtimes_product_excluding(&b, &c, l).unwrap(),
                maxtimes_product(&b2, &c2).unwrap()
            );
        }
    }

    #[test]
    fn pattern_examples() {
        let p = pattern(&m(&[&[0.0, 2.0], &[3.0, 0.0]])).unwrap();
        assert_eq!(
            p,
            BinaryMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap()
        );
        assert_eq!(pattern(&NonNegMatrix::zeros(2, 3)).unwrap().count_ones(), 0);
        let mut a = NonNegMatrix::zeros(1, 1);
        a.set_missing(0, 0);
        assert!(pattern(&a).is_err());
    }

    #[test]
    fn dominance_examples() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!(dominates(&a, &a, None).unwrap());
        let mut x = a.clone();
        x.set(1, 0, 3.0 - 1e-9).unwrap();
        assert!(!dominates(&x, &a, None).unwrap());
        let mut region = BinaryMatrix::zeros(2, 2);
        region.set(0, 0, true);
        region.set(0, 1, true);
        region.set(1, 1, true);
        assert!(dominates(&x, &a, Some(&region)).unwrap());
        assert!(dominates(&x, &NonNegMatrix::zeros(2, 3), None).is_err());
    }

    #[test]
    fn sparsity_examples() {
        assert_eq!(sparsity(&m(&[&[0.0, 1.0], &[1.0, 1.0]])).unwrap(), 0.25);
        assert_eq!(sparsity(&NonNegMatrix::zeros(3, 2)).unwrap(), 1.0);
        assert_eq!(sparsity(&m(&[&[0.1, 2.0]])).unwrap(), 0.0);
    }

    #[test]
    fn transpose_examples() {
        let a = m(&[&[1.0, 2.0]]);
        assert_eq!(a.transpose(), m(&[&[1.0], &[2.0]]));
        let mut b = m(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        b.set_missing(0, 2);
        let t = b.transpose();
        assert_eq!(t.get(2, 0), None);
        assert_eq!(t.get(0, 1), Some(4.0));
        assert_eq!(t.transpose(), b);
    }

    #[test]
    fn construction_rejects_bad_values() {
        assert!(NonNegMatrix::new(1, 2, vec![1.0, -0.5]).is_err());
        assert!(NonNegMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(NonNegMatrix::new(1, 2, vec![1.0]).is_err());
        let a = NonNegMatrix::from_options(1, 2, vec![Some(1.0), None]).unwrap();
        assert_eq!(a.observed_count(), 1);
        let full = NonNegMatrix::from_options(1, 2, vec![Some(1.0), Some(2.0)]).unwrap();
        assert!(full.is_fully_observed());
    }

    fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = NonNegMatrix> {
        proptest::collection::vec(
            prop_oneof![Just(0.0), (1u32..1000).prop_map(|x| f64::from(x) / 100.0)],
            rows * cols,
        )
        .prop_map(move |v| NonNegMatrix::new(rows, cols, v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn product_dominates_every_term(b in small_matrix(5, 4), c in small_matrix(4, 3)) {
            let a = maxtimes_product(&b, &c).unwrap();
            for i in 0..5 {
                for j in 0..3 {
                    for s in 0..4 {
                        prop_assert!(a.value(i, j) >= b.value(i, s) * c.value(s, j));
                    }
                }
            }
        }

        #[test]
        fn product_is_monotone(
            b in small_matrix(4, 3),
            c in small_matrix(3, 4),
            i in 0usize..4, s in 0usize..3, bump in 0.0f64..2.0,
        ) {
            let a = maxtimes_product(&b, &c).unwrap();
            let mut b2 = b.clone();
            b2.set(i, s, b.value(i, s) + bump).unwrap();
            let a2 = maxtimes_product(&b2, &c).unwrap();
            prop_assert!(dominates(&a2, &a, None).unwrap());
        }

        #[test]
        fn pattern_commutes_with_boolean_product(b in small_matrix(5, 4), c in small_matrix(4, 3)) {
            let lhs = pattern(&maxtimes_product(&b, &c).unwrap()).unwrap();
            let pb = pattern(&b).unwrap();
            let pc = pattern(&c).unwrap();
            // brute-force Boolean product
            let mut rhs = BinaryMatrix::zeros(5, 3);
            for i in 0..5 {
                for j in 0..3 {
                    rhs.set(i, j, (0..4).any(|s| pb.get(i, s) && pc.get(s, j)));
                }
            }
            prop_assert_eq!(&lhs, &rhs);
            prop_assert_eq!(lhs, pb.boolean_product(&pc).unwrap());
        }

        #[test]
        fn sparsity_in_unit_interval_and_scale_invariant(a in small_matrix(4, 5), scale in 0.01f64..100.0) {
            let s = sparsity(&a).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(s, sparsity(&a.scaled(scale).unwrap()).unwrap());
        }
    }
}
