//! Brute-force references for testing. Nothing here calls into the
//! factorization code; arithmetic is redone from scratch on purpose.

use crate::error::{Error, Result};
use crate::matrix::{BinaryMatrix, NonNegMatrix};
use crate::objective::AdditiveObjective;

fn cost(obj: AdditiveObjective, a: f64, r: f64) -> f64 {
    match obj {
        AdditiveObjective::FrobeniusSq => (a - r).powi(2),
        AdditiveObjective::L1 => (a - r).abs(),
        AdditiveObjective::JensenShannon => {
            let m = 0.5 * (a + r);
            let kl = |p: f64| if p > 0.0 { p * (p / m).ln() } else { 0.0 };
            if m > 0.0 {
                (kl(a) + kl(r)).max(0.0)
            } else {
                0.0
            }
        }
    }
}

/// `γ(x) = Σ φ(a_i, max(n_i, b_i x))` evaluated directly.
pub fn gamma(a_col: &[f64], n_col: &[f64], b: &[f64], obj: AdditiveObjective, x: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..a_col.len() {
        let bx = b[i] * x;
        let r = if bx > n_col[i] { bx } else { n_col[i] };
        total += cost(obj, a_col[i], r);
    }
    total
}

/// Best of `grid_points` equispaced points on `[0, 1]`; returns `(γ(x*), x*)`,
/// the lowest `x` winning ties.
pub fn grid_min_gamma(
    a_col: &[f64],
    n_col: &[f64],
    b: &[f64],
    obj: AdditiveObjective,
    grid_points: usize,
) -> Result<(f64, f64)> {
    if grid_points < 2 {
        return Err(Error::InvalidParameter(
            "grid needs at least 2 points".into(),
        ));
    }
    if a_col.len() != n_col.len() || a_col.len() != b.len() {
        return Err(Error::InvalidParameter(
            "column vectors differ in length".into(),
        ));
    }
    let mut best = (f64::INFINITY, 0.0);
    for g in 0..grid_points {
        let x = g as f64 / (grid_points - 1) as f64;
        let v = gamma(a_col, n_col, b, obj, x);
        if v < best.0 {
            best = (v, x);
        }
    }
    Ok(best)
}

/// `(min, max)` of `γ` over the same grid.
pub fn grid_range_gamma(
    a_col: &[f64],
    n_col: &[f64],
    b: &[f64],
    obj: AdditiveObjective,
    grid_points: usize,
) -> (f64, f64) {
    (0..grid_points)
        .map(|g| gamma(a_col, n_col, b, obj, g as f64 / (grid_points - 1) as f64))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Smallest `k` with binary `B`, `C` such that `B ⊠ C = A`, by enumerating
/// `k` distinct nonempty column patterns for the rows of `C`, taking the
/// largest compatible `B`, and comparing the max-times product in `f64`.
pub fn exhaustive_subtropical_rank_binary(a: &BinaryMatrix) -> Result<usize> {
    let (n, m) = a.shape();
    if n > 4 || m > 4 {
        return Err(Error::InvalidParameter(format!(
            "exhaustive rank limited to 4x4, got {n}x{m}"
        )));
    }
    if a.count_ones() == 0 {
        return Ok(0);
    }
    let target: Vec<f64> = a
        .bits()
        .iter()
        .map(|&x| if x { 1.0 } else { 0.0 })
        .collect();
    let patterns: Vec<u32> = (1..(1u32 << m)).collect();
    for k in 1..=n.min(m) {
        for pick in combinations(patterns.len(), k) {
            let c: Vec<Vec<f64>> = pick
                .iter()
                .map(|&p| (0..m).map(|j| f64::from((patterns[p] >> j) & 1)).collect())
                .collect();
            // B_il = 1 iff row i of A covers pattern l
            let b: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    c.iter()
                        .map(|cl| {
                            let fits = (0..m).all(|j| cl[j] <= target[i * m + j]);
                            if fits {
                                1.0
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            let equal = (0..n).all(|i| {
                (0..m).all(|j| {
                    let v = (0..k).map(|l| b[i][l] * c[l][j]).fold(0.0, f64::max);
                    v == target[i * m + j]
                })
            });
            if equal {
                return Ok(k);
            }
        }
    }
    Ok(n.min(m))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityCheck {
    pub holds: bool,
    /// `s(B) + s(C) − s(A)`.
    pub slack: f64,
}

fn zero_fraction(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v == 0.0).count() as f64 / values.len() as f64
}

/// Checks `s(B) + s(C) ≥ s(A)` for a decomposition dominated by `A`
/// (default: `A = B ⊠ C`).
pub fn check_sparsity_bound(
    b: &NonNegMatrix,
    c: &NonNegMatrix,
    a: Option<&NonNegMatrix>,
) -> Result<SparsityCheck> {
    let (n, k) = b.shape();
    let (k2, m) = c.shape();
    if k != k2 {
        return Err(Error::DimensionMismatch {
            op: "check_sparsity_bound",
            expected: (k, m),
            got: (k2, m),
        });
    }
    let mut product = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            for l in 0..k {
                let v = b.value(i, l) * c.value(l, j);
                if v > product[i * m + j] {
                    product[i * m + j] = v;
                }
            }
        }
    }
    let a_vals: Vec<f64> = match a {
        Some(a) => {
            if a.shape() != (n, m) {
                return Err(Error::DimensionMismatch {
                    op: "check_sparsity_bound",
                    expected: (n, m),
                    got: a.shape(),
                });
            }
            let vals: Vec<f64> = (0..n * m).map(|p| a.value(p / m, p % m)).collect();
            if let Some(p) = (0..n * m).find(|&p| product[p] > vals[p]) {
                return Err(Error::Precondition(format!(
                    "B ⊠ C exceeds A at ({}, {})",
                    p / m,
                    p % m
                )));
            }
            vals
        }
        None => product,
    };
    let b_vals: Vec<f64> = (0..n * k).map(|p| b.value(p / k, p % k)).collect();
    let c_vals: Vec<f64> = (0..k * m).map(|p| c.value(p / m, p % m)).collect();
    let slack = zero_fraction(&b_vals) + zero_fraction(&c_vals) - zero_fraction(&a_vals);
    Ok(SparsityCheck {
        holds: slack >= -1e-12,
        slack,
    })
}

/// Extended real `ℝ ∪ {−∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxPlus {
    NegInf,
    Finite(f64),
}

impl MaxPlus {
    fn max(self, other: Self) -> Self {
        match (self, other) {
            (Self::NegInf, x) | (x, Self::NegInf) => x,
            (Self::Finite(x), Self::Finite(y)) => Self::Finite(x.max(y)),
        }
    }

    fn times(self, other: Self) -> Self {
        match (self, other) {
            (Self::Finite(x), Self::Finite(y)) => Self::Finite(x + y),
            _ => Self::NegInf,
        }
    }

    /// `exp`, with `exp(−∞) = 0`.
    pub fn exp(self) -> f64 {
        match self {
            Self::NegInf => 0.0,
            Self::Finite(x) => x.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxPlusMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<MaxPlus>,
}

impl MaxPlusMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<MaxPlus>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidLength {
                rows,
                cols,
                got: values.len(),
            });
        }
        if let Some(MaxPlus::Finite(v)) = values
            .iter()
            .find(|v| matches!(v, MaxPlus::Finite(x) if !x.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "max-plus entry {v} must be finite or bottom"
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn get(&self, i: usize, j: usize) -> MaxPlus {
        self.values[i * self.cols + j]
    }

    /// `(B ⊞ C)_ij = max_d (B_id + C_dj)`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "maxplus product",
                expected: (self.cols, other.cols),
                got: (other.rows, other.cols),
            });
        }
        let mut values = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                values.push(
                    (0..self.cols)
                        .map(|d| self.get(i, d).times(other.get(d, j)))
                        .fold(MaxPlus::NegInf, MaxPlus::max),
                );
            }
        }
        Self::new(self.rows, other.cols, values)
    }
}

/// `‖A − B ⊞ C‖_F²` with `(−∞) − (−∞) = 0`; infinite when exactly one side of
/// some entry is `−∞`.
pub fn maxplus_error_sq(a: &MaxPlusMatrix, b: &MaxPlusMatrix, c: &MaxPlusMatrix) -> Result<f64> {
    let p = b.product(c)?;
    if (p.rows, p.cols) != (a.rows, a.cols) {
        return Err(Error::DimensionMismatch {
            op: "maxplus_error_sq",
            expected: (a.rows, a.cols),
            got: (p.rows, p.cols),
        });
    }
    Ok(a.values
        .iter()
        .zip(&p.values)
        .map(|(x, y)| match (x, y) {
            (MaxPlus::NegInf, MaxPlus::NegInf) => 0.0,
            (MaxPlus::Finite(x), MaxPlus::Finite(y)) => (x - y).powi(2),
            _ => f64::INFINITY,
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCheck {
    pub holds: bool,
    /// `‖exp A − exp B ⊠ exp C‖_F²`.
    pub lhs: f64,
    /// `M² λ`.
    pub rhs: f64,
}

/// Given `‖A − B ⊞ C‖_F² ≤ λ`, checks `‖e^A − e^B ⊠ e^C‖_F² ≤ M² λ`.
pub fn check_maxplus_transfer(
    a: &MaxPlusMatrix,
    b: &MaxPlusMatrix,
    c: &MaxPlusMatrix,
    lambda: f64,
) -> Result<TransferCheck> {
    let p = b.product(c)?;
    if (p.rows, p.cols) != (a.rows, a.cols) {
        return Err(Error::DimensionMismatch {
            op: "check_maxplus_transfer",
            expected: (a.rows, a.cols),
            got: (p.rows, p.cols),
        });
    }
    let top = a
        .values
        .iter()
        .chain(&p.values)
        .copied()
        .fold(MaxPlus::NegInf, MaxPlus::max);
    let big_m = top.exp();
    let (n, m, k) = (b.rows, c.cols, b.cols);
    let mut lhs = 0.0;
    for i in 0..n {
        for j in 0..m {
            let mut r = 0.0f64;
            for d in 0..k {
                r = r.max(b.get(i, d).exp() * c.get(d, j).exp());
            }
            lhs += (a.get(i, j).exp() - r).powi(2);
        }
    }
    let rhs = big_m * big_m * lambda;
    let tol = 1e-9 * rhs + 1e-12 * big_m * big_m * (n * m) as f64;
    Ok(TransferCheck {
        holds: lambda == f64::INFINITY || lhs <= rhs + tol,
        lhs,
        rhs,
    })
}
