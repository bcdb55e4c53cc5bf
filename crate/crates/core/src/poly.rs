//! Univariate polynomial interpolation and minimization on a closed interval.
//!
//! Polynomials are stored in the centered variable `t = (2x − lo − hi)/(hi − lo)`
//! so the Vandermonde system is built on `[-1, 1]`, which keeps it far better
//! conditioned than the monomial basis on `[0, 1]` for degrees up to ~17.

use crate::error::{Error, Result};

/// Coefficients in increasing powers, `c[0] + c[1] t + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(p, &c)| p as f64 * c)
                .collect(),
        }
    }

    /// Drops negligible leading coefficients.
    fn trimmed(&self) -> Self {
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.abs() <= scale * 1e-14) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Real roots in `[lo, hi]`, ascending.
    ///
    /// Roots of the derivative split the interval into monotone pieces; each
    /// piece with a sign change holds exactly one root.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let p = self.trimmed();
        match p.degree() {
            0 => Vec::new(),
            1 => {
                let r = -p.coeffs[0] / p.coeffs[1];
                if (lo..=hi).contains(&r) {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let mut knots = vec![lo];
                knots.extend(p.derivative().real_roots_in(lo, hi));
                knots.push(hi);
                let mut roots: Vec<f64> = Vec::new();
                let push = |r: f64, roots: &mut Vec<f64>| {
                    if roots.last().is_none_or(|&last| r > last) {
                        roots.push(r);
                    }
                };
                for w in knots.windows(2) {
                    let (x0, x1) = (w[0], w[1]);
                    let (f0, f1) = (p.eval(x0), p.eval(x1));
                    if f0 == 0.0 {
                        push(x0, &mut roots);
                    } else if f0.signum() != f1.signum() && f1 != 0.0 {
                        push(bracketed_root(&p, x0, x1, f0, f1), &mut roots);
                    }
                }
                if p.eval(hi) == 0.0 {
                    push(hi, &mut roots);
                }
                roots
            }
        }
    }
}

/// Illinois-modified false position on a sign-changing bracket.
fn bracketed_root(p: &Polynomial, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    let tol = 1e-15 * (1.0 + a.abs().max(b.abs()));
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (a + b);
        }
        let fx = p.eval(x);
        if fx == 0.0 {
            return x;
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Result<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("non-empty");
        if m[pivot][col] == 0.0 {
            return Err(Error::Undefined("singular interpolation system".into()));
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                let (top, bottom) = m.split_at_mut(row);
                for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= factor * p;
                }
                rhs[row] -= factor * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    Ok(x)
}

/// Interpolating polynomial through `degree + 1` samples on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    pub degree: usize,
    pub lo: f64,
    pub hi: f64,
    /// Coefficients in the centered variable.
    pub poly: Polynomial,
    pub abscissae: Vec<f64>,
    pub ordinates: Vec<f64>,
}

impl PolyFit {
    /// Fits the unique polynomial of degree `abscissae.len() - 1` through the
    /// samples. Abscissae must be distinct.
    pub fn fit(lo: f64, hi: f64, abscissae: Vec<f64>, ordinates: Vec<f64>) -> Result<Self> {
        if abscissae.is_empty() || abscissae.len() != ordinates.len() {
            return Err(Error::InvalidParameter(
                "need as many ordinates as abscissae".into(),
            ));
        }
        if !(hi > lo) {
            return Err(Error::InvalidParameter(format!(
                "empty interval [{lo}, {hi}]"
            )));
        }
        let degree = abscissae.len() - 1;
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let rows: Vec<Vec<f64>> = abscissae
            .iter()
            .map(|&x| {
                let t = (x - mid) / half;
                std::iter::successors(Some(1.0), |p| Some(p * t))
                    .take(degree + 1)
                    .collect()
            })
            .collect();
        let coeffs = solve_dense(rows, ordinates.clone())?;
        Ok(Self {
            degree,
            lo,
            hi,
            poly: Polynomial::new(coeffs),
            abscissae,
            ordinates,
        })
    }

    #[inline]
    fn to_t(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    #[inline]
    fn to_x(&self, t: f64) -> f64 {
        0.5 * (self.lo + self.hi) + 0.5 * (self.hi - self.lo) * t
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(self.to_t(x))
    }

    /// Largest relative deviation from the samples.
    pub fn max_sample_residual(&self) -> f64 {
        let scale = self.ordinates.iter().fold(1e-300f64, |m, y| m.max(y.abs()));
        self.abscissae
            .iter()
            .zip(&self.ordinates)
            .map(|(&x, &y)| (self.eval(x) - y).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// `lo`, the stationary points inside `(lo, hi)` in increasing order, then `hi`.
    ///
    /// Stationary points are sign changes of the derivative on a Chebyshev grid
    /// of `8 deg` cells, refined by false position. A pair of roots closer
    /// than one cell can be missed; such a pair bounds a negligible dip.
    pub fn candidates(&self) -> Vec<f64> {
        let d = self.poly.derivative();
        let cells = 8 * self.degree.max(1);
        let mut candidates = vec![self.lo];
        let node = |k: usize| -(std::f64::consts::PI * k as f64 / cells as f64).cos();
        let (mut t0, mut f0) = (-1.0, d.eval(-1.0));
        for k in 1..=cells {
            let t1 = if k == cells { 1.0 } else { node(k) };
            let f1 = d.eval(t1);
            if f0 == 0.0 && k > 1 {
                candidates.push(self.to_x(t0));
            } else if f0 != 0.0 && f1 != 0.0 && f0.signum() != f1.signum() {
                candidates.push(self.to_x(bracketed_root(&d, t0, t1, f0, f1)));
            }
            (t0, f0) = (t1, f1);
        }
        candidates.push(self.hi);
        candidates
    }

    /// Minimum of the polynomial over `[lo, hi]`: candidates are both
    /// endpoints and the interior stationary points. Values within a relative
    /// `1e-12` of the minimum count as ties, resolved towards the smallest `x`.
    pub fn minimize(&self) -> (f64, f64) {
        self.minimize_over(&self.candidates())
    }

    /// [`PolyFit::minimize`] restricted to precomputed `candidates`.
    pub fn minimize_over(&self, candidates: &[f64]) -> (f64, f64) {
        let values: Vec<f64> = candidates.iter().map(|&x| self.eval(x)).collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let scale = self.ordinates.iter().fold(min.abs(), |m, y| m.max(y.abs()));
        let tol = 1e-12 * scale;
        let best = values
            .iter()
            .position(|&v| v <= min + tol)
            .expect("at least two candidates");
        (values[best], candidates[best])
    }
}
