//! Block updater for continuous noise.
//!
//! One block is refined by alternately adjusting entries of `c` and `b`. For
//! every candidate entry the one-dimensional cost
//! `γ(x) = Σ_i φ(a_i, max(n_i, b_i x))` is replaced by a polynomial through
//! `deg + 1` samples, and its minimizer is polished on `γ` itself. The entry
//! with the largest gain is always overwritten; under
//! [`UpdateRule::AllImproving`] so is every other entry with a positive gain.
//! The degree grows by one every full cycle.

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::equator::{block_index, Block, BlockUpdater};
use crate::error::{Error, Result};
use crate::matrix::{maxtimes_product_excluding, NonNegMatrix};
use crate::objective::AdditiveObjective;
use crate::poly::PolyFit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Abscissae {
    /// `(j + 0.5)/(deg + 1)` scaled to the search interval.
    #[default]
    Equispaced,
    /// Sorted uniform draws from the search interval.
    Random,
}

/// Which entries an adjustment step writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateRule {
    /// Only the entry with the largest predicted gain.
    SingleElement,
    /// The largest-gain entry plus every other entry with a positive gain.
    /// For fixed weights the cost separates over entries, so the gains add.
    #[default]
    AllImproving,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CancerParams {
    /// Maximum polynomial degree offset `t`; degrees cycle through `2..=t+1`.
    pub max_degree: usize,
    /// Fraction `f` of `n + m` spent on single-entry updates per block.
    pub update_fraction: f64,
    pub abscissae: Abscissae,
    /// Upper end of the search interval `[0, upper]`.
    pub upper: f64,
    /// Start an all-zero block from the entry with the largest uncovered excess.
    pub seed_empty_blocks: bool,
    pub update_rule: UpdateRule,
    /// Golden-section steps on `γ` around the surrogate minimizer; 0 keeps
    /// the raw surrogate answer.
    pub polish_steps: usize,
}

impl Default for CancerParams {
    fn default() -> Self {
        Self {
            max_degree: 16,
            update_fraction: 0.1,
            abscissae: Abscissae::Equispaced,
            upper: 1.0,
            seed_empty_blocks: true,
            update_rule: UpdateRule::AllImproving,
            polish_steps: 12,
        }
    }
}

impl CancerParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_degree <= 2 {
            return Err(Error::InvalidParameter(format!(
                "max degree t must be > 2, got {}",
                self.max_degree
            )));
        }
        if !(self.update_fraction > 0.0 && self.update_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "update fraction f must be in (0, 1), got {}",
                self.update_fraction
            )));
        }
        if !(self.upper >= 0.0 && self.upper.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "search interval upper bound must be finite and >= 0, got {}",
                self.upper
            )));
        }
        Ok(())
    }
}

/// `2 + (⌊(count − 1)/k⌋ mod t)`.
pub fn degree_schedule(count: usize, rank: usize, t: usize) -> usize {
    2 + ((count - 1) / rank) % t
}

/// `max(1, ⌊f (n + m) / 2⌋)`.
pub fn update_iterations(n: usize, m: usize, f: f64) -> usize {
    ((f * (n + m) as f64 / 2.0).floor() as usize).max(1)
}

pub fn sample_abscissae(
    deg: usize,
    upper: f64,
    kind: Abscissae,
    rng: &mut dyn RngCore,
) -> Vec<f64> {
    let count = deg + 1;
    match kind {
        Abscissae::Equispaced => (0..count)
            .map(|j| upper * (j as f64 + 0.5) / count as f64)
            .collect(),
        Abscissae::Random => loop {
            let mut xs: Vec<f64> = (0..count).map(|_| upper * rng.random::<f64>()).collect();
            xs.sort_by(f64::total_cmp);
            if xs.windows(2).all(|w| w[1] > w[0]) && xs[0] > 0.0 {
                break xs;
            }
        },
    }
}

/// One column's data: `γ(x) = Σ_i φ(a_i, max(n_i, b_i x))` over observed `i`.
#[derive(Debug, Clone, Copy)]
pub struct ColumnProblem<'a> {
    pub a: &'a [f64],
    pub n: &'a [f64],
    pub b: &'a [f64],
    /// `None` when every entry is observed.
    pub observed: Option<&'a [bool]>,
}

impl<'a> ColumnProblem<'a> {
    pub fn new(a: &'a [f64], n: &'a [f64], b: &'a [f64]) -> Result<Self> {
        if a.len() != n.len() || a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                op: "column problem",
                expected: (a.len(), a.len()),
                got: (n.len(), b.len()),
            });
        }
        Ok(Self {
            a,
            n,
            b,
            observed: None,
        })
    }

    pub fn with_observed(mut self, observed: Option<&'a [bool]>) -> Self {
        self.observed = observed;
        self
    }

    pub fn gamma(&self, obj: AdditiveObjective, x: f64) -> f64 {
        let term = |i: usize| obj.phi(self.a[i], self.n[i].max(self.b[i] * x));
        match self.observed {
            None => (0..self.a.len()).map(term).sum(),
            Some(obs) => (0..self.a.len()).filter(|&i| obs[i]).map(term).sum(),
        }
    }

    /// Interpolating surrogate of `γ` through the given abscissae.
    pub fn surrogate(
        &self,
        obj: AdditiveObjective,
        abscissae: &[f64],
        upper: f64,
    ) -> Result<PolyFit> {
        let ys = abscissae.iter().map(|&x| self.gamma(obj, x)).collect();
        PolyFit::fit(0.0, upper, abscissae.to_vec(), ys)
    }
}

/// Approximate minimizer of `γ` on `[0, upper]`; returns `(g(x*), x*)`.
///
/// `x*` minimizes the interpolant `g` unless a sample abscissa has a lower
/// true cost. A zero-length interval yields `(γ(0), 0)`.
pub fn polymin(
    problem: &ColumnProblem<'_>,
    obj: AdditiveObjective,
    abscissae: &[f64],
    upper: f64,
) -> Result<(f64, f64)> {
    polymin_polished(problem, obj, abscissae, upper, 0)
}

/// [`polymin`] followed by `steps` golden-section steps on `γ` itself within
/// one sample spacing of `x*`. With `steps > 0` the returned value is `γ(x*)`.
pub fn polymin_polished(
    problem: &ColumnProblem<'_>,
    obj: AdditiveObjective,
    abscissae: &[f64],
    upper: f64,
    steps: usize,
) -> Result<(f64, f64)> {
    if upper <= 0.0 {
        return Ok((problem.gamma(obj, 0.0), 0.0));
    }
    if abscissae.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "degree must be >= 2, got {} samples",
            abscissae.len()
        )));
    }
    let fit = problem.surrogate(obj, abscissae, upper)?;
    let candidates = fit.candidates();
    let (value, x) = fit.minimize_over(&candidates);
    let x = x.max(0.0);
    // A high-degree interpolant of a kinked γ can dip where γ does not. Score
    // the other stationary points and the samples by γ itself and move only
    // on a strict improvement.
    let mut best = (problem.gamma(obj, x), x);
    for c in candidates {
        let c = c.max(0.0);
        let g = problem.gamma(obj, c);
        if g < best.0 {
            best = (g, c);
        }
    }
    for (&c, &g) in fit.abscissae.iter().zip(&fit.ordinates) {
        if g < best.0 {
            best = (g, c);
        }
    }
    if steps > 0 {
        let h = upper / abscissae.len() as f64;
        return Ok(golden_section(
            |t| problem.gamma(obj, t),
            (best.1 - h).max(0.0),
            (best.1 + h).min(upper),
            steps,
            best,
        ));
    }
    if best.1 == x {
        return Ok((value, x));
    }
    Ok((fit.eval(best.1), best.1))
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`; returns the best
/// of `start` and every evaluated point.
fn golden_section(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    steps: usize,
    start: (f64, f64),
) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = start;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..steps {
        for (v, x) in [(f1, x1), (f2, x2)] {
            if v < best.0 {
                best = (v, x);
            }
        }
        if f1 <= f2 {
            (hi, x2, f2) = (x2, x1, f1);
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            (lo, x1, f1) = (x1, x2, f2);
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    for (v, x) in [(f1, x1), (f2, x2)] {
        if v < best.0 {
            best = (v, x);
        }
    }
    best
}

/// Row-oriented core of [`adjust_one_element`]: row `j` of `a_t`/`n_t` is the
/// `j`-th column problem with weights `weights`. The largest-gain entry is
/// always written; returns its index.
#[allow(clippy::too_many_arguments)]
fn adjust_rows(
    a_t: &NonNegMatrix,
    n_t: &NonNegMatrix,
    weights: &[f64],
    target: &mut [f64],
    obj: AdditiveObjective,
    abscissae: &[f64],
    upper: f64,
    rule: UpdateRule,
    polish: usize,
) -> Result<usize> {
    // Entries with zero weight add a constant to γ, which cancels in the gain.
    let active: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    let gains: Vec<(f64, f64)> = (0..a_t.rows())
        .into_par_iter()
        .map(|j| {
            let (row, others, mask) = (a_t.row(j), n_t.row(j), a_t.row_mask(j));
            let idx: Vec<usize> = active
                .iter()
                .copied()
                .filter(|&i| mask.is_none_or(|m| m[i]))
                .collect();
            if idx.is_empty() {
                return Ok((0.0, 0.0));
            }
            let av: Vec<f64> = idx.iter().map(|&i| row[i]).collect();
            let nv: Vec<f64> = idx.iter().map(|&i| others[i]).collect();
            let bv: Vec<f64> = idx.iter().map(|&i| weights[i]).collect();
            let problem = ColumnProblem::new(&av, &nv, &bv)?;
            let base = problem.gamma(obj, target[j]);
            let (err, x) = polymin_polished(&problem, obj, abscissae, upper, polish)?;
            Ok((base - err, x))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (j, &(u, _)) in gains.iter().enumerate().skip(1) {
        if u > gains[best].0 {
            best = j;
        }
    }
    if rule == UpdateRule::AllImproving {
        for (t, &(u, x)) in target.iter_mut().zip(&gains) {
            if u > 0.0 {
                *t = x;
            }
        }
    }
    target[best] = gains[best].1;
    Ok(best)
}

/// Changes the single entry of `c` with the largest predicted improvement of
/// `Σ φ(A, max(N, b c))`. The write is unconditional, even when no entry
/// promises a gain.
#[allow(clippy::too_many_arguments)]
pub fn adjust_one_element(
    a: &NonNegMatrix,
    n: &NonNegMatrix,
    b: &[f64],
    c: &[f64],
    obj: AdditiveObjective,
    abscissae: &[f64],
    upper: f64,
) -> Result<Vec<f64>> {
    a.check_same_shape("adjust_one_element", n.shape())?;
    if b.len() != a.rows() || c.len() != a.cols() {
        return Err(Error::DimensionMismatch {
            op: "adjust_one_element",
            expected: a.shape(),
            got: (b.len(), c.len()),
        });
    }
    let mut out = c.to_vec();
    adjust_rows(
        &a.transpose(),
        &n.transpose(),
        b,
        &mut out,
        obj,
        abscissae,
        upper,
        UpdateRule::SingleElement,
        0,
    )?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cancer {
    pub params: CancerParams,
    pub objective: AdditiveObjective,
}

impl Default for Cancer {
    fn default() -> Self {
        Self {
            params: CancerParams::default(),
            objective: AdditiveObjective::FrobeniusSq,
        }
    }
}

/// Starting block for an all-zero block: the observed entry `(p, q)` with the
/// largest uncovered excess `A_pq − N_pq`, as `b = e_p`, `c = A_pq e_q`.
/// `None` when `N` already covers every entry.
fn seed_block(a: &NonNegMatrix, others: &NonNegMatrix) -> Option<Block> {
    let (n, m) = a.shape();
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in 0..m {
            if let Some(v) = a.get(i, j) {
                let excess = v - others.value(i, j);
                if excess > 0.0 && best.is_none_or(|(_, _, e)| excess > e) {
                    best = Some((i, j, excess));
                }
            }
        }
    }
    let (p, q, _) = best?;
    let mut b = vec![0.0; n];
    b[p] = 1.0;
    let mut c = vec![0.0; m];
    c[q] = a.value(p, q);
    Some(Block { b, c })
}

impl Cancer {
    pub fn new(params: CancerParams, objective: AdditiveObjective) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, objective })
    }

    pub fn update(
        &self,
        a: &NonNegMatrix,
        b: &NonNegMatrix,
        c: &NonNegMatrix,
        count: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Block> {
        let p = &self.params;
        if count == 0 {
            return Err(Error::InvalidParameter("count starts at 1".into()));
        }
        let (n, m) = a.shape();
        let k = b.cols();
        let l = block_index(count, k);
        let others = maxtimes_product_excluding(b, c, l)?;
        let deg = degree_schedule(count, k, p.max_degree);
        let niters = update_iterations(n, m, p.update_fraction);

        let mut block = Block {
            b: b.col(l - 1),
            c: c.row(l - 1).to_vec(),
        };
        if p.seed_empty_blocks && block.is_zero() {
            match seed_block(a, &others) {
                Some(seed) => block = seed,
                None => return Ok(block),
            }
        }

        let a_t = a.transpose();
        let n_t = others.transpose();
        let obj = self.objective;
        for _ in 0..niters {
            let xs = sample_abscissae(deg, p.upper, p.abscissae, rng);
            adjust_rows(
                &a_t,
                &n_t,
                &block.b,
                &mut block.c,
                obj,
                &xs,
                p.upper,
                p.update_rule,
                p.polish_steps,
            )?;
            let xs = sample_abscissae(deg, p.upper, p.abscissae, rng);
            adjust_rows(
                a,
                &others,
                &block.c,
                &mut block.b,
                obj,
                &xs,
                p.upper,
                p.update_rule,
                p.polish_steps,
            )?;
        }
        Ok(block)
    }
}

impl BlockUpdater for Cancer {
    fn name(&self) -> &'static str {
        "cancer"
    }

    fn update_block(
        &self,
        a: &NonNegMatrix,
        b: &NonNegMatrix,
        c: &NonNegMatrix,
        count: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Block> {
        self.update(a, b, c, count, rng)
    }
}
