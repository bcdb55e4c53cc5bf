//! Planted max-times data, noise models and holdout sampling.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::matrix::{maxtimes_product, NonNegMatrix, ObservationMask};

/// Independent seed for sub-stream `stream` of `seed` (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw from `(0, 1]`.
#[inline]
fn open_unit(rng: &mut impl Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn sparse_uniform(
    rows: usize,
    cols: usize,
    density: f64,
    rng: &mut impl Rng,
) -> Result<NonNegMatrix> {
    let total = rows * cols;
    let nnz = (density * total as f64).floor() as usize;
    let mut values = vec![0.0; total];
    for pos in sample(rng, total, nnz.min(total)) {
        values[pos] = open_unit(rng);
    }
    NonNegMatrix::new(rows, cols, values)
}

/// Random factors `B` (n×k) and `C` (k×m), each with exactly
/// `⌊density · size⌋` nonzeros drawn from `(0, 1]`.
pub fn gen_factors(
    n: usize,
    m: usize,
    k: usize,
    density: f64,
    seed: u64,
) -> Result<(NonNegMatrix, NonNegMatrix)> {
    if n == 0 || m == 0 || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "dimensions must be positive, got {n}x{m} rank {k}"
        )));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "density must be in (0, 1], got {density}"
        )));
    }
    if density * ((n * k) as f64) < k as f64 || density * ((k * m) as f64) < k as f64 {
        log::warn!(
            "factor density {density} leaves fewer nonzeros than blocks; some blocks may be empty"
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = sparse_uniform(n, k, density, &mut rng)?;
    let c = sparse_uniform(k, m, density, &mut rng)?;
    Ok((b, c))
}

/// `max(A, N)` where `N` is uniform on `[0, 1]` except for exactly
/// `⌊(1 − l)nm⌋` entries set to 0.
pub fn apply_tropical_density_noise(
    a: &NonNegMatrix,
    level: f64,
    seed: u64,
) -> Result<NonNegMatrix> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::InvalidParameter(format!(
            "noise density must be in [0, 1], got {level}"
        )));
    }
    let (n, m) = a.shape();
    let total = n * m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise: Vec<f64> = (0..total).map(|_| rng.random::<f64>()).collect();
    let zeroed = ((1.0 - level) * total as f64).floor() as usize;
    for pos in sample(&mut rng, total, zeroed.min(total)) {
        noise[pos] = 0.0;
    }
    let mut out = a.clone();
    for (pos, &v) in noise.iter().enumerate() {
        let (i, j) = (pos / m, pos % m);
        if let Some(x) = a.get(i, j) {
            out.set(i, j, x.max(v))?;
        }
    }
    Ok(out)
}

/// Replaces `⌊α · nnz(A)⌋` distinct entries, chosen from the whole matrix,
/// with fresh draws from `(0, 1]`.
pub fn apply_tropical_flip_noise(a: &NonNegMatrix, alpha: f64, seed: u64) -> Result<NonNegMatrix> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "flip fraction must be >= 0, got {alpha}"
        )));
    }
    let (n, m) = a.shape();
    let total = n * m;
    let flips = (alpha * a.nnz() as f64).floor() as usize;
    if flips > total {
        return Err(Error::InvalidParameter(format!(
            "cannot flip {flips} entries of a {n}x{m} matrix"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = a.clone();
    for pos in sample(&mut rng, total, flips) {
        let v = open_unit(&mut rng);
        let (i, j) = (pos / m, pos % m);
        if a.is_observed(i, j) {
            out.set(i, j, v)?;
        }
    }
    Ok(out)
}

/// `max(A + G, 0)` with `G ~ Normal(0, σ²)` i.i.d.
pub fn apply_gaussian_noise(a: &NonNegMatrix, sigma: f64, seed: u64) -> Result<NonNegMatrix> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(a.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = a.clone();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let g = normal.sample(&mut rng);
            if let Some(x) = a.get(i, j) {
                out.set(i, j, (x + g).max(0.0))?;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    TropicalDensity,
    TropicalFlip,
    Gaussian,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::TropicalDensity => "tropical-density",
            Self::TropicalFlip => "tropical-flip",
            Self::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "tropical-density" | "density" => Ok(Self::TropicalDensity),
            "tropical-flip" | "flip" => Ok(Self::TropicalFlip),
            "gaussian" | "normal" => Ok(Self::Gaussian),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise kind {other:?}"
            ))),
        }
    }
}

/// Noise model with its level: density `l`, flip fraction `α` or std `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub level: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, level: f64) -> Self {
        Self { kind, level }
    }

    pub fn apply(&self, a: &NonNegMatrix, seed: u64) -> Result<NonNegMatrix> {
        match self.kind {
            NoiseKind::TropicalDensity => apply_tropical_density_noise(a, self.level, seed),
            NoiseKind::TropicalFlip => apply_tropical_flip_noise(a, self.level, seed),
            NoiseKind::Gaussian => apply_gaussian_noise(a, self.level, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub density: f64,
    pub noise: NoiseSpec,
    pub seed: u64,
}

impl SynthSpec {
    /// 200×160, rank 5.
    pub fn desk(density: f64, noise: NoiseSpec, seed: u64) -> Self {
        Self {
            rows: 200,
            cols: 160,
            rank: 5,
            density,
            noise,
            seed,
        }
    }

    pub fn factor_seed(&self) -> u64 {
        derive_seed(self.seed, 0)
    }

    pub fn noise_seed(&self) -> u64 {
        derive_seed(self.seed, 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthInstance {
    pub clean: NonNegMatrix,
    pub noisy: NonNegMatrix,
    pub true_b: NonNegMatrix,
    pub true_c: NonNegMatrix,
    pub spec: SynthSpec,
}

impl SynthInstance {
    pub fn generate(spec: SynthSpec) -> Result<Self> {
        let (true_b, true_c) = gen_factors(
            spec.rows,
            spec.cols,
            spec.rank,
            spec.density,
            spec.factor_seed(),
        )?;
        let clean = maxtimes_product(&true_b, &true_c)?;
        let noisy = spec.noise.apply(&clean, spec.noise_seed())?;
        Ok(Self {
            clean,
            noisy,
            true_b,
            true_c,
            spec,
        })
    }

    /// `‖noisy − clean‖_F / ‖clean‖_F`.
    pub fn noise_floor(&self) -> Result<f64> {
        crate::objective::relative_frobenius(&self.clean, &self.noisy)
    }
}

/// Rounds `levels · a` to the nearest integer, giving ratings in `0..=levels`
/// when `a` lies in `[0, 1]`.
pub fn quantize(a: &NonNegMatrix, levels: f64) -> Result<NonNegMatrix> {
    a.map_observed(|x| (levels * x).round())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HoldoutSpec {
    /// Fraction of all candidate entries, drawn globally.
    Fraction(f64),
    /// Fixed number of candidate entries from every row.
    PerRow(usize),
}

/// Marks held-out entries. Candidates are observed entries, restricted to
/// nonzeros when `nonzeros_only` is set.
pub fn sample_holdout(
    a: &NonNegMatrix,
    spec: HoldoutSpec,
    nonzeros_only: bool,
    seed: u64,
) -> Result<ObservationMask> {
    let (n, m) = a.shape();
    let is_candidate = |i: usize, j: usize| match a.get(i, j) {
        Some(v) => !nonzeros_only || v > 0.0,
        None => false,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = ObservationMask::zeros(n, m);
    match spec {
        HoldoutSpec::Fraction(f) => {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidParameter(format!(
                    "holdout fraction must be in [0, 1], got {f}"
                )));
            }
            let candidates: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .filter(|&(i, j)| is_candidate(i, j))
                .collect();
            let count = (f * candidates.len() as f64).floor() as usize;
            for idx in sample(&mut rng, candidates.len(), count) {
                let (i, j) = candidates[idx];
                mask.set(i, j, true);
            }
        }
        HoldoutSpec::PerRow(count) => {
            let per_row: Vec<Vec<usize>> = (0..n)
                .map(|i| (0..m).filter(|&j| is_candidate(i, j)).collect())
                .collect();
            let short: Vec<usize> = (0..n).filter(|&i| per_row[i].len() < count).collect();
            if !short.is_empty() {
                let shown: Vec<String> = short.iter().take(20).map(|i| i.to_string()).collect();
                let more = if short.len() > 20 {
                    format!(" and {} more", short.len() - 20)
                } else {
                    String::new()
                };
                return Err(Error::Precondition(format!(
                    "rows with fewer than {count} candidate entries: {}{more}",
                    shown.join(", ")
                )));
            }
            for (i, cands) in per_row.iter().enumerate() {
                for idx in sample(&mut rng, cands.len(), count) {
                    mask.set(i, cands[idx], true);
                }
            }
        }
    }
    Ok(mask)
}
