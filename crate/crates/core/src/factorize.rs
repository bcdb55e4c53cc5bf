//! End-to-end factorization: picks the updater, handles input rescaling and
//! reports errors on the original data.

use std::fmt;

use crate::cancer::{Cancer, CancerParams};
use crate::capricorn::{Capricorn, CapricornParams};
use crate::equator::{BlockUpdater, Equator, EquatorTrace, Factorization};
use crate::error::{Error, Result};
use crate::matrix::NonNegMatrix;
use crate::objective::AdditiveObjective;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Capricorn(CapricornParams),
    Cancer(CancerParams),
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Capricorn(_) => "capricorn",
            Self::Cancer(_) => "cancer",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizeOptions {
    pub algorithm: Algorithm,
    pub rank: usize,
    pub cycles: usize,
    pub objective: AdditiveObjective,
    /// Divide the input by its largest observed value before fitting.
    pub rescale: bool,
    pub seed: u64,
}

impl FactorizeOptions {
    /// L1 objective, 4 cycles, no rescaling.
    pub fn capricorn(rank: usize) -> Self {
        Self {
            algorithm: Algorithm::Capricorn(CapricornParams::default()),
            rank,
            cycles: 4,
            objective: AdditiveObjective::L1,
            rescale: false,
            seed: 0,
        }
    }

    /// Squared Frobenius objective, 14 cycles, rescaled input.
    pub fn cancer(rank: usize) -> Self {
        Self {
            algorithm: Algorithm::Cancer(CancerParams::default()),
            rank,
            cycles: 14,
            objective: AdditiveObjective::FrobeniusSq,
            rescale: true,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cycles(mut self, cycles: usize) -> Self {
        self.cycles = cycles;
        self
    }
}

/// Runs the configured algorithm on `a`. When rescaling, `B` is multiplied
/// back by the scale and all reported errors refer to the original `a`.
pub fn factorize(
    a: &NonNegMatrix,
    opts: &FactorizeOptions,
) -> Result<(Factorization, EquatorTrace)> {
    if a.observed_count() == 0 {
        return Err(Error::Precondition("input has no observed entries".into()));
    }
    let updater: Box<dyn BlockUpdater + Sync> = match opts.algorithm {
        Algorithm::Capricorn(p) => Box::new(Capricorn::new(p)?),
        Algorithm::Cancer(p) => Box::new(Cancer::new(p, opts.objective)?),
    };
    let scale = if opts.rescale { a.max_observed() } else { 1.0 };
    let equator = Equator::new(opts.rank, opts.cycles, opts.objective);
    if scale <= 0.0 || scale == 1.0 {
        return equator.run(a, updater.as_ref(), opts.seed);
    }

    let (mut f, mut trace) = equator.run(&a.scaled(1.0 / scale)?, updater.as_ref(), opts.seed)?;
    f.b = f.b.scaled(scale)?;
    f.scale = scale;
    f.error = opts.objective.evaluate(a, &f.reconstruct()?)?;
    if opts.objective.homogeneity() > 0 {
        trace.rescale(scale.powi(opts.objective.homogeneity()));
    }
    Ok((f, trace))
}
