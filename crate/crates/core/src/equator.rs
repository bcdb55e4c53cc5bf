//! Greedy cyclic rank-1 framework.
//!
//! Starting from all-zero factors, block `l = ((count - 1) mod k) + 1` is
//! replaced by the output of a [`BlockUpdater`] for `count = 1..=k*M`. The
//! factors with the lowest objective value seen (including the initial zero
//! state) are returned. A worse update is kept as the current state; only the
//! best snapshot is protected.

use std::io::Write;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{maxtimes_product, sparsity, NonNegMatrix};
use crate::objective::AdditiveObjective;

/// A rank-1 block `b c`: `b` has one entry per row, `c` one per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl Block {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            b: vec![0.0; rows],
            c: vec![0.0; cols],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.b.iter().all(|&x| x == 0.0) || self.c.iter().all(|&x| x == 0.0)
    }
}

/// Strategy that proposes a replacement for one block of the factorization.
pub trait BlockUpdater {
    fn name(&self) -> &'static str;

    /// Returns the new block for index `((count - 1) mod k) + 1`.
    fn update_block(
        &self,
        a: &NonNegMatrix,
        b: &NonNegMatrix,
        c: &NonNegMatrix,
        count: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Block>;
}

/// 1-based index of the block touched at iteration `count`.
#[inline]
pub fn block_index(count: usize, rank: usize) -> usize {
    (count - 1) % rank + 1
}

/// Factor pair `B` (n×k), `C` (k×m).
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub b: NonNegMatrix,
    pub c: NonNegMatrix,
    pub rank: usize,
    /// Factor the input was divided by before fitting; already folded back into `b`.
    pub scale: f64,
    pub objective: AdditiveObjective,
    /// Objective value of `b ⊠ c` against the input.
    pub error: f64,
}

impl Factorization {
    pub fn reconstruct(&self) -> Result<NonNegMatrix> {
        maxtimes_product(&self.b, &self.c)
    }

    /// Fraction of zeros over both factors together.
    pub fn factor_sparsity(&self) -> Result<f64> {
        let nb = self.b.rows() * self.b.cols();
        let nc = self.c.rows() * self.c.cols();
        let zeros = sparsity(&self.b)? * nb as f64 + sparsity(&self.c)? * nc as f64;
        Ok(zeros / (nb + nc) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UpdateStatus {
    Ok,
    /// The updater failed; the block was left unchanged.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub block: usize,
    pub error: f64,
    pub best_error: f64,
    pub status: UpdateStatus,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EquatorTrace {
    /// Error of the all-zero starting point.
    pub initial_error: f64,
    pub records: Vec<TraceRecord>,
}

impl EquatorTrace {
    pub fn best_error(&self) -> f64 {
        self.records
            .last()
            .map_or(self.initial_error, |r| r.best_error)
    }

    pub fn final_error(&self) -> f64 {
        self.records.last().map_or(self.initial_error, |r| r.error)
    }

    pub fn failures(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.status, UpdateStatus::Failed(_)))
            .count()
    }

    /// Multiplies every error by `factor`.
    pub fn rescale(&mut self, factor: f64) {
        self.initial_error *= factor;
        for r in &mut self.records {
            r.error *= factor;
            r.best_error *= factor;
        }
    }

    /// CSV with header `iteration,block,error,best_error,status`; row 0 is the
    /// all-zero starting point.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(writer);
        writeln!(w, "iteration,block,error,best_error,status")?;
        writeln!(
            w,
            "0,0,{:?},{:?},ok",
            self.initial_error, self.initial_error
        )?;
        for r in &self.records {
            let status = match &r.status {
                UpdateStatus::Ok => "ok".to_string(),
                UpdateStatus::Failed(msg) => format!("failed: {}", msg.replace([',', '\n'], ";")),
            };
            writeln!(
                w,
                "{},{},{:?},{:?},{}",
                r.iteration, r.block, r.error, r.best_error, status
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Framework settings: rank `k`, number of full cycles `M` and the objective
/// used to track the best factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equator {
    pub rank: usize,
    pub cycles: usize,
    pub objective: AdditiveObjective,
}

fn validate_block(block: &Block, rows: usize, cols: usize) -> Result<()> {
    if block.b.len() != rows || block.c.len() != cols {
        return Err(Error::DimensionMismatch {
            op: "update_block",
            expected: (rows, cols),
            got: (block.b.len(), block.c.len()),
        });
    }
    if let Some(v) = block
        .b
        .iter()
        .chain(&block.c)
        .find(|v| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::InvalidParameter(format!(
            "updater returned invalid entry {v}"
        )));
    }
    Ok(())
}

impl Equator {
    pub fn new(rank: usize, cycles: usize, objective: AdditiveObjective) -> Self {
        Self {
            rank,
            cycles,
            objective,
        }
    }

    pub fn run<U: BlockUpdater + ?Sized>(
        &self,
        a: &NonNegMatrix,
        updater: &U,
        seed: u64,
    ) -> Result<(Factorization, EquatorTrace)> {
        if self.rank == 0 {
            return Err(Error::InvalidParameter("rank must be at least 1".into()));
        }
        if self.cycles == 0 {
            return Err(Error::InvalidParameter("cycles must be at least 1".into()));
        }
        let (n, m) = a.shape();
        let k = self.rank;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut b = NonNegMatrix::zeros(n, k);
        let mut c = NonNegMatrix::zeros(k, m);
        let mut best_b = b.clone();
        let mut best_c = c.clone();
        let mut best_error = self.objective.evaluate(a, &NonNegMatrix::zeros(n, m))?;
        let mut error = best_error;
        let mut trace = EquatorTrace {
            initial_error: best_error,
            records: Vec::with_capacity(k * self.cycles),
        };

        for count in 1..=k * self.cycles {
            let l = block_index(count, k);
            let outcome = updater
                .update_block(a, &b, &c, count, &mut rng)
                .and_then(|blk| validate_block(&blk, n, m).map(|()| blk));
            let status = match outcome {
                Ok(blk) => {
                    b.set_col(l - 1, &blk.b)?;
                    c.set_row(l - 1, &blk.c)?;
                    error = self.objective.evaluate(a, &maxtimes_product(&b, &c)?)?;
                    if error < best_error {
                        best_error = error;
                        best_b.clone_from(&b);
                        best_c.clone_from(&c);
                    }
                    UpdateStatus::Ok
                }
                Err(e) => {
                    log::warn!(
                        "{}: block {l} update failed at iteration {count}: {e}",
                        updater.name()
                    );
                    UpdateStatus::Failed(e.to_string())
                }
            };
            trace.records.push(TraceRecord {
                iteration: count,
                block: l,
                error,
                best_error,
                status,
            });
        }

        Ok((
            Factorization {
                b: best_b,
                c: best_c,
                rank: k,
                scale: 1.0,
                objective: self.objective,
                error: best_error,
            },
            trace,
        ))
    }
}
