//! Quick property battery. Prints one PASS/FAIL line per check.

use maxtimes::cancer::{polymin, ColumnProblem};
use maxtimes::oracle::{
    check_maxplus_transfer, check_sparsity_bound, exhaustive_subtropical_rank_binary, gamma,
    grid_min_gamma, grid_range_gamma, maxplus_error_sq, MaxPlus, MaxPlusMatrix,
};
use maxtimes::synth::{derive_seed, gen_factors, NoiseKind, NoiseSpec, SynthInstance, SynthSpec};
use maxtimes::{
    factorize, maxtimes_product, AdditiveObjective, BinaryMatrix, FactorizeOptions, NonNegMatrix,
};

use crate::error::{CliError, CliResult};

/// Deterministic uniform draws on `[0, 1)`.
struct Stream {
    seed: u64,
    n: u64,
}

impl Stream {
    fn new(seed: u64) -> Self {
        Self { seed, n: 0 }
    }

    fn next(&mut self) -> f64 {
        self.n += 1;
        (derive_seed(self.seed, self.n) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn below(&mut self, k: usize) -> usize {
        ((self.next() * k as f64) as usize).min(k - 1)
    }
}

type Check = fn(u64) -> Result<String, String>;

fn sparsity(seed: u64) -> Result<String, String> {
    let mut s = Stream::new(seed);
    let mut bad = 0;
    for t in 0..200 {
        let (n, k, m) = (1 + s.below(20), 1 + s.below(8), 1 + s.below(20));
        // at least one nonzero per block in each factor
        let density = (0.2 + 0.8 * s.next()).max(1.0 / n.min(m) as f64);
        let (b, c) =
            gen_factors(n, m, k, density, derive_seed(seed, t)).map_err(|e| e.to_string())?;
        let mut a = maxtimes_product(&b, &c).map_err(|e| e.to_string())?;
        if t % 2 == 1 {
            for i in 0..n {
                for j in 0..m {
                    if s.next() < 0.2 {
                        a.set(i, j, a.value(i, j) + s.next())
                            .map_err(|e| e.to_string())?;
                    }
                }
            }
        }
        if !check_sparsity_bound(&b, &c, Some(&a))
            .map_err(|e| e.to_string())?
            .holds
        {
            bad += 1;
        }
    }
    let msg = format!("200 dominated decompositions, {bad} violations");
    if bad == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_maxplus(rows: usize, cols: usize, s: &mut Stream) -> MaxPlusMatrix {
    let values = (0..rows * cols)
        .map(|_| {
            if s.next() < 0.2 {
                MaxPlus::NegInf
            } else {
                MaxPlus::Finite(2.0 * s.next() - 1.0)
            }
        })
        .collect();
    MaxPlusMatrix::new(rows, cols, values).expect("sizes match")
}

fn transfer(seed: u64) -> Result<String, String> {
    let mut s = Stream::new(seed);
    let mut bad = 0;
    for _ in 0..100 {
        let k = 1 + s.below(4);
        let b = random_maxplus(5, k, &mut s);
        let c = random_maxplus(k, 5, &mut s);
        let exact = b.product(&c).map_err(|e| e.to_string())?;
        let values = exact
            .values
            .iter()
            .map(|v| match v {
                MaxPlus::Finite(x) => MaxPlus::Finite(x + 0.6 * s.next() - 0.3),
                MaxPlus::NegInf => MaxPlus::NegInf,
            })
            .collect();
        let a = MaxPlusMatrix::new(5, 5, values).map_err(|e| e.to_string())?;
        let lambda = maxplus_error_sq(&a, &b, &c).map_err(|e| e.to_string())?;
        if !check_maxplus_transfer(&a, &b, &c, lambda)
            .map_err(|e| e.to_string())?
            .holds
        {
            bad += 1;
        }
    }
    let msg = format!("100 max-plus triples, {bad} violations");
    if bad == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Fewest all-ones rectangles covering the ones of a 3×3 pattern.
fn boolean_rank(bits: u16) -> usize {
    if bits == 0 {
        return 0;
    }
    let rects: Vec<u16> = (1..8u16)
        .flat_map(|rows| (1..8u16).map(move |cols| (rows, cols)))
        .map(|(rows, cols)| {
            let mut r = 0u16;
            for i in 0..3 {
                for j in 0..3 {
                    if rows >> i & 1 == 1 && cols >> j & 1 == 1 {
                        r |= 1 << (3 * i + j);
                    }
                }
            }
            r
        })
        .filter(|r| r & !bits == 0)
        .collect();
    let mut reach = vec![0u16];
    for k in 1..=3 {
        reach = reach
            .iter()
            .flat_map(|&u| rects.iter().map(move |&r| u | r))
            .collect();
        reach.sort_unstable();
        reach.dedup();
        if reach.contains(&bits) {
            return k;
        }
    }
    unreachable!("three rows always cover a 3x3 pattern")
}

fn ranks(_: u64) -> Result<String, String> {
    let mut bad = 0;
    for bits in 0..512u16 {
        let rows: Vec<Vec<u8>> = (0..3)
            .map(|i| (0..3).map(|j| (bits >> (3 * i + j) & 1) as u8).collect())
            .collect();
        let a = BinaryMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
        if exhaustive_subtropical_rank_binary(&a).map_err(|e| e.to_string())? != boolean_rank(bits)
        {
            bad += 1;
        }
    }
    let msg = format!("512 binary 3x3 matrices, {bad} rank mismatches");
    if bad == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn equispaced(deg: usize) -> Vec<f64> {
    (0..=deg)
        .map(|j| (j as f64 + 0.5) / (deg + 1) as f64)
        .collect()
}

fn polymin_check(seed: u64) -> Result<String, String> {
    let mut s = Stream::new(seed);
    let (mut quad, mut excess) = (0.0f64, f64::NEG_INFINITY);
    let objectives = [
        AdditiveObjective::FrobeniusSq,
        AdditiveObjective::L1,
        AdditiveObjective::JensenShannon,
    ];
    for _ in 0..100 {
        let a: Vec<f64> = (0..20).map(|_| s.next()).collect();
        let b: Vec<f64> = (0..20).map(|_| 0.01 + 0.99 * s.next()).collect();
        let zeros = [0.0; 20];
        let p = ColumnProblem::new(&a, &zeros, &b).map_err(|e| e.to_string())?;
        let (_, x) = polymin(&p, AdditiveObjective::FrobeniusSq, &equispaced(2), 1.0)
            .map_err(|e| e.to_string())?;
        let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let bb: f64 = b.iter().map(|y| y * y).sum();
        quad = quad.max((x - (ab / bb).clamp(0.0, 1.0)).abs());

        let mut sparse = || if s.next() < 0.4 { 0.0 } else { s.next() };
        let n: Vec<f64> = (0..20).map(|_| sparse()).collect();
        let bg: Vec<f64> = (0..20).map(|_| sparse()).collect();
        let obj = objectives[s.below(3)];
        let deg = 8 + s.below(10);
        let p = ColumnProblem::new(&a, &n, &bg).map_err(|e| e.to_string())?;
        let (_, x) = polymin(&p, obj, &equispaced(deg), 1.0).map_err(|e| e.to_string())?;
        let (best, _) = grid_min_gamma(&a, &n, &bg, obj, 2001).map_err(|e| e.to_string())?;
        let (lo, hi) = grid_range_gamma(&a, &n, &bg, obj, 2001);
        excess = excess.max((gamma(&a, &n, &bg, obj, x) - best) / (hi - lo).max(1e-300));
    }
    let msg = format!("quadratic offset {quad:.1e}, worst excess {excess:.4} of range");
    if quad <= 1e-6 && excess <= 0.05 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn contract(seed: u64) -> Result<String, String> {
    let runs = [
        (NoiseKind::TropicalFlip, 0.2, FactorizeOptions::capricorn(3)),
        (
            NoiseKind::Gaussian,
            0.02,
            FactorizeOptions::cancer(3).with_cycles(3),
        ),
    ];
    let mut worst = 0.0f64;
    for (k, (kind, level, opts)) in runs.into_iter().enumerate() {
        let inst = SynthInstance::generate(SynthSpec {
            rows: 30,
            cols: 24,
            rank: 3,
            density: 0.4,
            noise: NoiseSpec::new(kind, level),
            seed: derive_seed(seed, k as u64),
        })
        .map_err(|e| e.to_string())?;
        let (f, trace) = factorize(&inst.noisy, &opts).map_err(|e| e.to_string())?;
        if trace
            .records
            .windows(2)
            .any(|w| w[1].best_error > w[0].best_error)
        {
            return Err("best error increased".into());
        }
        let round = |m: &NonNegMatrix| -> Result<NonNegMatrix, String> {
            let mut buf = Vec::new();
            maxtimes::matrix::write_csv(&mut buf, m).map_err(|e| e.to_string())?;
            maxtimes::matrix::read_csv(buf.as_slice(), false).map_err(|e| e.to_string())
        };
        let r = maxtimes_product(&round(&f.b)?, &round(&f.c)?).map_err(|e| e.to_string())?;
        let e = opts
            .objective
            .evaluate(&inst.noisy, &r)
            .map_err(|e| e.to_string())?;
        worst = worst.max((e - trace.best_error()).abs() / trace.best_error().max(1e-300));
    }
    let msg = format!("monotone best error, CSV round trip offset {worst:.1e}");
    if worst <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn rank_one(_: u64) -> Result<String, String> {
    let a = NonNegMatrix::outer(&[1.0, 0.4, 0.0, 0.7], &[0.3, 0.9, 0.0, 0.5, 1.0])
        .map_err(|e| e.to_string())?;
    let mut errs = Vec::new();
    for opts in [FactorizeOptions::capricorn(1), FactorizeOptions::cancer(1)] {
        let (f, _) = factorize(&a, &opts).map_err(|e| e.to_string())?;
        let r = f.reconstruct().map_err(|e| e.to_string())?;
        errs.push(maxtimes::relative_frobenius(&a, &r).map_err(|e| e.to_string())?);
    }
    let msg = format!("capricorn {:.1e}, cancer {:.1e}", errs[0], errs[1]);
    if errs[0] <= 1e-6 && errs[1] <= 1e-2 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn selftest(seed: u64) -> CliResult<()> {
    let checks: [(&str, Check); 6] = [
        ("sparsity bound", sparsity),
        ("max-plus transfer", transfer),
        ("binary ranks", ranks),
        ("polymin", polymin_check),
        ("equator contract", contract),
        ("rank-1 recovery", rank_one),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check(seed) {
            Ok(m) => println!("PASS {name}: {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL {name}: {m}");
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Runtime(format!(
            "{failed} selftest checks failed"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boolean_rank_examples() {
        assert_eq!(boolean_rank(0), 0);
        assert_eq!(boolean_rank(0b111_111_111), 1);
        // identity
        assert_eq!(boolean_rank(0b100_010_001), 3);
        // upper triangular ones
        assert_eq!(boolean_rank(0b100_110_111), 3);
        assert_eq!(boolean_rank(0b011_011_000), 1);
    }

    #[test]
    fn stream_in_unit_interval() {
        let mut s = Stream::new(3);
        assert!((0..1000).map(|_| s.next()).all(|x| (0.0..1.0).contains(&x)));
        assert!((0..1000).all(|_| s.below(7) < 7));
    }
}
