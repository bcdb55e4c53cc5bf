use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use log::info;
use maxtimes::eval::PredictionReport;
use maxtimes::synth::{
    derive_seed, quantize, sample_holdout, HoldoutSpec, NoiseKind, NoiseSpec, SynthInstance,
    SynthSpec,
};
use maxtimes::{factorize, maxtimes_product, relative_frobenius, NonNegMatrix, ObservationMask};
use serde_json::json;

use crate::algo::{options_json, AlgoSpec};
use crate::error::{CliError, CliResult};
use crate::files;
use crate::stats::{fmt_opt, mean, std_dev};

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long)]
    pub rank: usize,
    /// Expected fraction of nonzeros in each factor.
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,
    /// tropical-density, tropical-flip or gaussian.
    #[arg(long)]
    pub noise: Option<String>,
    /// Noise level (density, flip fraction or standard deviation).
    #[arg(long)]
    pub level: Option<f64>,
    /// Round clean and noisy data to integers in 0..=L.
    #[arg(long, value_name = "L")]
    pub integer_levels: Option<u32>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn synth(args: &SynthArgs, seed: u64) -> CliResult<()> {
    let noise = match (&args.noise, args.level) {
        (Some(kind), Some(level)) => Some(NoiseSpec::new(
            kind.parse::<NoiseKind>()
                .map_err(|e| CliError::Usage(e.to_string()))?,
            level,
        )),
        (Some(_), None) => return Err(CliError::Usage("--noise requires --level".into())),
        (None, Some(_)) => return Err(CliError::Usage("--level requires --noise".into())),
        (None, None) => None,
    };
    if args.rows == 0 || args.cols == 0 || args.rank == 0 {
        return Err(CliError::Usage("rows, cols and rank must be >= 1".into()));
    }
    let spec = SynthSpec {
        rows: args.rows,
        cols: args.cols,
        rank: args.rank,
        density: args.density,
        noise: noise.unwrap_or(NoiseSpec::new(NoiseKind::Gaussian, 0.0)),
        seed,
    };
    let mut inst = SynthInstance::generate(spec)?;
    if let Some(l) = args.integer_levels {
        inst.clean = quantize(&inst.clean, f64::from(l))?;
        inst.noisy = quantize(&inst.noisy, f64::from(l))?;
    }
    files::create_dir(&args.out)?;
    files::write_matrix(&args.out.join("clean.csv"), &inst.clean)?;
    files::write_matrix(&args.out.join("noisy.csv"), &inst.noisy)?;
    files::write_matrix(&args.out.join("B.csv"), &inst.true_b)?;
    files::write_matrix(&args.out.join("C.csv"), &inst.true_c)?;
    let manifest = json!({
        "command": "synth",
        "rows": spec.rows,
        "cols": spec.cols,
        "rank": spec.rank,
        "density": spec.density,
        "noise": noise.map(|n| json!({"kind": n.kind.name(), "level": n.level})),
        "integer_levels": args.integer_levels,
        "seed": seed,
        "factor_seed": spec.factor_seed(),
        "noise_seed": spec.noise_seed(),
        "noise_floor": inst.noise_floor().ok(),
        "files": ["clean.csv", "noisy.csv", "B.csv", "C.csv"],
    });
    files::write_json(&args.out.join("manifest.json"), &manifest)?;
    info!(
        "wrote {}x{} instance to {}",
        spec.rows,
        spec.cols,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    /// Input CSV; `NaN` cells are treated as missing.
    #[arg(long)]
    pub input: PathBuf,
    /// The input has a header line.
    #[arg(long)]
    pub header: bool,
    #[command(flatten)]
    pub algo: AlgoSpec,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn factorize_cmd(args: &FactorizeArgs, seed: u64) -> CliResult<()> {
    let opts = args.algo.options(None, seed)?;
    let a = files::read_matrix(&args.input, args.header)?;
    info!(
        "factorizing {}x{} with {} (rank {})",
        a.rows(),
        a.cols(),
        opts.algorithm,
        opts.rank
    );
    let start = Instant::now();
    let (f, trace) = factorize(&a, &opts)?;
    let wall = start.elapsed().as_secs_f64();
    let recon = f.reconstruct()?;

    files::create_dir(&args.out)?;
    files::write_matrix(&args.out.join("B.csv"), &f.b)?;
    files::write_matrix(&args.out.join("C.csv"), &f.c)?;
    let trace_path = args.out.join("trace.csv");
    trace
        .write_csv(files::create(&trace_path)?)
        .map_err(|e| CliError::at(&trace_path, e))?;
    let summary = json!({
        "command": "factorize",
        "input": args.input.display().to_string(),
        "rows": a.rows(),
        "cols": a.cols(),
        "observed": a.observed_count(),
        "options": options_json(&opts),
        "initial_error": trace.initial_error,
        "final_error": trace.final_error(),
        "best_error": f.error,
        "relative_frobenius": relative_frobenius(&a, &recon).ok(),
        "factor_sparsity": f.factor_sparsity()?,
        "iterations": trace.records.len(),
        "failures": trace.failures(),
        "scale": f.scale,
        "wall_time_s": wall,
    });
    files::write_json(&args.out.join("summary.json"), &summary)?;
    info!("best error {:.6e} in {wall:.2} s", f.error);
    Ok(())
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub c: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn reconstruct(args: &ReconstructArgs) -> CliResult<()> {
    let b = files::read_matrix(&args.b, false)?;
    let c = files::read_matrix(&args.c, false)?;
    let r = maxtimes_product(&b, &c)?;
    match &args.out {
        Some(p) => files::write_matrix(p, &r),
        None => maxtimes::matrix::write_csv(std::io::stdout().lock(), &r).map_err(Into::into),
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    /// 0/1 CSV selecting the entries to score; all observed truth entries
    /// when omitted.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    /// Output JSON; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let truth = files::read_matrix(&args.truth, false)?;
    let pred = files::read_matrix(&args.pred, false)?;
    let mask = match &args.holdout {
        Some(p) => files::read_mask(p, false)?,
        None => observed_mask(&truth),
    };
    let report = PredictionReport::compute(&truth, &pred, &mask)?;
    let mut metrics = serde_json::Map::new();
    metrics.insert("count".into(), json!(report.count));
    metrics.insert("count_nonzero".into(), json!(report.count_nonzero));
    for (name, value) in report.metrics() {
        metrics.insert(name.into(), json!(value));
    }
    let value = serde_json::Value::Object(metrics);
    match &args.out {
        Some(p) => files::write_json(p, &value),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&value).expect("serializable")
            )
            .map_err(|e| CliError::Runtime(e.to_string()))
        }
    }
}

fn observed_mask(a: &NonNegMatrix) -> ObservationMask {
    let (n, m) = a.shape();
    let mut mask = ObservationMask::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            mask.set(i, j, a.is_observed(i, j));
        }
    }
    mask
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("holdout").required(true)))]
pub struct PredictArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub header: bool,
    #[command(flatten)]
    pub algo: AlgoSpec,
    /// Hold out this fraction of the candidate entries.
    #[arg(long, group = "holdout")]
    pub holdout_fraction: Option<f64>,
    /// Hold out this many candidate entries from every row.
    #[arg(long, group = "holdout")]
    pub holdout_per_row: Option<usize>,
    /// Only nonzero entries are candidates for the holdout.
    #[arg(long)]
    pub nonzeros_only: bool,
    #[arg(long, default_value_t = 1)]
    pub repetitions: usize,
    /// Report CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write each repetition's holdout as `holdout_<rep>.csv` here.
    #[arg(long)]
    pub mask_dir: Option<PathBuf>,
}

const REPORT_METRICS: [&str; 10] = [
    "frobenius",
    "rmse",
    "mae",
    "js",
    "spearman_rho",
    "kendall_tau",
    "mrr",
    "mrr_optimistic",
    "accuracy",
    "accuracy_nonzero",
];

/// Most frequent observed value, optionally among nonzeros; ties go to the
/// smaller value.
pub fn majority_value(a: &NonNegMatrix, nonzero: bool) -> Option<f64> {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if let Some(v) = a.get(i, j).filter(|&v| !nonzero || v != 0.0) {
                *counts.entry(v.to_bits()).or_default() += 1;
            }
        }
    }
    counts
        .into_iter()
        .max_by(|x, y| {
            x.1.cmp(&y.1)
                .then(f64::from_bits(y.0).total_cmp(&f64::from_bits(x.0)))
        })
        .map(|(bits, _)| f64::from_bits(bits))
}

pub fn predict(args: &PredictArgs, seed: u64) -> CliResult<()> {
    if args.repetitions == 0 {
        return Err(CliError::Usage("repetitions must be >= 1".into()));
    }
    let holdout = match (args.holdout_fraction, args.holdout_per_row) {
        (Some(f), None) => HoldoutSpec::Fraction(f),
        (None, Some(k)) => HoldoutSpec::PerRow(k),
        _ => unreachable!("clap enforces exactly one holdout flag"),
    };
    args.algo.options(None, seed)?;
    let a = files::read_matrix(&args.input, args.header)?;

    let mut header: Vec<&str> = vec!["rep", "seed", "count", "count_nonzero"];
    header.extend(REPORT_METRICS);
    header.extend(["baseline_accuracy", "baseline_accuracy_nonzero"]);
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut seeds = Vec::new();
    for rep in 0..args.repetitions as u64 {
        let rep_seed = derive_seed(seed, rep);
        let mask = sample_holdout(&a, holdout, args.nonzeros_only, derive_seed(rep_seed, 0))?;
        if let Some(dir) = &args.mask_dir {
            files::create_dir(dir)?;
            files::write_mask(&dir.join(format!("holdout_{rep}.csv")), &mask)?;
        }
        let train = a.with_missing(&mask)?;
        let opts = args.algo.options(None, derive_seed(rep_seed, 1))?;
        let (f, _) = factorize(&train, &opts)?;
        let pred = f.reconstruct()?;
        let report = PredictionReport::compute(&a, &pred, &mask)?;
        let metrics: HashMap<&str, Option<f64>> = report.metrics().into_iter().collect();
        let mut row = vec![report.count as f64, report.count_nonzero as f64]
            .into_iter()
            .map(Some)
            .collect::<Vec<_>>();
        row.extend(REPORT_METRICS.iter().map(|k| metrics[k]));
        row.push(baseline_accuracy(&a, &train, &mask, false)?);
        row.push(baseline_accuracy(&a, &train, &mask, true)?);
        info!(
            "rep {rep}: accuracy {:.4}, rmse {:.4}",
            report.accuracy, report.rmse
        );
        rows.push(row);
        seeds.push(rep_seed);
    }

    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for (rep, (row, s)) in rows.iter().zip(&seeds).enumerate() {
        let cells: Vec<String> = row[2..].iter().map(|v| fmt_opt(*v)).collect();
        out.push_str(&format!(
            "{rep},{s},{},{},{}\n",
            row[0].unwrap_or_default(),
            row[1].unwrap_or_default(),
            cells.join(",")
        ));
    }
    for (name, agg) in [
        ("mean", mean as fn(&[f64]) -> Option<f64>),
        ("std", std_dev),
    ] {
        let cells: Vec<String> = (0..header.len() - 2)
            .map(|k| {
                let col: Vec<f64> = rows.iter().filter_map(|r| r[k]).collect();
                fmt_opt(agg(&col))
            })
            .collect();
        out.push_str(&format!("{name},,{}\n", cells.join(",")));
    }
    files::write_text(&args.out, &out)
}

fn baseline_accuracy(
    truth: &NonNegMatrix,
    train: &NonNegMatrix,
    mask: &ObservationMask,
    nonzero: bool,
) -> CliResult<Option<f64>> {
    let Some(v) = majority_value(train, nonzero) else {
        return Ok(None);
    };
    let constant = NonNegMatrix::new(
        truth.rows(),
        truth.cols(),
        vec![v; truth.rows() * truth.cols()],
    )?;
    match maxtimes::eval::prediction_accuracy(truth, &constant, mask, nonzero) {
        Ok(x) => Ok(Some(x)),
        Err(maxtimes::Error::Undefined(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}
