//! Declarative sweeps: a TOML config expands into a grid of synthetic
//! instances, every algorithm runs on every instance, and results land in a
//! tidy CSV that the plots are drawn from.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use log::{info, warn};
use maxtimes::synth::{derive_seed, quantize, NoiseKind, NoiseSpec, SynthInstance, SynthSpec};
use maxtimes::{factorize, relative_frobenius};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algo::{options_json, AlgoSpec};
use crate::error::{CliError, CliResult};
use crate::files;
use crate::plot::{line_plot, Series};
use crate::stats::{fmt_opt, mean, std_dev};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            Self::One(x) => vec![x.clone()],
            Self::Many(xs) => xs.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataGrid {
    pub rows: OneOrMany<usize>,
    pub cols: OneOrMany<usize>,
    pub rank: OneOrMany<usize>,
    pub density: OneOrMany<f64>,
    #[serde(default)]
    pub noise: Option<OneOrMany<String>>,
    #[serde(default)]
    pub level: Option<OneOrMany<f64>>,
    /// Round the data to integers in `0..=L` after adding noise.
    #[serde(default)]
    pub integer_levels: Option<u32>,
}

fn default_repetitions() -> usize {
    10
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub plot: bool,
    pub data: DataGrid,
    #[serde(rename = "algorithm")]
    pub algorithms: Vec<AlgoSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub density: f64,
    pub noise: Option<NoiseSpec>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.repetitions == 0 {
            return usage("repetitions must be >= 1".into());
        }
        if self.algorithms.is_empty() {
            return usage("at least one [[algorithm]] is required".into());
        }
        let d = &self.data;
        let empty = [
            ("rows", d.rows.values().is_empty()),
            ("cols", d.cols.values().is_empty()),
            ("rank", d.rank.values().is_empty()),
            ("density", d.density.values().is_empty()),
            (
                "noise",
                d.noise.as_ref().is_some_and(|v| v.values().is_empty()),
            ),
            (
                "level",
                d.level.as_ref().is_some_and(|v| v.values().is_empty()),
            ),
        ];
        if let Some((k, _)) = empty.iter().find(|(_, e)| *e) {
            return usage(format!("data.{k} must not be an empty list"));
        }
        if d.noise.is_some() != d.level.is_some() {
            return usage("data.noise and data.level must be given together".into());
        }
        for kind in d.noise.iter().flat_map(OneOrMany::values) {
            kind.parse::<NoiseKind>()
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        for p in self.grid() {
            if p.rows == 0 || p.cols == 0 || p.rank == 0 {
                return usage("rows, cols and rank must be >= 1".into());
            }
            for a in &self.algorithms {
                a.options(Some(p.rank), 0)?;
            }
        }
        let mut labels = BTreeSet::new();
        for a in &self.algorithms {
            if !labels.insert(a.display_label()) {
                return usage(format!(
                    "duplicate algorithm label {:?}; set distinct labels",
                    a.display_label()
                ));
            }
        }
        Ok(())
    }

    /// Cartesian product in the order rows, cols, rank, density, noise, level.
    pub fn grid(&self) -> Vec<GridPoint> {
        let d = &self.data;
        let noises: Vec<Option<NoiseSpec>> = match (&d.noise, &d.level) {
            (Some(kinds), Some(levels)) => kinds
                .values()
                .iter()
                .flat_map(|k| {
                    let kind: NoiseKind = k.parse().expect("validated noise kind");
                    levels
                        .values()
                        .into_iter()
                        .map(move |l| Some(NoiseSpec::new(kind, l)))
                })
                .collect(),
            _ => vec![None],
        };
        let mut out = Vec::new();
        for &rows in &d.rows.values() {
            for &cols in &d.cols.values() {
                for &rank in &d.rank.values() {
                    for &density in &d.density.values() {
                        for &noise in &noises {
                            out.push(GridPoint {
                                rows,
                                cols,
                                rank,
                                density,
                                noise,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One line of `results.csv`. Column order is the field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub point: usize,
    pub rep: usize,
    pub rows: usize,
    pub cols: usize,
    pub true_rank: usize,
    pub density: f64,
    pub noise: String,
    pub level: f64,
    pub algorithm: String,
    pub label: String,
    pub fitted_rank: usize,
    pub objective: String,
    pub seed: u64,
    pub status: String,
    /// Against the data the algorithm was given.
    pub relative_error: Option<f64>,
    /// Against the noise-free data.
    pub relative_error_clean: Option<f64>,
    pub noise_floor: Option<f64>,
    pub best_error: Option<f64>,
    pub factor_sparsity: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_time_s: Option<f64>,
    pub message: String,
}

pub const RESULT_COLUMNS: [&str; 23] = [
    "experiment",
    "point",
    "rep",
    "rows",
    "cols",
    "true_rank",
    "density",
    "noise",
    "level",
    "algorithm",
    "label",
    "fitted_rank",
    "objective",
    "seed",
    "status",
    "relative_error",
    "relative_error_clean",
    "noise_floor",
    "best_error",
    "factor_sparsity",
    "iterations",
    "wall_time_s",
    "message",
];

fn run_task(cfg: &ExperimentConfig, point_idx: usize, p: GridPoint, rep: usize) -> Vec<ResultRow> {
    let seed = derive_seed(derive_seed(cfg.seed, point_idx as u64), rep as u64);
    let noise = p.noise.unwrap_or(NoiseSpec::new(NoiseKind::Gaussian, 0.0));
    let base = |algo: &AlgoSpec| ResultRow {
        experiment: cfg.name.clone(),
        point: point_idx,
        rep,
        rows: p.rows,
        cols: p.cols,
        true_rank: p.rank,
        density: p.density,
        noise: p.noise.map_or("none".into(), |n| n.kind.name().into()),
        level: p.noise.map_or(0.0, |n| n.level),
        algorithm: algo.name.to_ascii_lowercase(),
        label: algo.display_label(),
        fitted_rank: algo.rank.unwrap_or(p.rank),
        objective: String::new(),
        seed,
        status: "failed".into(),
        relative_error: None,
        relative_error_clean: None,
        noise_floor: None,
        best_error: None,
        factor_sparsity: None,
        iterations: None,
        wall_time_s: None,
        message: String::new(),
    };
    let instance = SynthInstance::generate(SynthSpec {
        rows: p.rows,
        cols: p.cols,
        rank: p.rank,
        density: p.density,
        noise,
        seed,
    })
    .and_then(|mut inst| {
        if let Some(l) = cfg.data.integer_levels {
            inst.clean = quantize(&inst.clean, f64::from(l))?;
            inst.noisy = quantize(&inst.noisy, f64::from(l))?;
        }
        Ok(inst)
    });
    let inst = match instance {
        Ok(i) => i,
        Err(e) => {
            return cfg
                .algorithms
                .iter()
                .map(|a| ResultRow {
                    message: format!("data generation failed: {e}"),
                    ..base(a)
                })
                .collect()
        }
    };
    let floor = inst.noise_floor().ok();

    cfg.algorithms
        .iter()
        .map(|algo| {
            let mut row = base(algo);
            row.noise_floor = floor;
            let opts = match algo.options(Some(p.rank), seed) {
                Ok(o) => o,
                Err(e) => {
                    row.message = e.to_string();
                    return row;
                }
            };
            row.objective = opts.objective.to_string();
            let start = Instant::now();
            let outcome = std::panic::catch_unwind(|| {
                let (f, trace) = factorize(&inst.noisy, &opts)?;
                let r = f.reconstruct()?;
                Ok::<_, maxtimes::Error>((
                    relative_frobenius(&inst.noisy, &r)?,
                    relative_frobenius(&inst.clean, &r).ok(),
                    f.error,
                    f.factor_sparsity()?,
                    trace.records.len(),
                ))
            });
            row.wall_time_s = Some(start.elapsed().as_secs_f64());
            match outcome {
                Ok(Ok((err, clean, best, sparsity, iters))) => {
                    row.status = "ok".into();
                    row.relative_error = Some(err);
                    row.relative_error_clean = clean;
                    row.best_error = Some(best);
                    row.factor_sparsity = Some(sparsity);
                    row.iterations = Some(iters);
                }
                Ok(Err(e)) => row.message = e.to_string(),
                Err(_) => row.message = "panicked".into(),
            }
            if row.status != "ok" {
                warn!(
                    "{} point {point_idx} rep {rep} failed: {}",
                    row.label, row.message
                );
            }
            row
        })
        .collect()
}

/// Runs every (grid point, repetition) pair on the current rayon pool and
/// returns rows in grid order.
pub fn run(cfg: &ExperimentConfig) -> Vec<ResultRow> {
    let grid = cfg.grid();
    let tasks: Vec<(usize, GridPoint, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(i, &p)| (0..cfg.repetitions).map(move |r| (i, p, r)))
        .collect();
    info!(
        "{}: {} grid points x {} repetitions x {} algorithms",
        cfg.name,
        grid.len(),
        cfg.repetitions,
        cfg.algorithms.len()
    );
    tasks
        .par_iter()
        .map(|&(i, p, r)| run_task(cfg, i, p, r))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(files::create(path)?);
    if rows.is_empty() {
        w.write_record(RESULT_COLUMNS)
            .map_err(|e| CliError::at(path, e.into()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| CliError::at(path, e.into()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_results(path: &Path) -> CliResult<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::at(path, e.into()))?;
    let headers = r.headers().map_err(|e| CliError::at(path, e.into()))?;
    if headers.iter().ne(RESULT_COLUMNS) {
        return Err(CliError::Data(format!(
            "{}: unexpected columns; expected {}",
            path.display(),
            RESULT_COLUMNS.join(",")
        )));
    }
    r.deserialize()
        .collect::<Result<Vec<ResultRow>, _>>()
        .map_err(|e| CliError::at(path, e.into()))
}

/// Rows sharing everything but the repetition.
fn group_key(r: &ResultRow) -> (usize, String) {
    (r.point, r.label.clone())
}

/// Aggregates per (grid point, label): mean, sample std and the error-bar
/// half-width `2·std`.
pub fn summary_csv(rows: &[ResultRow]) -> String {
    let mut keys: Vec<(usize, String)> = Vec::new();
    for r in rows {
        let k = group_key(r);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut out = String::from(
        "point,rows,cols,true_rank,density,noise,level,algorithm,label,runs,failures,\
         mean_relative_error,std_relative_error,half_width,mean_relative_error_clean,\
         mean_factor_sparsity,std_factor_sparsity,mean_wall_time_s\n",
    );
    for k in keys {
        let group: Vec<&ResultRow> = rows.iter().filter(|r| group_key(r) == k).collect();
        let ok: Vec<&&ResultRow> = group.iter().filter(|r| r.status == "ok").collect();
        let col = |f: fn(&ResultRow) -> Option<f64>| -> Vec<f64> {
            ok.iter().filter_map(|r| f(r)).collect()
        };
        let err = col(|r| r.relative_error);
        let sp = col(|r| r.factor_sparsity);
        let g = group[0];
        out.push_str(&format!(
            "{},{},{},{},{:?},{},{:?},{},{},{},{},{},{},{},{},{},{},{}\n",
            g.point,
            g.rows,
            g.cols,
            g.true_rank,
            g.density,
            g.noise,
            g.level,
            g.algorithm,
            csv_field(&g.label),
            ok.len(),
            group.len() - ok.len(),
            fmt_opt(mean(&err)),
            fmt_opt(std_dev(&err)),
            fmt_opt(std_dev(&err).map(|s| 2.0 * s)),
            fmt_opt(mean(&col(|r| r.relative_error_clean))),
            fmt_opt(mean(&sp)),
            fmt_opt(std_dev(&sp)),
            fmt_opt(mean(&col(|r| r.wall_time_s))),
        ));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

type Param = (&'static str, fn(&ResultRow) -> f64);

const PARAMS: [Param; 5] = [
    ("noise level", |r| r.level),
    ("density", |r| r.density),
    ("rank", |r| r.true_rank as f64),
    ("rows", |r| r.rows as f64),
    ("cols", |r| r.cols as f64),
];

fn distinct(rows: &[ResultRow], f: fn(&ResultRow) -> f64) -> usize {
    rows.iter()
        .map(|r| f(r).to_bits())
        .collect::<BTreeSet<_>>()
        .len()
}

/// Series of `(x, mean, 2·std)` for one metric. The x axis is the first
/// parameter that varies; other varying parameters split the series.
fn series_for(rows: &[ResultRow], metric: fn(&ResultRow) -> Option<f64>) -> (String, Vec<Series>) {
    let varying: Vec<&Param> = PARAMS.iter().filter(|p| distinct(rows, p.1) > 1).collect();
    let (xname, xf) = varying.first().map_or(PARAMS[0], |p| **p);
    let extra: Vec<&Param> = varying.iter().skip(1).copied().collect();
    let name_of = |r: &ResultRow| {
        let mut n = r.label.clone();
        for (pname, f) in &extra {
            n.push_str(&format!(" {pname}={}", f(r)));
        }
        if r.noise != "none" && distinct_noise(rows) > 1 {
            n.push_str(&format!(" {}", r.noise));
        }
        n
    };
    let mut names: Vec<String> = Vec::new();
    for r in rows {
        let n = name_of(r);
        if !names.contains(&n) {
            names.push(n);
        }
    }
    let series = names
        .into_iter()
        .map(|name| {
            let mine: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.status == "ok" && name_of(r) == name)
                .collect();
            let xs: BTreeSet<u64> = mine.iter().map(|r| xf(r).to_bits()).collect();
            let mut points: Vec<(f64, f64, f64)> = xs
                .into_iter()
                .filter_map(|xb| {
                    let vals: Vec<f64> = mine
                        .iter()
                        .filter(|r| xf(r).to_bits() == xb)
                        .filter_map(|r| metric(r))
                        .collect();
                    Some((f64::from_bits(xb), mean(&vals)?, 2.0 * std_dev(&vals)?))
                })
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { name, points }
        })
        .collect();
    (xname.to_owned(), series)
}

fn distinct_noise(rows: &[ResultRow]) -> usize {
    rows.iter()
        .map(|r| r.noise.as_str())
        .collect::<BTreeSet<_>>()
        .len()
}

/// Writes `error.svg` and `sparsity.svg` into `dir`.
pub fn write_plots(rows: &[ResultRow], dir: &Path) -> CliResult<()> {
    let title = rows.first().map_or("experiment", |r| r.experiment.as_str());
    let (x, err) = series_for(rows, |r| r.relative_error);
    files::write_text(
        &dir.join("error.svg"),
        &line_plot(title, &x, "relative Frobenius error", &err),
    )?;
    let (x, sp) = series_for(rows, |r| r.factor_sparsity);
    files::write_text(
        &dir.join("sparsity.svg"),
        &line_plot(title, &x, "factor sparsity", &sp),
    )
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true)))]
pub struct ExperimentArgs {
    /// TOML experiment config.
    #[arg(group = "source")]
    pub config: Option<PathBuf>,
    /// Redraw plots from an existing results.csv instead of running.
    #[arg(long, group = "source", value_name = "RESULTS_CSV")]
    pub replot: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Skip the SVG plots.
    #[arg(long)]
    pub no_plot: bool,
    /// Validate the config and print the run count without running.
    #[arg(long)]
    pub dry_run: bool,
}

pub fn experiment(args: &ExperimentArgs, seed: Option<u64>) -> CliResult<()> {
    if let Some(results) = &args.replot {
        let rows = read_results(results)?;
        let dir = match &args.out {
            Some(d) => d.clone(),
            None => results.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        files::create_dir(&dir)?;
        return write_plots(&rows, &dir);
    }
    let path = args.config.as_ref().expect("clap requires a source");
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if args.dry_run {
        let points = cfg.grid().len();
        println!(
            "{}: {points} grid points x {} repetitions x {} algorithms = {} runs",
            cfg.name,
            cfg.repetitions,
            cfg.algorithms.len(),
            points * cfg.repetitions * cfg.algorithms.len()
        );
        return Ok(());
    }
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(&cfg.name));
    files::create_dir(&dir)?;

    let raw: toml::Value = toml::from_str(&text).expect("config parsed above");
    let algorithms: Vec<_> = cfg
        .algorithms
        .iter()
        .map(|a| {
            let mut o = options_json(&a.options(Some(1), cfg.seed).expect("validated"));
            o["rank"] = a.rank.map_or(json!("true_rank"), |r| json!(r));
            o["seed"] = json!("per run");
            json!({"label": a.display_label(), "options": o})
        })
        .collect();
    let grid: Vec<_> = cfg
        .grid()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            json!({
                "point": i,
                "rows": p.rows,
                "cols": p.cols,
                "rank": p.rank,
                "density": p.density,
                "noise": p.noise.map(|n| json!({"kind": n.kind.name(), "level": n.level})),
            })
        })
        .collect();
    let manifest = json!({
        "command": "experiment",
        "version": env!("CARGO_PKG_VERSION"),
        "name": cfg.name,
        "seed": cfg.seed,
        "repetitions": cfg.repetitions,
        "integer_levels": cfg.data.integer_levels,
        "run_seed": "derive_seed(derive_seed(seed, point), rep)",
        "config": raw,
        "algorithms": algorithms,
        "grid": grid,
        "results_columns": RESULT_COLUMNS,
    });
    files::write_json(&dir.join("manifest.json"), &manifest)?;

    let start = Instant::now();
    let rows = run(&cfg);
    let results = dir.join("results.csv");
    write_results(&results, &rows)?;
    let rows = read_results(&results)?;
    files::write_text(&dir.join("summary.csv"), &summary_csv(&rows))?;
    if cfg.plot && !args.no_plot {
        write_plots(&rows, &dir)?;
    }
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    info!(
        "{} runs in {:.1} s, results in {}",
        rows.len(),
        start.elapsed().as_secs_f64(),
        dir.display()
    );
    if failed > 0 {
        return Err(CliError::Runtime(format!(
            "{failed} of {} runs failed; see the status column of {}",
            rows.len(),
            results.display()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG: &str = r#"
name = "tiny"
repetitions = 3
seed = 4

[data]
rows = 12
cols = 10
rank = 2
density = [0.3, 0.5]
noise = "tropical-flip"
level = [0.0, 0.1]

[[algorithm]]
name = "capricorn"

[[algorithm]]
name = "cancer"
cycles = 2
"#;

    #[test]
    fn grid_expansion() {
        let cfg = ExperimentConfig::parse(CONFIG).unwrap();
        let g = cfg.grid();
        assert_eq!(g.len(), 4);
        assert_eq!(g[1].density, 0.3);
        assert_eq!(g[1].noise.unwrap().level, 0.1);
        assert_eq!(g[2].density, 0.5);
    }

    #[test]
    fn defaults_and_validation() {
        let cfg = ExperimentConfig::parse(
            "name='x'\n[data]\nrows=4\ncols=4\nrank=1\ndensity=0.5\n[[algorithm]]\nname='cancer'\n",
        )
        .unwrap();
        assert_eq!(cfg.repetitions, 10);
        assert!(cfg.plot);
        assert_eq!(cfg.grid()[0].noise, None);
        for bad in [
            "name='x'\nrepetitions=0\n[data]\nrows=4\ncols=4\nrank=1\ndensity=0.5\n[[algorithm]]\nname='cancer'\n",
            "name='x'\n[data]\nrows=4\ncols=4\nrank=1\ndensity=0.5\nlevel=0.1\n[[algorithm]]\nname='cancer'\n",
            "name='x'\n[data]\nrows=4\ncols=4\nrank=1\ndensity=0.5\n[[algorithm]]\nname='svd'\n",
            "name='x'\n[data]\nrows=4\ncols=4\nrank=1\ndensity=[]\n[[algorithm]]\nname='cancer'\n",
            "name='x'\n[data]\nrows=4\ncols=4\nrank=1\ndensity=0.5\ncolour=1\n[[algorithm]]\nname='cancer'\n",
            "name='x'\n[data]\nrows=4\ncols=4\nrank=1\ndensity=0.5\n[[algorithm]]\nname='cancer'\n[[algorithm]]\nname='cancer'\n",
        ] {
            let e = ExperimentConfig::parse(bad).unwrap_err();
            assert_eq!(e.exit_code(), 1, "{bad}");
        }
    }

    #[test]
    fn run_is_ordered_and_summarized() {
        let cfg = ExperimentConfig::parse(CONFIG).unwrap();
        let rows = run(&cfg);
        assert_eq!(rows.len(), 4 * 3 * 2);
        assert!(rows.iter().all(|r| r.status == "ok"));
        for (k, r) in rows.iter().enumerate() {
            assert_eq!(r.point, k / 6);
            assert_eq!(r.rep, (k / 2) % 3);
        }
        // Both algorithms see the same instance.
        assert_eq!(rows[0].noise_floor, rows[1].noise_floor);
        assert_eq!(rows[0].seed, rows[1].seed);

        let summary = summary_csv(&rows);
        let lines: Vec<&str> = summary.lines().collect();
        assert_eq!(lines.len(), 1 + 8);
        let head: Vec<&str> = lines[0].split(',').collect();
        let (std_i, hw_i) = (
            head.iter()
                .position(|h| *h == "std_relative_error")
                .unwrap(),
            head.iter().position(|h| *h == "half_width").unwrap(),
        );
        for l in &lines[1..] {
            let f: Vec<&str> = l.split(',').collect();
            let (s, h): (f64, f64) = (f[std_i].parse().unwrap(), f[hw_i].parse().unwrap());
            assert_eq!(h, 2.0 * s);
        }
    }

    #[test]
    fn results_round_trip() {
        let cfg = ExperimentConfig::parse(CONFIG).unwrap();
        let rows = run(&cfg);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("results.csv");
        write_results(&p, &rows).unwrap();
        let back = read_results(&p).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.relative_error, b.relative_error);
            assert_eq!(a.wall_time_s, b.wall_time_s);
            assert_eq!(a.label, b.label);
        }
    }

    #[test]
    fn series_pick_varying_axis() {
        let cfg = ExperimentConfig::parse(CONFIG).unwrap();
        let rows = run(&cfg);
        let (x, s) = series_for(&rows, |r| r.relative_error);
        assert_eq!(x, "noise level");
        assert_eq!(s.len(), 4);
        assert!(s[0].name.starts_with("capricorn density=0.3"));
        assert_eq!(s[0].points.len(), 2);
    }
}
