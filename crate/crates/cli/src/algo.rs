//! Algorithm selection shared by `factorize`, `predict` and experiment
//! configs. Unset fields fall back to the per-algorithm defaults.

use clap::Args;
use maxtimes::cancer::{Abscissae, UpdateRule};
use maxtimes::{AdditiveObjective, Algorithm, CancerParams, CapricornParams, FactorizeOptions};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgoSpec {
    /// capricorn or cancer.
    #[arg(long = "algorithm", default_value = "capricorn")]
    #[serde(rename = "name")]
    pub name: String,
    /// Series label in experiment output (defaults to the algorithm name).
    #[arg(skip)]
    #[serde(default)]
    pub label: Option<String>,
    /// Number of rank-1 blocks.
    #[arg(long)]
    #[serde(default)]
    pub rank: Option<usize>,
    /// Passes over all blocks (M).
    #[arg(long)]
    #[serde(default)]
    pub cycles: Option<usize>,
    /// frobenius, l1 or js.
    #[arg(long)]
    #[serde(default)]
    pub objective: Option<String>,
    /// Divide the input by its largest value before fitting.
    #[arg(long)]
    #[serde(default)]
    pub rescale: Option<bool>,

    #[arg(long, help_heading = "Capricorn")]
    #[serde(default)]
    pub bucket_size: Option<usize>,
    #[arg(long, help_heading = "Capricorn")]
    #[serde(default)]
    pub delta: Option<f64>,
    #[arg(long, help_heading = "Capricorn")]
    #[serde(default)]
    pub theta: Option<f64>,
    #[arg(long, help_heading = "Capricorn")]
    #[serde(default)]
    pub tau: Option<f64>,

    #[arg(long, help_heading = "Cancer")]
    #[serde(default)]
    pub max_degree: Option<usize>,
    #[arg(long, help_heading = "Cancer")]
    #[serde(default)]
    pub update_fraction: Option<f64>,
    /// equispaced or random.
    #[arg(long, help_heading = "Cancer")]
    #[serde(default)]
    pub abscissae: Option<String>,
    #[arg(long, help_heading = "Cancer")]
    #[serde(default)]
    pub upper: Option<f64>,
    #[arg(long, help_heading = "Cancer")]
    #[serde(default)]
    pub seed_empty_blocks: Option<bool>,
    /// all-improving or single.
    #[arg(long, help_heading = "Cancer")]
    #[serde(default)]
    pub update_rule: Option<String>,
    #[arg(long, help_heading = "Cancer")]
    #[serde(default)]
    pub polish_steps: Option<usize>,
}

impl AlgoSpec {
    pub fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.name.clone())
    }

    fn capricorn_flags(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.bucket_size.is_some() {
            v.push("bucket-size");
        }
        if self.delta.is_some() {
            v.push("delta");
        }
        if self.theta.is_some() {
            v.push("theta");
        }
        if self.tau.is_some() {
            v.push("tau");
        }
        v
    }

    fn cancer_flags(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.max_degree.is_some() {
            v.push("max-degree");
        }
        if self.update_fraction.is_some() {
            v.push("update-fraction");
        }
        if self.abscissae.is_some() {
            v.push("abscissae");
        }
        if self.upper.is_some() {
            v.push("upper");
        }
        if self.seed_empty_blocks.is_some() {
            v.push("seed-empty-blocks");
        }
        if self.update_rule.is_some() {
            v.push("update-rule");
        }
        if self.polish_steps.is_some() {
            v.push("polish-steps");
        }
        v
    }

    /// Resolves to full options. `default_rank` is used when no rank is set.
    pub fn options(&self, default_rank: Option<usize>, seed: u64) -> CliResult<FactorizeOptions> {
        let rank = self
            .rank
            .or(default_rank)
            .ok_or_else(|| CliError::Usage("--rank is required".into()))?;
        if rank == 0 {
            return Err(CliError::Usage("rank must be >= 1".into()));
        }
        let mut opts = match self.name.to_ascii_lowercase().as_str() {
            "capricorn" => {
                if let Some(flag) = self.cancer_flags().first() {
                    return Err(CliError::Usage(format!(
                        "{flag} only applies to the cancer algorithm"
                    )));
                }
                let d = CapricornParams::default();
                let p = CapricornParams {
                    bucket_size: self.bucket_size.unwrap_or(d.bucket_size),
                    delta: self.delta.unwrap_or(d.delta),
                    theta: self.theta.unwrap_or(d.theta),
                    tau: self.tau.unwrap_or(d.tau),
                };
                p.validate()?;
                let mut o = FactorizeOptions::capricorn(rank);
                o.algorithm = Algorithm::Capricorn(p);
                o
            }
            "cancer" => {
                if let Some(flag) = self.capricorn_flags().first() {
                    return Err(CliError::Usage(format!(
                        "{flag} only applies to the capricorn algorithm"
                    )));
                }
                let d = CancerParams::default();
                let p = CancerParams {
                    max_degree: self.max_degree.unwrap_or(d.max_degree),
                    update_fraction: self.update_fraction.unwrap_or(d.update_fraction),
                    abscissae: match &self.abscissae {
                        Some(s) => parse_abscissae(s)?,
                        None => d.abscissae,
                    },
                    upper: self.upper.unwrap_or(d.upper),
                    seed_empty_blocks: self.seed_empty_blocks.unwrap_or(d.seed_empty_blocks),
                    update_rule: match &self.update_rule {
                        Some(s) => parse_update_rule(s)?,
                        None => d.update_rule,
                    },
                    polish_steps: self.polish_steps.unwrap_or(d.polish_steps),
                };
                p.validate()?;
                let mut o = FactorizeOptions::cancer(rank);
                o.algorithm = Algorithm::Cancer(p);
                o
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown algorithm {other:?} (expected capricorn or cancer)"
                )))
            }
        };
        if let Some(c) = self.cycles {
            if c == 0 {
                return Err(CliError::Usage("cycles must be >= 1".into()));
            }
            opts.cycles = c;
        }
        if let Some(obj) = &self.objective {
            opts.objective = obj
                .parse::<AdditiveObjective>()
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        if let Some(r) = self.rescale {
            opts.rescale = r;
        }
        opts.seed = seed;
        Ok(opts)
    }
}

fn parse_abscissae(s: &str) -> CliResult<Abscissae> {
    match s.to_ascii_lowercase().as_str() {
        "equispaced" => Ok(Abscissae::Equispaced),
        "random" => Ok(Abscissae::Random),
        other => Err(CliError::Usage(format!(
            "unknown abscissae {other:?} (expected equispaced or random)"
        ))),
    }
}

fn parse_update_rule(s: &str) -> CliResult<UpdateRule> {
    match s.to_ascii_lowercase().replace('_', "-").as_str() {
        "all-improving" | "all" => Ok(UpdateRule::AllImproving),
        "single" | "single-element" => Ok(UpdateRule::SingleElement),
        other => Err(CliError::Usage(format!(
            "unknown update rule {other:?} (expected all-improving or single)"
        ))),
    }
}

/// Every resolved parameter, for summaries and manifests.
pub fn options_json(o: &FactorizeOptions) -> Value {
    let params = match o.algorithm {
        Algorithm::Capricorn(p) => json!({
            "bucket_size": p.bucket_size,
            "delta": p.delta,
            "theta": p.theta,
            "tau": p.tau,
        }),
        Algorithm::Cancer(p) => json!({
            "max_degree": p.max_degree,
            "update_fraction": p.update_fraction,
            "abscissae": match p.abscissae {
                Abscissae::Equispaced => "equispaced",
                Abscissae::Random => "random",
            },
            "upper": p.upper,
            "seed_empty_blocks": p.seed_empty_blocks,
            "update_rule": match p.update_rule {
                UpdateRule::AllImproving => "all-improving",
                UpdateRule::SingleElement => "single",
            },
            "polish_steps": p.polish_steps,
        }),
    };
    json!({
        "algorithm": o.algorithm.name(),
        "rank": o.rank,
        "cycles": o.cycles,
        "objective": o.objective.to_string(),
        "rescale": o.rescale,
        "seed": o.seed,
        "params": params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(name: &str) -> AlgoSpec {
        AlgoSpec {
            name: name.into(),
            ..Default::default()
        }
    }

    #[test]
    fn capricorn_defaults() {
        let o = spec("capricorn").options(Some(3), 5).unwrap();
        let v = options_json(&o);
        assert_eq!(v["cycles"], 4);
        assert_eq!(v["objective"], "l1");
        assert_eq!(v["params"]["bucket_size"], 3);
        assert_eq!(v["params"]["delta"], 0.01);
        assert_eq!(v["params"]["theta"], 0.5);
        assert_eq!(v["params"]["tau"], 0.5);
        assert_eq!(v["seed"], 5);
    }

    #[test]
    fn cancer_defaults() {
        let v = options_json(&spec("Cancer").options(Some(2), 0).unwrap());
        assert_eq!(v["cycles"], 14);
        assert_eq!(v["params"]["max_degree"], 16);
        assert_eq!(v["params"]["update_fraction"], 0.1);
        assert_eq!(v["rescale"], true);
    }

    #[test]
    fn rejects_bad_combinations() {
        let mut s = spec("capricorn");
        s.max_degree = Some(4);
        assert_eq!(s.options(Some(1), 0).unwrap_err().exit_code(), 1);
        assert!(spec("svd").options(Some(1), 0).is_err());
        assert!(spec("cancer").options(None, 0).is_err());
        let mut s = spec("cancer");
        s.objective = Some("hinge".into());
        assert!(s.options(Some(1), 0).is_err());
        let mut s = spec("capricorn");
        s.tau = Some(2.0);
        assert_eq!(s.options(Some(1), 0).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn overrides_apply() {
        let mut s = spec("cancer");
        s.cycles = Some(3);
        s.objective = Some("js".into());
        s.update_rule = Some("single".into());
        let o = s.options(Some(2), 0).unwrap();
        assert_eq!(o.cycles, 3);
        assert_eq!(o.objective, AdditiveObjective::JensenShannon);
        match o.algorithm {
            Algorithm::Cancer(p) => assert_eq!(p.update_rule, UpdateRule::SingleElement),
            _ => panic!("expected cancer"),
        }
    }
}
