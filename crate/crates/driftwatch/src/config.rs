//! Experiment configuration: the built-in budgets and drift grids, a TOML
//! file layer, and the merge rule (defaults, then file, then command line).

use std::path::{Path, PathBuf};

use driftwatch_core::{DistanceMetric, Method, MetricKind};
use serde::Deserialize;

use crate::{HarnessError, Result};

/// One detector under test: a display name plus its row budget.
///
/// `n * k` is the per-set row count. Permutation testing stores its pooled
/// budget as `n = nk, k = 1`; the KS screen does the same.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApproachSpec {
    pub name: &'static str,
    pub method: Method,
    pub metric: Option<MetricKind>,
    pub n: usize,
    pub k: usize,
    pub permutations: usize,
}

impl ApproachSpec {
    pub fn rows(&self) -> usize {
        self.n * self.k
    }

    pub fn metric(&self) -> Option<DistanceMetric> {
        self.metric.map(|kind| match kind {
            MetricKind::Emd => DistanceMetric::emd(),
            MetricKind::Mmd => DistanceMetric::mmd(),
            MetricKind::Kl => DistanceMetric::kl(),
        })
    }
}

/// The seven standard approaches with their matched iteration budgets.
pub fn standard_approaches() -> Vec<ApproachSpec> {
    use Method::*;
    let bd = |name, metric, n, k| ApproachSpec {
        name,
        method: Bd,
        metric: Some(metric),
        n,
        k,
        permutations: 100,
    };
    let pt = |name, metric, nk| ApproachSpec {
        name,
        method: Pt,
        metric: Some(metric),
        n: nk,
        k: 1,
        permutations: 100,
    };
    vec![
        bd("emd-bd", MetricKind::Emd, 50, 100),
        bd("mmd-bd", MetricKind::Mmd, 100, 100),
        bd("kl-bd", MetricKind::Kl, 100, 100),
        pt("emd-pt", MetricKind::Emd, 76),
        pt("mmd-pt", MetricKind::Mmd, 100),
        pt("kl-pt", MetricKind::Kl, 100),
        ApproachSpec {
            name: "ks-bc",
            method: KsBc,
            metric: None,
            n: 87_900,
            k: 1,
            permutations: 100,
        },
    ]
}

/// Row budget substituted for the KS screen under the fast profile.
pub const FAST_KS_ROWS: usize = 10_000;
/// Mean-drift grid substituted for the KS screen under the fast profile,
/// sized so its per-dimension power stays saturated at the smaller budget.
pub const FAST_KS_MEAN_ZETAS: [f64; 2] = [0.05, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Csv,
    Json,
    Plotdata,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "plotdata" => Ok(OutputFormat::Plotdata),
            other => Err(HarnessError::Invalid {
                what: "format",
                detail: format!("unknown output format {other:?} (csv, json, plotdata)"),
            }),
        }
    }
}

/// Everything a simulation run needs. Built from [`ExperimentConfig::default`],
/// optionally overlaid by a TOML file and then by command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub simulations: usize,
    pub alpha: f64,
    pub dims: usize,
    /// Shrinks the KS screen budget; recorded in emitted report headers.
    pub fast: bool,
    /// Adds wall-time columns; off by default so outputs are seed-stable.
    pub timings: bool,
    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    pub approaches: Vec<ApproachSpec>,
    pub mean_zetas: Vec<f64>,
    pub var_zetas: Vec<f64>,
    pub cov_zetas: Vec<f64>,
    /// Which experiment `simulate` runs: 1 = detector grid, 2 = fusion grid.
    pub problem: u8,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            simulations: 100,
            alpha: 0.05,
            dims: 100,
            fast: false,
            timings: false,
            output_dir: PathBuf::from("results"),
            formats: vec![OutputFormat::Csv, OutputFormat::Json, OutputFormat::Plotdata],
            approaches: standard_approaches(),
            mean_zetas: vec![0.01, 0.02, 0.03, 0.04],
            var_zetas: vec![1.005, 1.01, 1.05, 1.10],
            cov_zetas: vec![0.05, 0.06, 0.07, 0.08],
            problem: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.simulations == 0 {
            return Err(HarnessError::Invalid {
                what: "simulations",
                detail: "at least one simulation per cell is required".into(),
            });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(HarnessError::Invalid {
                what: "alpha",
                detail: format!("must lie in (0, 1), got {}", self.alpha),
            });
        }
        if self.dims == 0 {
            return Err(HarnessError::Invalid {
                what: "dims",
                detail: "dimension must be positive".into(),
            });
        }
        if self.approaches.is_empty() {
            return Err(HarnessError::Invalid {
                what: "approaches",
                detail: "empty approach list".into(),
            });
        }
        if !matches!(self.problem, 1 | 2) {
            return Err(HarnessError::Invalid {
                what: "problem",
                detail: format!("must be 1 or 2, got {}", self.problem),
            });
        }
        Ok(())
    }

    /// Applies a parsed TOML file on top of this config.
    pub fn apply_file(&mut self, file: &ConfigFile) -> Result<()> {
        if let Some(v) = file.seed {
            self.seed = v;
        }
        if let Some(v) = file.simulations {
            self.simulations = v;
        }
        if let Some(v) = file.alpha {
            self.alpha = v;
        }
        if let Some(v) = file.dims {
            self.dims = v;
        }
        if let Some(v) = file.fast {
            self.fast = v;
        }
        if let Some(v) = file.timings {
            self.timings = v;
        }
        if let Some(ref v) = file.output_dir {
            self.output_dir = PathBuf::from(v);
        }
        if let Some(ref v) = file.formats {
            self.formats = v
                .iter()
                .map(|s| OutputFormat::parse(s))
                .collect::<Result<Vec<_>>>()?;
        }
        if let Some(ref v) = file.approaches {
            self.approaches = select_approaches(v)?;
        }
        if let Some(ref v) = file.mean_zetas {
            self.mean_zetas = v.clone();
        }
        if let Some(ref v) = file.var_zetas {
            self.var_zetas = v.clone();
        }
        if let Some(ref v) = file.cov_zetas {
            self.cov_zetas = v.clone();
        }
        if let Some(v) = file.problem {
            self.problem = v;
        }
        Ok(())
    }
}

/// Picks named rows out of the standard approach list, preserving its order.
pub fn select_approaches(names: &[String]) -> Result<Vec<ApproachSpec>> {
    let all = standard_approaches();
    let mut picked = Vec::new();
    for name in names {
        match all.iter().find(|a| a.name == name) {
            Some(a) => picked.push(*a),
            None => {
                return Err(HarnessError::Invalid {
                    what: "approach",
                    detail: format!(
                        "unknown approach {name:?} (known: {})",
                        all.iter().map(|a| a.name).collect::<Vec<_>>().join(", ")
                    ),
                })
            }
        }
    }
    Ok(picked)
}

/// The TOML schema: every key optional, kebab-case, mirroring the CLI flags.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub simulations: Option<usize>,
    pub alpha: Option<f64>,
    pub dims: Option<usize>,
    pub fast: Option<bool>,
    pub timings: Option<bool>,
    pub output_dir: Option<String>,
    pub formats: Option<Vec<String>>,
    pub approaches: Option<Vec<String>>,
    pub mean_zetas: Option<Vec<f64>>,
    pub var_zetas: Option<Vec<f64>>,
    pub cov_zetas: Option<Vec<f64>>,
    pub problem: Option<u8>,
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    toml::from_str(&text).map_err(|e| HarnessError::Invalid {
        what: "config",
        detail: format!("{}: {e}", path.display()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_the_standard_grid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.approaches.len(), 7);
        // 1 null + 4 mean + 4 var + 4 cov cells per approach.
        assert_eq!(
            cfg.mean_zetas.len() + cfg.var_zetas.len() + cfg.cov_zetas.len(),
            12
        );
        let ks = cfg.approaches.iter().find(|a| a.name == "ks-bc").unwrap();
        assert_eq!(ks.rows(), 87_900);
        let emd_pt = cfg.approaches.iter().find(|a| a.name == "emd-pt").unwrap();
        assert_eq!(emd_pt.rows(), 76);
    }

    #[test]
    fn file_overrides_defaults() {
        let file: ConfigFile = toml::from_str(
            r#"
            seed = 7
            simulations = 3
            fast = true
            approaches = ["emd-bd", "ks-bc"]
            mean-zetas = [0.5]
            output-dir = "out"
            formats = ["csv"]
            "#,
        )
        .unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.apply_file(&file).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.simulations, 3);
        assert!(cfg.fast);
        assert_eq!(cfg.approaches.len(), 2);
        assert_eq!(cfg.mean_zetas, vec![0.5]);
        assert_eq!(cfg.var_zetas.len(), 4, "untouched keys keep defaults");
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
        assert_eq!(cfg.formats, vec![OutputFormat::Csv]);
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(select_approaches(&["emd-bd".into(), "nope".into()]).is_err());
        let bad: std::result::Result<ConfigFile, _> = toml::from_str("sneed = 1");
        assert!(bad.is_err(), "unknown keys must not pass silently");
    }
}
