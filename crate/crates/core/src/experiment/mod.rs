//! Config-driven experiment suites with deterministic reports.

mod commands;
mod input;
mod suites;

pub use commands::{run_command, Command, CommandOutput, Format, SingleRunReport};
pub use input::{load_json, PathInput, StrategySpec};
pub use suites::evaluate_path;

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paths::{generate, GeneratorSpec, PathError};
use crate::strategies::StrategyError;
use crate::variation::{VariationError, VariationFunctional};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Variation(#[from] VariationError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    OracleSuite,
    DoobSuite,
    Prop1Check,
    Prop3Check,
    UpperProbTable,
    GrowthProfile,
    BorrowAudit,
}

/// Explicit seeds or a contiguous range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSet {
    List(Vec<u64>),
    Range { from: u64, count: u64 },
}

impl SeedSet {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            Self::List(v) => v.clone(),
            Self::Range { from, count } => (*from..from + count).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterGrid {
    /// Variation exponents.
    pub p: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
    /// Discretization sizes `N`.
    pub n: Vec<usize>,
    /// Mesh ladder for the quadratic-variation profile.
    pub mesh: Vec<f64>,
    pub functionals: Vec<VariationFunctional>,
    pub intervals: Vec<(f64, f64)>,
    /// Bound level `L` for dyadic mixtures; defaults to the path's own.
    pub level: Option<u32>,
    /// Finest dyadic scale; defaults to the one implied by the path.
    pub j_max: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Each generator is run once per seed; its own seed is ignored.
    pub generators: Vec<GeneratorSpec>,
    pub seeds: SeedSet,
    #[serde(default)]
    pub grid: ParameterGrid,
    /// Output directory, overridden by `--out`.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.generators.is_empty() {
            return bad("at least one generator is required");
        }
        if self.seeds.seeds().is_empty() {
            return bad("seed set is empty");
        }
        let g = &self.grid;
        match self.kind {
            ExperimentKind::DoobSuite if g.intervals.is_empty() => bad("doob-suite needs grid.intervals"),
            ExperimentKind::Prop3Check if g.epsilon.is_empty() || g.delta.is_empty() || g.n.is_empty() => {
                bad("prop3-check needs grid.epsilon, grid.delta and grid.n")
            }
            ExperimentKind::Prop1Check if g.functionals.is_empty() => bad("prop1-check needs grid.functionals"),
            ExperimentKind::GrowthProfile if g.p.is_empty() || g.n.is_empty() => {
                bad("growth-profile needs grid.p and grid.n")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub key: String,
    pub generator: usize,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub summary: Summary,
    pub cases: Vec<CaseReport>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

/// Runs every `(generator, seed)` pair, on `jobs` threads if given.
/// Cases are sorted by key, so the report does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<RunReport> {
    config.validate()?;
    let seeds = config.seeds.seeds();
    let work: Vec<(usize, u64)> =
        (0..config.generators.len()).flat_map(|g| seeds.iter().map(move |&s| (g, s))).collect();

    let run = || -> Result<Vec<Vec<CaseReport>>> {
        work.par_iter()
            .map(|&(g, seed)| {
                let spec = config.generators[g].clone().with_seed(seed);
                let path = generate(&spec)?;
                evaluate_path(config.kind, &config.grid, &path, g, seed)
            })
            .collect()
    };
    let nested = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| ExperimentError::Config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let mut cases: Vec<CaseReport> = nested.into_iter().flatten().collect();
    cases.sort_by(|a, b| a.key.cmp(&b.key));
    let passed = cases.iter().filter(|c| c.pass).count();
    Ok(RunReport {
        kind: config.kind,
        config: config.clone(),
        summary: Summary { cases: cases.len(), passed, failed: cases.len() - passed },
        cases,
    })
}

/// CSV for plotting. `series` is a metric name (`key,<metric>` rows) or
/// `all` (long format `key,metric,value`).
pub fn emit_plot_data(report: &RunReport, series: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| ExperimentError::Config(format!("csv: {e}"));
    if series == "all" {
        w.write_record(["key", "metric", "value"]).map_err(csv_err)?;
        for c in &report.cases {
            for (m, v) in &c.metrics {
                w.write_record([c.key.as_str(), m.as_str(), &v.to_string()]).map_err(csv_err)?;
            }
        }
    } else {
        if !report.cases.iter().any(|c| c.metrics.contains_key(series)) {
            return Err(ExperimentError::Config(format!("no case has metric {series:?}")));
        }
        w.write_record(["key", series]).map_err(csv_err)?;
        for c in &report.cases {
            if let Some(v) = c.metrics.get(series) {
                w.write_record([c.key.as_str(), &v.to_string()]).map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
