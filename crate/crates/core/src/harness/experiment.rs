use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bahadur::{diagnose_ecdf, BahadurConstants, BahadurDiagnostics, DiagnosticsModel};
use crate::empirical::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::processes::{Marginal, ProcessConfig, ProcessSpec};
use crate::rng::{derive_seed, RNG_ALGORITHM};

/// Default ceiling on `sum(n) * reps` before a run needs `allow_large`.
pub const DEFAULT_SAMPLE_BUDGET: u64 = 1_000_000_000;

/// Per-path statistic aggregated across replications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `|R_n|`.
    AbsRemainder,
    OscillationNarrow,
    OscillationWide,
    SupDevWide,
    /// `|xi_{p,n} - xi_p|`.
    QuantileError,
}

impl Statistic {
    pub fn of(&self, d: &BahadurDiagnostics) -> f64 {
        match self {
            Statistic::AbsRemainder => d.remainder.abs(),
            Statistic::OscillationNarrow => d.oscillation_narrow,
            Statistic::OscillationWide => d.oscillation_wide,
            Statistic::SupDevWide => d.sup_dev_wide,
            Statistic::QuantileError => d.quantile_error,
        }
    }

    /// Envelope a statistic is compared with unless overridden.
    pub fn default_envelope(&self) -> EnvelopeChoice {
        match self {
            Statistic::AbsRemainder | Statistic::OscillationNarrow => {
                EnvelopeChoice::OscillationNarrow
            }
            Statistic::OscillationWide => EnvelopeChoice::OscillationWide,
            Statistic::SupDevWide => EnvelopeChoice::DeviationWide,
            Statistic::QuantileError => EnvelopeChoice::QuantileError,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeChoice {
    OscillationNarrow,
    OscillationWide,
    DeviationWide,
    QuantileError,
}

impl EnvelopeChoice {
    pub fn of(&self, d: &BahadurDiagnostics) -> f64 {
        match self {
            EnvelopeChoice::OscillationNarrow => d.envelopes.oscillation_narrow,
            EnvelopeChoice::OscillationWide => d.envelopes.oscillation_wide,
            EnvelopeChoice::DeviationWide => d.envelopes.deviation_wide,
            EnvelopeChoice::QuantileError => d.envelopes.quantile_error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    #[default]
    Median,
    Q90,
    Q99,
    Max,
}

impl Aggregate {
    /// Order-statistic aggregate, `inf{x : F_reps(x) >= level}`.
    pub fn apply(&self, values: &[f64]) -> f64 {
        let mut v = values.to_vec();
        v.sort_unstable_by(f64::total_cmp);
        let level = match self {
            Aggregate::Median => 0.5,
            Aggregate::Q90 => 0.9,
            Aggregate::Q99 => 0.99,
            Aggregate::Max => return *v.last().expect("at least one replication"),
        };
        EmpiricalCdf::new(v)
            .and_then(|e| e.quantile(level))
            .map(|q| q.value)
            .expect("finite replication statistics")
    }
}

/// `2^lo, 2^(lo+1), ..., 2^hi`.
pub fn geometric_grid(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|e| 1usize << e).collect()
}

fn default_grid() -> Vec<usize> {
    geometric_grid(10, 17)
}

fn default_p_list() -> Vec<f64> {
    vec![0.5]
}

fn default_reps() -> usize {
    200
}

fn default_budget() -> u64 {
    DEFAULT_SAMPLE_BUDGET
}

fn default_process() -> ProcessConfig {
    ProcessConfig::iid(Marginal::standard_uniform())
}

/// A Monte-Carlo experiment over an `n`-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_process")]
    pub process: ProcessConfig,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default = "default_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub statistic: Statistic,
    #[serde(default)]
    pub aggregate: Aggregate,
    /// Overrides the statistic's default envelope.
    #[serde(default)]
    pub envelope: Option<EnvelopeChoice>,
    #[serde(default)]
    pub constants: BahadurConstants,
    #[serde(default = "default_budget")]
    pub sample_budget: u64,
    #[serde(default)]
    pub allow_large: bool,
}

impl RunConfig {
    pub fn new(process: ProcessConfig, statistic: Statistic) -> Self {
        RunConfig {
            process,
            p_list: default_p_list(),
            n_grid: default_grid(),
            reps: default_reps(),
            master_seed: 0,
            statistic,
            aggregate: Aggregate::default(),
            envelope: None,
            constants: BahadurConstants::default(),
            sample_budget: DEFAULT_SAMPLE_BUDGET,
            allow_large: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn envelope_choice(&self) -> EnvelopeChoice {
        self.envelope.unwrap_or_else(|| self.statistic.default_envelope())
    }

    pub fn total_samples(&self) -> u64 {
        self.n_grid.iter().map(|&n| n as u64).sum::<u64>() * self.reps as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid is empty".into()));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < crate::bahadur::MIN_WIDE_WINDOW_N) {
            return Err(Error::Config(format!(
                "n_grid entry {n} is below the minimum of {}",
                crate::bahadur::MIN_WIDE_WINDOW_N
            )));
        }
        if self.p_list.is_empty() {
            return Err(Error::Config("p_list is empty".into()));
        }
        if let Some(p) = self.p_list.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::Config(format!("p = {p} outside (0,1)")));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        self.constants.validate()?;
        let requested = self.total_samples();
        if requested > self.sample_budget && !self.allow_large {
            return Err(Error::Budget {
                requested,
                budget: self.sample_budget,
            });
        }
        Ok(())
    }

    /// SHA-256 of the config's canonical (sorted-key) JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_value(self)
            .map(|v| v.to_string())
            .unwrap_or_default();
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config_hash: String,
    pub master_seed: u64,
    pub version: String,
    pub rng: String,
    pub spec_id: String,
    pub statistic: Statistic,
    pub aggregate: Aggregate,
    pub envelope: EnvelopeChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub p: f64,
    pub statistic: f64,
    pub envelope: f64,
    pub violation_fraction: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub metadata: ReportMetadata,
    pub rows: Vec<ReportRow>,
}

impl ReportTable {
    pub fn rows_for(&self, p: f64) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.p == p)
    }
}

/// Table plus every per-replication diagnostic, ordered by
/// `(n, replication, p)`.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: ReportTable,
    pub replications: Vec<BahadurDiagnostics>,
}

/// Seed of replication `rep` at sample size `n`.
pub fn replication_seed(master_seed: u64, n: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(master_seed, n as u64), rep as u64)
}

pub fn run_experiment(config: &RunConfig) -> Result<ReportTable> {
    run_experiment_detailed(config).map(|out| out.table)
}

/// Runs every `(n, p)` cell. Replications are simulated in parallel on the
/// current rayon pool and reduced in replication order, so the output is a
/// function of the config alone.
pub fn run_experiment_detailed(config: &RunConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let spec = ProcessSpec::new(config.process.clone())?;
    let c3 = spec.mixing().c3()?;
    let model = DiagnosticsModel {
        marginal: spec.marginal(),
        c3,
        constants: config.constants,
    };
    let envelope = config.envelope_choice();

    let mut rows = Vec::with_capacity(config.n_grid.len() * config.p_list.len());
    let mut replications = Vec::new();
    for &n in &config.n_grid {
        // per_rep[r][j]: diagnostics of replication r at p_list[j]
        let per_rep: Vec<Vec<BahadurDiagnostics>> = (0..config.reps)
            .into_par_iter()
            .map(|rep| {
                let path = spec.generate(n, replication_seed(config.master_seed, n, rep))?;
                let ecdf = EmpiricalCdf::from_path(&path)?;
                config
                    .p_list
                    .iter()
                    .map(|&p| diagnose_ecdf(&ecdf, &path, &model, p))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;

        for (j, &p) in config.p_list.iter().enumerate() {
            let stats: Vec<f64> = per_rep.iter().map(|r| config.statistic.of(&r[j])).collect();
            let violations = per_rep
                .iter()
                .filter(|r| config.statistic.of(&r[j]) > envelope.of(&r[j]))
                .count();
            rows.push(ReportRow {
                n,
                p,
                statistic: config.aggregate.apply(&stats),
                envelope: envelope.of(&per_rep[0][j]),
                violation_fraction: violations as f64 / config.reps as f64,
                reps: config.reps,
            });
        }
        replications.extend(per_rep.into_iter().flatten());
    }

    Ok(ExperimentOutput {
        table: ReportTable {
            metadata: ReportMetadata {
                config_hash: config.hash(),
                master_seed: config.master_seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                rng: RNG_ALGORITHM.to_string(),
                spec_id: spec.id().to_string(),
                statistic: config.statistic,
                aggregate: config.aggregate,
                envelope,
            },
            rows,
        },
        replications,
    })
}

/// Runs on a dedicated pool with `threads` workers.
pub fn run_experiment_with_threads(config: &RunConfig, threads: usize) -> Result<ExperimentOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment_detailed(config))
}
