//! Stationary uniform-mixing sequences with exact marginals.
//!
//! Three generators are shipped, each with a known marginal and a known
//! (or dominated) mixing-coefficient sequence:
//!
//! * i.i.d. draws through the quantile function (`phi = 0`);
//! * `m`-dependent moving means of `m + 1` uniforms, whose marginal is the
//!   Bates law of order `m + 1` (`phi(n) = 0` for `n > m`);
//! * Markov copula chains: a finite chain `S_i` with uniform stationary law,
//!   `U_i = (S_i + V_i) / K` with independent uniform `V_i`, and
//!   `X_i = F^{-1}(U_i)`. Each `U_i` is exactly uniform, so `X_i ~ F`.

pub mod marginal;
pub mod markov;
pub mod mixing;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rand::distr::{Open01, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::path_rng;

pub use marginal::Marginal;
pub use markov::{phi_markov, SquareMatrix};
pub use mixing::{MixingKind, MixingProfile, PhiSequence};

/// Serializable description of a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum ProcessConfig {
    Iid {
        marginal: Marginal,
    },
    MDependent {
        m: usize,
    },
    MarkovCopula {
        transition: Vec<Vec<f64>>,
        marginal: Marginal,
    },
}

impl ProcessConfig {
    pub fn iid(marginal: Marginal) -> Self {
        ProcessConfig::Iid { marginal }
    }

    pub fn m_dependent(m: usize) -> Self {
        ProcessConfig::MDependent { m }
    }

    pub fn markov_copula(transition: &SquareMatrix, marginal: Marginal) -> Self {
        ProcessConfig::MarkovCopula {
            transition: transition.rows(),
            marginal,
        }
    }

    /// Two-state symmetric chain flipping with probability `a`.
    pub fn two_state(a: f64, marginal: Marginal) -> Self {
        Self::markov_copula(&markov::two_state(a), marginal)
    }
}

#[derive(Debug, Clone)]
enum Generator {
    Iid,
    MDependent { m: usize },
    MarkovCopula { transition: SquareMatrix },
}

/// A validated generator together with its marginal and mixing profile.
#[derive(Debug, Clone)]
pub struct ProcessSpec {
    config: ProcessConfig,
    generator: Generator,
    marginal: Marginal,
    mixing: MixingProfile,
    id: String,
}

impl ProcessSpec {
    pub fn new(config: ProcessConfig) -> Result<Self> {
        let (generator, marginal, mixing, id) = match &config {
            ProcessConfig::Iid { marginal } => {
                marginal.validate()?;
                (
                    Generator::Iid,
                    *marginal,
                    MixingProfile::zero(),
                    format!("iid-{}", marginal.name()),
                )
            }
            ProcessConfig::MDependent { m } => {
                let m = *m;
                if m == 0 {
                    return Err(Error::Argument(
                        "m-dependent generator needs m >= 1 (use iid for m = 0)".into(),
                    ));
                }
                let marginal = Marginal::Bates { k: (m + 1) as u32 };
                marginal.validate().map_err(|_| {
                    Error::Argument(format!(
                        "m = {m} exceeds the largest supported window of {}",
                        marginal::MAX_BATES_ORDER - 1
                    ))
                })?;
                (
                    Generator::MDependent { m },
                    marginal,
                    MixingProfile::m_dependent(m),
                    format!("mdep{m}"),
                )
            }
            ProcessConfig::MarkovCopula {
                transition,
                marginal,
            } => {
                marginal.validate()?;
                let transition = SquareMatrix::from_rows(transition)?;
                let mut mixing = phi_markov(&transition, markov::DEFAULT_MAX_LAG)?;
                // the emitted values generate coarser sigma-fields than the latent chain
                mixing.kind = MixingKind::UpperBound;
                let id = format!("markov{}-{}", transition.dim(), marginal.name());
                (
                    Generator::MarkovCopula { transition },
                    *marginal,
                    mixing,
                    id,
                )
            }
        };
        Ok(ProcessSpec {
            config,
            generator,
            marginal,
            mixing,
            id,
        })
    }

    pub fn config(&self) -> &ProcessConfig {
        &self.config
    }

    pub fn marginal(&self) -> &Marginal {
        &self.marginal
    }

    pub fn mixing(&self) -> &MixingProfile {
        &self.mixing
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn generate(&self, n: usize, seed: u64) -> Result<SamplePath> {
        let values = match &self.generator {
            Generator::Iid => iid_values(&self.marginal, n, seed)?,
            Generator::MDependent { m } => m_dependent_values(*m, n, seed)?,
            Generator::MarkovCopula { transition } => {
                markov_copula_values(transition, &self.marginal, n, seed)?
            }
        };
        Ok(SamplePath {
            values,
            seed,
            spec_id: self.id.clone(),
        })
    }
}

/// One simulated realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub values: Vec<f64>,
    pub seed: u64,
    pub spec_id: String,
}

impl SamplePath {
    /// Wraps caller-provided values (no seed lineage).
    pub fn from_values(values: Vec<f64>) -> Self {
        SamplePath {
            values,
            seed: 0,
            spec_id: "external".into(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// CSV: a `spec_id,seed,n` header line and its values, then one value per line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("spec_id,seed,n\n{},{},{}\n", self.spec_id, self.seed, self.n());
        for v in &self.values {
            let _ = writeln!(out, "{v:.16e}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_csv().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Argument("path length n must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn iid_values(marginal: &Marginal, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_n(n)?;
    let mut rng = path_rng(seed);
    Ok((0..n)
        .map(|_| marginal.transform_uniform(rng.sample(Open01)))
        .collect())
}

fn m_dependent_values(m: usize, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_n(n)?;
    if m == 0 {
        return Err(Error::Argument(
            "m-dependent generator needs m >= 1 (use iid for m = 0)".into(),
        ));
    }
    let mut rng = path_rng(seed);
    let uniforms: Vec<f64> = (0..n + m).map(|_| rng.sample(Open01)).collect();
    let width = (m + 1) as f64;
    Ok(uniforms
        .windows(m + 1)
        .map(|w| w.iter().sum::<f64>() / width)
        .collect())
}

fn markov_copula_values(
    transition: &SquareMatrix,
    marginal: &Marginal,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_n(n)?;
    let k = transition.dim();
    let mut rng = path_rng(seed);
    // cumulative rows for inverse-transform state sampling
    let cumulative: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            transition
                .row(i)
                .iter()
                .scan(0.0, |acc, &v| {
                    *acc += v;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let mut state = rng.sample(Uniform::new(0, k).expect("k >= 1"));
    let kf = k as f64;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            let u: f64 = rng.random();
            let row = &cumulative[state];
            state = row.partition_point(|&c| c <= u).min(k - 1);
        }
        let v: f64 = rng.sample(Open01);
        values.push(marginal.transform_uniform((state as f64 + v) / kf));
    }
    Ok(values)
}

/// i.i.d. draws from `marginal`.
pub fn gen_iid(marginal: Marginal, n: usize, seed: u64) -> Result<SamplePath> {
    ProcessSpec::new(ProcessConfig::iid(marginal))?.generate(n, seed)
}

/// Moving means of `m + 1` consecutive uniforms.
pub fn gen_m_dependent(m: usize, n: usize, seed: u64) -> Result<SamplePath> {
    ProcessSpec::new(ProcessConfig::m_dependent(m))?.generate(n, seed)
}

pub fn gen_markov_copula(
    transition: &SquareMatrix,
    marginal: Marginal,
    n: usize,
    seed: u64,
) -> Result<SamplePath> {
    ProcessSpec::new(ProcessConfig::markov_copula(transition, marginal))?.generate(n, seed)
}
