use anyhow::{bail, Context, Result};
use bahadur_core::processes::markov;
use bahadur_core::{Marginal, ProcessConfig};
use clap::{Args, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    Iid,
    MDependent,
    Markov,
}

/// Flags that replace parts of the configured process.
#[derive(Debug, Clone, Default, Args)]
pub struct ProcessArgs {
    /// Generator family.
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorArg>,
    /// Marginal law: uniform[:low:high], exponential[:rate], normal[:mean:sd] or bates:k.
    #[arg(long, value_parser = parse_marginal)]
    pub marginal: Option<Marginal>,
    /// Window length minus one for the moving-average generator.
    #[arg(long)]
    pub m: Option<usize>,
    /// Transition matrix, rows separated by ';' and entries by ','.
    #[arg(long, value_parser = parse_matrix, conflicts_with = "flip")]
    pub transition: Option<Vec<Vec<f64>>>,
    /// Flip probability of the symmetric two-state chain.
    #[arg(long)]
    pub flip: Option<f64>,
}

pub fn parse_marginal(s: &str) -> Result<Marginal> {
    let mut parts = s.split(':');
    let name = parts.next().unwrap_or_default().trim().to_ascii_lowercase();
    let args: Vec<f64> = parts
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?} in {s:?}")))
        .collect::<Result<_>>()?;
    let marginal = match (name.as_str(), args.as_slice()) {
        ("uniform", []) => Marginal::standard_uniform(),
        ("uniform", &[low, high]) => Marginal::Uniform { low, high },
        ("exponential", []) => Marginal::standard_exponential(),
        ("exponential", &[rate]) => Marginal::Exponential { rate },
        ("normal", []) => Marginal::standard_normal(),
        ("normal", &[mean, sd]) => Marginal::Normal { mean, sd },
        ("bates", &[k]) if k.fract() == 0.0 && k >= 1.0 => Marginal::Bates { k: k as u32 },
        _ => bail!(
            "unrecognised marginal {s:?}; expected uniform[:low:high], exponential[:rate], \
             normal[:mean:sd] or bates:k"
        ),
    };
    marginal.validate()?;
    Ok(marginal)
}

pub fn parse_matrix(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad entry {v:?}")))
                .collect()
        })
        .collect()
}

fn base_marginal(base: &ProcessConfig) -> Option<Marginal> {
    match base {
        ProcessConfig::Iid { marginal } | ProcessConfig::MarkovCopula { marginal, .. } => {
            Some(*marginal)
        }
        ProcessConfig::MDependent { .. } => None,
    }
}

impl ProcessArgs {
    /// `base` with every given flag applied.
    pub fn apply(&self, base: ProcessConfig) -> Result<ProcessConfig> {
        let generator = self.generator.unwrap_or(match base {
            ProcessConfig::Iid { .. } => GeneratorArg::Iid,
            ProcessConfig::MDependent { .. } => GeneratorArg::MDependent,
            ProcessConfig::MarkovCopula { .. } => GeneratorArg::Markov,
        });
        let marginal = self
            .marginal
            .or_else(|| base_marginal(&base))
            .unwrap_or_else(Marginal::standard_uniform);
        Ok(match generator {
            GeneratorArg::Iid => ProcessConfig::iid(marginal),
            GeneratorArg::MDependent => {
                if self.marginal.is_some() {
                    bail!("the moving-average generator has a fixed Bates marginal; drop --marginal");
                }
                let m = match (self.m, &base) {
                    (Some(m), _) => m,
                    (None, ProcessConfig::MDependent { m }) => *m,
                    _ => bail!("--m is required for the m-dependent generator"),
                };
                ProcessConfig::m_dependent(m)
            }
            GeneratorArg::Markov => {
                let transition = if let Some(a) = self.flip {
                    markov::two_state(a).rows()
                } else if let Some(t) = &self.transition {
                    t.clone()
                } else if let ProcessConfig::MarkovCopula { transition, .. } = base {
                    transition
                } else {
                    bail!("--transition or --flip is required for the Markov generator");
                };
                ProcessConfig::MarkovCopula {
                    transition,
                    marginal,
                }
            }
        })
    }
}
