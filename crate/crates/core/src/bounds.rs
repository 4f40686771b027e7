//! Exponential tail inequality for bounded, centred uniform-mixing sums,
//! and a Monte-Carlo harness that tries to falsify it.
//!
//! For `|X_i| <= d`, `E X_i = 0`, `0 < beta < 1` and `m = [n^beta]`:
//!
//! ```text
//! P(|sum X_i| > eps) <= 2 e C1 exp(-eps^2 / (2 C2 (2 Delta2 + n^beta d eps)))
//! C1 = exp(2 e n^(1 - beta) phi(m)),  C2 = 4 [1 + 4 sum_{i <= 2m} phi^(1/2)(i)]
//! ```
//!
//! `[x]` denotes the largest integer not exceeding `x`, i.e. the floor,
//! even though it is traditionally written with ceiling brackets. The
//! ceiling is available through [`BlockRounding::Ceiling`] for sensitivity
//! runs.

use std::f64::consts::E;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::{MixingProfile, ProcessSpec};
use crate::rng::derive_seed;

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

pub const MIN_REPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockRounding {
    #[default]
    Floor,
    Ceiling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs<'a> {
    pub n: usize,
    pub epsilon: f64,
    pub beta: f64,
    /// Almost-sure bound on `|X_i|`.
    pub d_abs: f64,
    /// `sum E X_i^2`.
    pub delta2: f64,
    pub profile: &'a MixingProfile,
    pub rounding: BlockRounding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// Un-clamped bound; may exceed one.
    pub value: f64,
    pub c1: f64,
    pub c2: f64,
    pub m: usize,
    pub exponent: f64,
}

impl BoundResult {
    pub fn clamped(&self) -> f64 {
        self.value.min(1.0)
    }
}

/// `n^beta` rounded to an integer block length. Values within `1e-9`
/// (relative) of an integer snap to it, so `10000^(1/4)` gives 10.
pub fn block_length(n: usize, beta: f64, rounding: BlockRounding) -> usize {
    let x = (n as f64).powf(beta);
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        return nearest as usize;
    }
    match rounding {
        BlockRounding::Floor => x.floor() as usize,
        BlockRounding::Ceiling => x.ceil() as usize,
    }
}

pub fn exponential_tail_bound(inputs: &BoundInputs<'_>) -> Result<BoundResult> {
    let BoundInputs {
        n,
        epsilon,
        beta,
        d_abs,
        delta2,
        profile,
        rounding,
    } = *inputs;
    if n < 2 {
        return Err(Error::Argument(format!("the inequality needs n >= 2, got {n}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Argument(format!("beta = {beta} outside (0,1)")));
    }
    if !(epsilon > 0.0) || !(d_abs >= 0.0) || !(delta2 >= 0.0) {
        return Err(Error::Argument(format!(
            "need eps > 0, d >= 0, Delta2 >= 0; got {epsilon}, {d_abs}, {delta2}"
        )));
    }
    let m = block_length(n, beta, rounding);
    if m == 0 {
        return Err(Error::Argument(format!("block length [n^beta] is 0 for n={n}, beta={beta}")));
    }
    let nf = n as f64;
    let n_beta = nf.powf(beta);
    let c1 = (2.0 * E * nf.powf(1.0 - beta) * profile.phi(m)).exp();
    let c2 = 4.0 * (1.0 + 4.0 * profile.partial_half_series(2 * m));
    let exponent = -epsilon * epsilon / (2.0 * c2 * (2.0 * delta2 + n_beta * d_abs * epsilon));
    Ok(BoundResult {
        value: 2.0 * E * c1 * exponent.exp(),
        c1,
        c2,
        m,
        exponent,
    })
}

/// `C_3 = 4 [1 + 4 sum_{n >= 1} phi^{1/2}(n)]`.
pub fn c3_of(profile: &MixingProfile) -> Result<f64> {
    profile.c3()
}

/// Bounded centred statistic applied to each observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    /// `I(X <= threshold) - F(threshold)`.
    Indicator { threshold: f64 },
}

impl Transform {
    /// `(P(X <= x), sup |Y|, E Y^2)` under the given marginal.
    fn moments(&self, spec: &ProcessSpec) -> (f64, f64, f64) {
        match *self {
            Transform::Indicator { threshold } => {
                let q = spec.marginal().cdf(threshold);
                (q, q.max(1.0 - q), q * (1.0 - q))
            }
        }
    }
}

/// One row of a bound-versus-simulation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub epsilon: f64,
    pub mc_tail: f64,
    pub mc_ci_halfwidth: f64,
    pub bound: f64,
    /// Lower confidence limit of the simulated tail exceeds the bound.
    pub flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTable {
    pub spec_id: String,
    pub n: usize,
    pub beta: f64,
    pub reps: usize,
    pub seed: u64,
    pub c1: f64,
    pub c2: f64,
    pub m: usize,
    pub rows: Vec<BoundRow>,
}

impl BoundTable {
    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.flag).count()
    }
}

#[derive(Debug, Clone)]
pub struct BoundExperiment<'a> {
    pub spec: &'a ProcessSpec,
    pub transform: Transform,
    pub n: usize,
    pub beta: f64,
    pub eps_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub rounding: BlockRounding,
}

/// Twenty thresholds at `0.5 k sqrt(Delta2)`, `k = 1..=20`.
pub fn default_eps_grid(spec: &ProcessSpec, transform: Transform, n: usize) -> Vec<f64> {
    let (_, _, var) = transform.moments(spec);
    let sd = (n as f64 * var).sqrt();
    (1..=20).map(|k| 0.5 * k as f64 * sd).collect()
}

/// Simulates `reps` paths and compares `P(|sum Y_i| > eps)` with the bound
/// at each `eps`. Replications run in parallel; replication `r` uses the
/// seed derived from `(seed, r)`, so results do not depend on thread count.
pub fn bound_vs_montecarlo(exp: &BoundExperiment<'_>) -> Result<BoundTable> {
    if exp.reps < MIN_REPS {
        return Err(Error::Statistics(format!(
            "{} replications is too few for a confidence interval (need >= {MIN_REPS})",
            exp.reps
        )));
    }
    let (q, d_abs, var) = exp.transform.moments(exp.spec);
    let delta2 = exp.n as f64 * var;
    let Transform::Indicator { threshold } = exp.transform;

    let sums: Vec<f64> = (0..exp.reps as u64)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let path = exp.spec.generate(exp.n, derive_seed(exp.seed, r))?;
            let hits = path.values.iter().filter(|&&v| v <= threshold).count();
            Ok(hits as f64 - exp.n as f64 * q)
        })
        .collect::<Result<_>>()?;

    let reps = exp.reps as f64;
    let mut header = None;
    let mut rows = Vec::with_capacity(exp.eps_grid.len());
    for &epsilon in &exp.eps_grid {
        let bound = exponential_tail_bound(&BoundInputs {
            n: exp.n,
            epsilon,
            beta: exp.beta,
            d_abs,
            delta2,
            profile: exp.spec.mixing(),
            rounding: exp.rounding,
        })?;
        header.get_or_insert(bound);
        let tail = sums.iter().filter(|s| s.abs() > epsilon).count() as f64 / reps;
        let half = Z_99 * (tail * (1.0 - tail) / reps).sqrt();
        rows.push(BoundRow {
            epsilon,
            mc_tail: tail,
            mc_ci_halfwidth: half,
            bound: bound.value,
            flag: tail - half > bound.value,
        });
    }
    let (c1, c2, m) = header.map_or((f64::NAN, f64::NAN, 0), |b| (b.c1, b.c2, b.m));
    Ok(BoundTable {
        spec_id: exp.spec.id().to_string(),
        n: exp.n,
        beta: exp.beta,
        reps: exp.reps,
        seed: exp.seed,
        c1,
        c2,
        m,
        rows,
    })
}
