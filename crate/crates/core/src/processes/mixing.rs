//! Uniform-mixing coefficient sequences and the series built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a profile is the exact coefficient sequence of the emitted
/// values or only dominates it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingKind {
    Exact,
    UpperBound,
}

/// A coefficient sequence `phi(n)`, `n >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PhiSequence {
    /// `phi(n) = head[n - 1]` for `n <= head.len()`, zero afterwards.
    Finite { head: Vec<f64> },
    /// `head` continued geometrically: `phi(len + j) = head[len - 1] * ratio^j`.
    Geometric { head: Vec<f64>, ratio: f64 },
    /// `phi(n) = min(1, scale * n^-order)`.
    Power { scale: f64, order: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingProfile {
    pub phi: PhiSequence,
    pub kind: MixingKind,
}

/// Default truncation tolerance for `sum phi^{1/2}(n)`.
pub const HALF_SERIES_TOL: f64 = 1e-12;

impl MixingProfile {
    /// Independent sequence: `phi(n) = 0` for all `n >= 1`.
    pub fn zero() -> Self {
        MixingProfile {
            phi: PhiSequence::Finite { head: Vec::new() },
            kind: MixingKind::Exact,
        }
    }

    /// `m`-dependent sequence with the universal bound `phi <= 1` at lags
    /// `1..=m` and exact zeros beyond.
    pub fn m_dependent(m: usize) -> Self {
        MixingProfile {
            phi: PhiSequence::Finite {
                head: vec![1.0; m],
            },
            kind: MixingKind::UpperBound,
        }
    }

    pub fn power(scale: f64, order: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite() && order > 0.0 && order.is_finite()) {
            return Err(Error::Argument(format!(
                "power profile needs positive scale and order, got {scale}, {order}"
            )));
        }
        Ok(MixingProfile {
            phi: PhiSequence::Power { scale, order },
            kind: MixingKind::UpperBound,
        })
    }

    pub fn phi(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        match &self.phi {
            PhiSequence::Finite { head } => head.get(n - 1).copied().unwrap_or(0.0),
            PhiSequence::Geometric { head, ratio } => match head.get(n - 1) {
                Some(&v) => v,
                None => {
                    let last = head.last().copied().unwrap_or(0.0);
                    last * ratio.powi((n - head.len()) as i32)
                }
            },
            PhiSequence::Power { scale, order } => (scale * (n as f64).powf(-order)).min(1.0),
        }
    }

    /// Order `k` with `phi(n) <= K n^-k` for some `K`; infinite for
    /// finitely supported or geometric sequences.
    pub fn polynomial_order_witness(&self) -> f64 {
        match &self.phi {
            PhiSequence::Power { order, .. } => *order,
            PhiSequence::Finite { .. } => f64::INFINITY,
            PhiSequence::Geometric { ratio, .. } if *ratio < 1.0 => f64::INFINITY,
            PhiSequence::Geometric { .. } => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.phi, PhiSequence::Finite { head } if head.iter().all(|&v| v == 0.0))
    }

    /// `sum_{n>=1} phi^{1/2}(n)` with absolute truncation error below `tol`.
    pub fn half_series(&self, tol: f64) -> Result<f64> {
        match &self.phi {
            PhiSequence::Finite { head } => Ok(head.iter().map(|v| v.sqrt()).sum()),
            PhiSequence::Geometric { head, ratio } => {
                if !(0.0..1.0).contains(ratio) {
                    return Err(Error::Domain(format!(
                        "geometric profile with ratio {ratio} is not summable"
                    )));
                }
                let head_sum: f64 = head.iter().map(|v| v.sqrt()).sum();
                let last = head.last().copied().unwrap_or(0.0).sqrt();
                let q = ratio.sqrt();
                Ok(head_sum + last * q / (1.0 - q))
            }
            PhiSequence::Power { scale, order } => power_half_series(*scale, *order, tol),
        }
    }

    /// `C_3 = 4 [1 + 4 sum phi^{1/2}(n)]`.
    pub fn c3(&self) -> Result<f64> {
        Ok(c3_from_half_series(self.half_series(HALF_SERIES_TOL)?))
    }

    /// `sum_{i=1}^{count} phi^{1/2}(i)`.
    pub fn partial_half_series(&self, count: usize) -> f64 {
        (1..=count).map(|i| self.phi(i).sqrt()).sum()
    }
}

pub fn c3_from_half_series(half_series: f64) -> f64 {
    4.0 * (1.0 + 4.0 * half_series)
}

/// `sum_n min(1, s n^-k)^{1/2}`: direct sum over a head, Euler-Maclaurin
/// for the `n^{-k/2}` tail.
fn power_half_series(scale: f64, order: f64, tol: f64) -> Result<f64> {
    let s = order / 2.0;
    if s <= 1.0 {
        return Err(Error::Domain(format!(
            "phi(n) ~ n^-{order} gives a divergent sum of square roots (need order > 2)"
        )));
    }
    // below `saturated` the min(1, .) clamp is active
    let saturated = scale.powf(1.0 / order).ceil().max(1.0) as usize;
    let cutoff = saturated.max(64) + 64;
    let head: f64 = (1..cutoff)
        .map(|n| (scale * (n as f64).powf(-order)).min(1.0).sqrt())
        .sum();
    // sum_{n >= N} n^-s
    let n = cutoff as f64;
    let tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s / 12.0 * n.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * n.powf(-s - 3.0)
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 * n.powf(-s - 5.0);
    let remainder = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * (s + 5.0) * (s + 6.0)
        / 1_209_600.0
        * n.powf(-s - 7.0);
    if remainder * scale.sqrt() > tol {
        return Err(Error::Numeric(format!(
            "tail remainder {remainder:e} exceeds tolerance {tol:e}"
        )));
    }
    Ok(head + scale.sqrt() * tail)
}
