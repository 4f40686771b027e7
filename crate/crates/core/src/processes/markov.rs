//! Finite-state chains with uniform stationary law.

use crate::error::{Error, Result};

use super::mixing::{MixingKind, MixingProfile, PhiSequence};

/// Row-stochastic tolerance and the column-sum tolerance for the uniform
/// stationary law.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// `phi(n)` below this is treated as converged; the geometric tail then
/// contributes less than `1e-13` to the half series.
const PHI_FLOOR: f64 = 1e-30;

pub const DEFAULT_MAX_LAG: usize = 100_000;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    k: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::Spec(format!(
                "transition matrix must be square and nonempty, got {} rows of lengths {:?}",
                k,
                rows.iter().map(Vec::len).collect::<Vec<_>>()
            )));
        }
        Ok(SquareMatrix {
            k,
            data: rows.concat(),
        })
    }

    pub fn identity(k: usize) -> Self {
        let mut data = vec![0.0; k * k];
        for i in 0..k {
            data[i * k + i] = 1.0;
        }
        SquareMatrix { k, data }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.k).map(<[f64]>::to_vec).collect()
    }

    pub fn mul(&self, other: &SquareMatrix) -> SquareMatrix {
        let k = self.k;
        let mut data = vec![0.0; k * k];
        for i in 0..k {
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == 0.0 {
                    continue;
                }
                for j in 0..k {
                    data[i * k + j] += a * other.data[l * k + j];
                }
            }
        }
        SquareMatrix { k, data }
    }
}

/// Checks the chain is row-stochastic, doubly stochastic (so the uniform
/// law is stationary) and primitive (irreducible and aperiodic).
pub fn validate_transition(p: &SquareMatrix) -> Result<()> {
    let k = p.dim();
    for i in 0..k {
        let row = p.row(i);
        if let Some(j) = row.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Spec(format!(
                "transition[{i}][{j}] = {} is not a probability",
                row[j]
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::Spec(format!("row {i} sums to {sum}, not 1")));
        }
    }
    for j in 0..k {
        let sum: f64 = (0..k).map(|i| p.get(i, j)).sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::Spec(format!(
                "column {j} sums to {sum}; the stationary law is not uniform"
            )));
        }
    }
    // a nonnegative matrix is primitive iff its ((k-1)^2 + 1)-th power is positive
    let support = |m: &SquareMatrix| -> Vec<bool> { m.data.iter().map(|&v| v > 0.0).collect() };
    let step = support(p);
    let mut reach = step.clone();
    let exponent = (k - 1) * (k - 1) + 1;
    for _ in 1..exponent {
        let mut next = vec![false; k * k];
        for i in 0..k {
            for l in 0..k {
                if reach[i * k + l] {
                    for j in 0..k {
                        next[i * k + j] |= step[l * k + j];
                    }
                }
            }
        }
        reach = next;
    }
    if let Some(idx) = reach.iter().position(|&b| !b) {
        return Err(Error::Spec(format!(
            "chain is reducible or periodic: state {} never reaches state {} in exactly {} steps",
            idx / k,
            idx % k,
            exponent
        )));
    }
    Ok(())
}

/// `P - Pi`, where `Pi` has every entry `1/k`. For a doubly stochastic `P`,
/// `(P - Pi)^n = P^n - Pi` for `n >= 1`.
fn centered(p: &SquareMatrix) -> SquareMatrix {
    let inv_k = 1.0 / p.dim() as f64;
    SquareMatrix {
        k: p.k,
        data: p.data.iter().map(|v| v - inv_k).collect(),
    }
}

/// Deviation `P^n - Pi` for lags `1..=lags`.
pub fn deviation_powers(p: &SquareMatrix, lags: usize) -> Vec<SquareMatrix> {
    let a = centered(p);
    let mut out = Vec::with_capacity(lags);
    let mut cur = a.clone();
    for _ in 0..lags {
        let next = cur.mul(&a);
        out.push(cur);
        cur = next;
    }
    out
}

/// `max_i sup_B |sum_{j in B} d_ij|`: the larger of the positive-part and
/// negative-part row sums, maximized over rows.
pub fn phi_from_deviation(d: &SquareMatrix) -> f64 {
    (0..d.dim())
        .map(|i| {
            let (pos, neg) = d.row(i).iter().fold((0.0, 0.0), |(pos, neg), &v| {
                if v > 0.0 {
                    (pos + v, neg)
                } else {
                    (pos, neg - v)
                }
            });
            f64::max(pos, neg)
        })
        .fold(0.0, f64::max)
}

/// Uniform-mixing coefficients of a stationary chain with uniform stationary
/// law, `phi(n) = max_i max_B |P^n(i, B) - pi(B)|`, computed exactly from
/// matrix powers until the sequence vanishes or falls below `1e-30`; the
/// remainder is continued geometrically at the last observed decay ratio.
pub fn phi_markov(transition: &SquareMatrix, max_lag: usize) -> Result<MixingProfile> {
    validate_transition(transition)?;
    let a = centered(transition);
    let mut cur = a.clone();
    let mut head: Vec<f64> = Vec::new();
    for _ in 0..max_lag {
        let phi = phi_from_deviation(&cur);
        if phi == 0.0 {
            return Ok(MixingProfile {
                phi: PhiSequence::Finite { head },
                kind: MixingKind::Exact,
            });
        }
        // rounding can leave a trailing increase of one ulp; keep the sequence monotone
        let phi = head.last().map_or(phi, |&prev: &f64| phi.min(prev));
        head.push(phi);
        if phi < PHI_FLOOR {
            let len = head.len();
            let window = &head[len.saturating_sub(8)..];
            let ratio = window
                .windows(2)
                .map(|w| w[1] / w[0])
                .fold(0.0, f64::max)
                .min(1.0 - 1e-12);
            return Ok(MixingProfile {
                phi: PhiSequence::Geometric { head, ratio },
                kind: MixingKind::Exact,
            });
        }
        cur = cur.mul(&a);
    }
    Err(Error::Numeric(format!(
        "mixing coefficients did not fall below {PHI_FLOOR:e} within {max_lag} lags"
    )))
}

/// Symmetric two-state chain flipping with probability `a`.
pub fn two_state(a: f64) -> SquareMatrix {
    SquareMatrix {
        k: 2,
        data: vec![1.0 - a, a, a, 1.0 - a],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_stochastic_rows() {
        let p = SquareMatrix::from_rows(&[vec![0.5, 0.4], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(validate_transition(&p), Err(Error::Spec(_))));
    }

    #[test]
    fn rejects_non_uniform_stationary_law() {
        let p = SquareMatrix::from_rows(&[vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        let err = validate_transition(&p).unwrap_err().to_string();
        assert!(err.contains("not uniform"), "{err}");
    }

    #[test]
    fn rejects_reducible_and_periodic_chains() {
        let reducible = SquareMatrix::identity(3);
        assert!(validate_transition(&reducible).is_err());
        let periodic = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(validate_transition(&periodic).is_err());
    }

    #[test]
    fn rejects_ragged_matrix() {
        assert!(SquareMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0]]).is_err());
    }

    #[test]
    fn two_state_closed_form() {
        for a in [0.1, 0.3, 0.45] {
            let prof = phi_markov(&two_state(a), DEFAULT_MAX_LAG).unwrap();
            for n in 1..=30 {
                let expected = (1.0 - 2.0 * a).abs().powi(n as i32) / 2.0;
                assert!((prof.phi(n) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn independent_two_state_chain_has_zero_phi() {
        let prof = phi_markov(&two_state(0.5), DEFAULT_MAX_LAG).unwrap();
        assert!(prof.is_zero());
        assert_eq!(prof.c3().unwrap(), 4.0);
    }

    #[test]
    fn deviation_matches_naive_powers() {
        let p = SquareMatrix::from_rows(&[
            vec![0.5, 0.3, 0.2],
            vec![0.2, 0.5, 0.3],
            vec![0.3, 0.2, 0.5],
        ])
        .unwrap();
        let devs = deviation_powers(&p, 12);
        let mut pow = p.clone();
        for d in &devs {
            for i in 0..3 {
                for j in 0..3 {
                    assert!((d.get(i, j) - (pow.get(i, j) - 1.0 / 3.0)).abs() < 1e-15);
                }
            }
            pow = pow.mul(&p);
        }
    }

    #[test]
    fn slow_chain_hits_lag_limit() {
        let p = two_state(1e-6);
        assert!(matches!(phi_markov(&p, 50), Err(Error::Numeric(_))));
    }
}
