//! Empirical distribution functions and generalized inverses.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::processes::SamplePath;

/// Right-continuous empirical CDF `F_n(x) = #{i : X_i <= x} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

/// Sample `p`-quantile `inf{x : F_n(x) >= p}` and its order index (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileEstimate {
    pub p: f64,
    pub value: f64,
    pub n: usize,
    pub order_index: usize,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Argument("empirical CDF of an empty sample".into()));
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::Data(format!("sample value {i} is NaN")));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: values })
    }

    pub fn from_path(path: &SamplePath) -> Result<Self> {
        Self::new(path.values.clone())
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    fn ratio(&self, count: usize) -> f64 {
        count as f64 / self.sorted.len() as f64
    }

    /// `#{i : X_i <= x}`.
    pub fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    /// `#{i : X_i < x}`.
    pub fn count_lt(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v < x)
    }

    /// `F_n(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.ratio(self.count_le(x))
    }

    /// Left limit `F_n(x-)`.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.ratio(self.count_lt(x))
    }

    /// Smallest order index `k` with `k / n >= p`, with the comparison made
    /// exactly as `F_n` is evaluated.
    fn order_index(&self, p: f64) -> usize {
        let n = self.n();
        let mut k = ((n as f64) * p).ceil().clamp(1.0, n as f64) as usize;
        while k > 1 && self.ratio(k - 1) >= p {
            k -= 1;
        }
        while k < n && self.ratio(k) < p {
            k += 1;
        }
        k
    }

    pub fn quantile(&self, p: f64) -> Result<QuantileEstimate> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Argument(format!("probability {p} outside (0,1)")));
        }
        let k = self.order_index(p);
        Ok(QuantileEstimate {
            p,
            value: self.sorted[k - 1],
            n: self.n(),
            order_index: k,
        })
    }

    /// Breakpoints with `F_n` at each: `(x, F_n(x))`, ties collapsed.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = self.ratio(i + 1);
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = f,
                _ => out.push((x, f)),
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,F_n\n");
        for (x, f) in self.steps() {
            let _ = writeln!(out, "{x:.16e},{f:.16e}");
        }
        out
    }
}

pub fn build_ecdf(path: &SamplePath) -> Result<EmpiricalCdf> {
    EmpiricalCdf::from_path(path)
}

pub fn sample_quantile(cdf: &EmpiricalCdf, p: f64) -> Result<QuantileEstimate> {
    cdf.quantile(p)
}

/// A nondecreasing right-continuous step function given by its breakpoints:
/// `F(x) = 0` left of the first breakpoint, `F(x) = levels[i]` on
/// `[points[i], points[i + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    points: Vec<f64>,
    levels: Vec<f64>,
}

impl StepCdf {
    pub fn new(points: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if points.len() != levels.len() || points.is_empty() {
            return Err(Error::Argument(
                "step CDF needs equally many (nonzero) breakpoints and levels".into(),
            ));
        }
        let increasing = points.windows(2).all(|w| w[0] < w[1]);
        let monotone = levels.windows(2).all(|w| w[0] <= w[1]);
        let in_range = levels.iter().all(|l| (0.0..=1.0).contains(l));
        if !(increasing && monotone && in_range) {
            return Err(Error::Argument(
                "breakpoints must increase and levels must be nondecreasing in [0, 1]".into(),
            ));
        }
        Ok(StepCdf { points, levels })
    }

    /// Step CDF of a discrete law with the given atoms and weights.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut atoms = atoms.to_vec();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let mut points = Vec::new();
        let mut levels = Vec::new();
        let mut acc = 0.0;
        for (x, w) in atoms {
            acc += w / total;
            if points.last() == Some(&x) {
                *levels.last_mut().unwrap() = acc;
            } else {
                points.push(x);
                levels.push(acc);
            }
        }
        *levels.last_mut().unwrap() = 1.0;
        Self::new(points, levels)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.points.partition_point(|&p| p <= x) {
            0 => 0.0,
            i => self.levels[i - 1],
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

/// `inf{x : F(x) >= t}` for a step CDF.
pub fn generalized_inverse(cdf: &StepCdf, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Argument(format!("level {t} outside (0,1)")));
    }
    // levels are nondecreasing, so the first level >= t marks the infimum
    let i = cdf.levels.partition_point(|&l| l < t);
    cdf.points.get(i).copied().ok_or_else(|| {
        Error::Domain(format!(
            "level {t} is never attained (sup F = {})",
            cdf.levels.last().copied().unwrap_or(0.0)
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ecdf(v: &[f64]) -> EmpiricalCdf {
        EmpiricalCdf::new(v.to_vec()).unwrap()
    }

    #[test]
    fn counts_and_left_limits() {
        let f = ecdf(&[3.0, 1.0, 2.0]);
        assert_eq!(f.eval(2.0), 2.0 / 3.0);
        assert_eq!(f.eval_left(2.0), 1.0 / 3.0);
        assert_eq!(f.eval(f64::NEG_INFINITY), 0.0);
        assert_eq!(f.eval(f64::INFINITY), 1.0);
    }

    #[test]
    fn ties_jump_by_multiples() {
        let f = ecdf(&[1.0, 1.0, 2.0]);
        assert_eq!(f.eval(1.0), 2.0 / 3.0);
        assert_eq!(f.eval_left(1.0), 0.0);
        assert_eq!(f.steps(), vec![(1.0, 2.0 / 3.0), (2.0, 1.0)]);
    }

    #[test]
    fn quantile_index() {
        let f = ecdf(&[1.0, 2.0, 3.0, 4.0]);
        let q = f.quantile(0.5).unwrap();
        assert_eq!((q.value, q.order_index), (2.0, 2));
        assert_eq!(f.quantile(0.51).unwrap().value, 3.0);
        assert_eq!(f.quantile(0.25).unwrap().value, 1.0);
        assert_eq!(f.quantile(0.999).unwrap().value, 4.0);
    }

    #[test]
    fn quantile_at_exact_multiples() {
        // 10 * 0.3 rounds above 3 in binary; the infimum is still index 3
        let f = ecdf(&(1..=10).map(f64::from).collect::<Vec<_>>());
        assert_eq!(f.quantile(0.3).unwrap().order_index, 3);
        assert_eq!(f.quantile(0.7).unwrap().order_index, 7);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(EmpiricalCdf::new(vec![]), Err(Error::Argument(_))));
        assert!(matches!(
            EmpiricalCdf::new(vec![1.0, f64::NAN]),
            Err(Error::Data(_))
        ));
        let f = ecdf(&[1.0]);
        assert!(f.quantile(0.0).is_err());
        assert!(f.quantile(1.0).is_err());
    }

    #[test]
    fn point_mass_inverse() {
        let f = StepCdf::from_atoms(&[(5.0, 1.0)]).unwrap();
        assert_eq!(generalized_inverse(&f, 0.3).unwrap(), 5.0);
    }

    #[test]
    fn unattainable_level() {
        let f = StepCdf::new(vec![0.0, 1.0], vec![0.2, 0.5]).unwrap();
        assert!(matches!(generalized_inverse(&f, 0.7), Err(Error::Domain(_))));
        assert_eq!(generalized_inverse(&f, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn csv_dump() {
        let f = ecdf(&[2.0, 1.0]);
        let csv = f.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "x,F_n");
    }
}
