use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::empirical::EmpiricalCdf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// The series already holds returns.
    Returns,
    /// The series holds prices; log-returns `ln(X_t / X_{t-1})` are taken.
    Prices,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarEstimate {
    /// Sample `p`-quantile of the returns (no loss-sign convention applied).
    pub var: f64,
    pub p: f64,
    /// Number of returns.
    pub n: usize,
    /// `(ln n / n)^{1/2}`: order of the representation remainder, an
    /// accuracy annotation rather than a confidence interval.
    pub remainder_order: f64,
    pub warning: Option<String>,
}

pub fn log_returns(prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::Data(format!(
            "need at least two prices, got {}",
            prices.len()
        )));
    }
    if let Some((i, v)) = prices
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
    {
        return Err(Error::Data(format!("price {i} is {v}; prices must be positive")));
    }
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

pub fn var_estimate(series: &[f64], p: f64, kind: SeriesKind) -> Result<VarEstimate> {
    let returns = match kind {
        SeriesKind::Prices => log_returns(series)?,
        SeriesKind::Returns => series.to_vec(),
    };
    if let Some(v) = returns.iter().find(|v| !v.is_finite()) {
        return Err(Error::Data(format!("return {v} is not finite")));
    }
    let ecdf = EmpiricalCdf::new(returns)?;
    let q = ecdf.quantile(p)?;
    let n = ecdf.n();
    let nf = n as f64;
    let warning = (nf * p < 1.0).then(|| {
        format!("n*p = {} < 1: the estimate is the sample minimum", nf * p)
    });
    Ok(VarEstimate {
        var: q.value,
        p,
        n,
        remainder_order: (nf.ln().max(0.0) / nf).sqrt(),
        warning,
    })
}

/// Parses one value per line. Blank lines and `#` comments are skipped;
/// a non-numeric first line is taken as a header. For multi-column lines
/// the last column is used.
pub fn parse_series(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() && !header_seen => header_seen = true,
            Err(_) => {
                return Err(Error::Data(format!(
                    "line {}: cannot parse {field:?} as a number",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_series(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_prices() {
        for p in [0.01, 0.05, 0.5] {
            let v = var_estimate(&[100.0, 100.0, 100.0], p, SeriesKind::Prices).unwrap();
            assert_eq!(v.var, 0.0);
            assert_eq!(v.n, 2);
        }
    }

    #[test]
    fn order_statistic() {
        let r = [-0.05, -0.03, -0.01, 0.00, 0.02, 0.02, 0.03, 0.04, 0.05, 0.06];
        let v = var_estimate(&r, 0.1, SeriesKind::Returns).unwrap();
        assert_eq!(v.var, -0.05);
        assert!(v.warning.is_none());
        assert!((v.remainder_order - (10f64.ln() / 10.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn small_sample_warns() {
        let v = var_estimate(&[0.01, -0.02, 0.03], 0.05, SeriesKind::Returns).unwrap();
        assert_eq!(v.var, -0.02);
        assert!(v.warning.is_some());
    }

    #[test]
    fn bad_prices() {
        assert!(matches!(
            var_estimate(&[100.0, 0.0, 101.0], 0.05, SeriesKind::Prices),
            Err(Error::Data(_))
        ));
        assert!(var_estimate(&[100.0], 0.05, SeriesKind::Prices).is_err());
    }

    #[test]
    fn parses_with_header_and_comments() {
        let s = parse_series("# prices\nclose\n100\n\n101.5\n99\n").unwrap();
        assert_eq!(s, vec![100.0, 101.5, 99.0]);
        let s = parse_series("date,close\n2024-01-02,10\n2024-01-03,11\n").unwrap();
        assert_eq!(s, vec![10.0, 11.0]);
        assert!(parse_series("1\n2\nx\n").is_err());
    }
}
