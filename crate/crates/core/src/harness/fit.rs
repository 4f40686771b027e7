use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::experiment::ReportTable;

pub const MIN_FIT_POINTS: usize = 4;
pub const MIN_FIT_REPS: usize = 50;

/// Least-squares line through `(ln n, ln statistic)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub p: Option<f64>,
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `ln y = intercept + slope ln n`.
pub fn fit_points(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} grid points, need at least {MIN_FIT_POINTS}",
            points.len()
        )));
    }
    let bad: Vec<String> = points
        .iter()
        .filter(|(n, y)| !(*n > 0.0 && *y > 0.0 && y.is_finite()))
        .map(|(n, y)| format!("n={n} (statistic {y})"))
        .collect();
    if !bad.is_empty() {
        return Err(Error::Fit(format!(
            "nonpositive statistic at {}",
            bad.join(", ")
        )));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let k = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / k;
    let ybar = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all grid points share the same n".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let sst: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if sst > 0.0 {
        (1.0 - sse / sst).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        p: None,
        points: points.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

/// Fits the aggregated statistic of `table` at level `p` against `n`.
pub fn fit_rate(table: &ReportTable, p: f64) -> Result<RateFit> {
    let rows: Vec<_> = table.rows_for(p).collect();
    if let Some(r) = rows.iter().find(|r| r.reps < MIN_FIT_REPS) {
        return Err(Error::Fit(format!(
            "row n={} has {} replications, need at least {MIN_FIT_REPS}",
            r.n, r.reps
        )));
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.statistic)).collect();
    let mut fit = fit_points(&points)?;
    fit.p = Some(p);
    Ok(fit)
}
