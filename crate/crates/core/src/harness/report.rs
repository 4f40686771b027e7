//! CSV and JSON rendering.
//!
//! Output is a pure function of the report: floats are written with 17
//! significant digits in CSV (enough to round-trip any double) and JSON
//! objects are emitted with sorted keys.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bahadur::BahadurDiagnostics;
use crate::bounds::BoundTable;
use crate::error::{Error, Result};

use super::experiment::ReportTable;
use super::fit::RateFit;
use super::var::VarEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Any stored result the tools know how to re-render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum Report {
    Rates {
        table: ReportTable,
        fits: Vec<RateFit>,
    },
    Bounds {
        table: BoundTable,
    },
    Var {
        estimate: VarEstimate,
    },
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn report_table_csv(table: &ReportTable) -> String {
    let mut out = String::from("n,p,statistic,envelope,violation_fraction,reps\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.p),
            fmt_f64(r.statistic),
            fmt_f64(r.envelope),
            fmt_f64(r.violation_fraction),
            r.reps
        );
    }
    out
}

pub fn fits_csv(fits: &[RateFit]) -> String {
    let mut out = String::from("p,slope,intercept,r_squared,points\n");
    for f in fits {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            opt_f64(f.p),
            fmt_f64(f.slope),
            fmt_f64(f.intercept),
            fmt_f64(f.r_squared),
            f.points.len()
        );
    }
    out
}

pub fn bound_table_csv(table: &BoundTable) -> String {
    let mut out = String::from("epsilon,mc_tail,mc_ci_halfwidth,bound,flag\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(r.epsilon),
            fmt_f64(r.mc_tail),
            fmt_f64(r.mc_ci_halfwidth),
            fmt_f64(r.bound),
            r.flag
        );
    }
    out
}

pub fn var_csv(v: &VarEstimate) -> String {
    format!(
        "p,var,n,remainder_order\n{},{},{},{}\n",
        fmt_f64(v.p),
        fmt_f64(v.var),
        v.n,
        fmt_f64(v.remainder_order)
    )
}

pub const DIAGNOSTICS_HEADER: &str = "spec_id,seed,n,p,remainder,oscillation_narrow,oscillation_wide,\
sup_dev_wide,quantile_error,env_oscillation_narrow,env_oscillation_wide,env_deviation_wide,\
env_quantile_error,viol_remainder,viol_oscillation_narrow,viol_oscillation_wide,\
viol_sup_dev_wide,viol_quantile_error";

/// One row per `(path, p)`.
pub fn diagnostics_csv(rows: &[BahadurDiagnostics]) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for d in rows {
        let e = &d.envelopes;
        let v = &d.violations;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            d.spec_id,
            d.seed,
            d.n,
            fmt_f64(d.p),
            fmt_f64(d.remainder),
            fmt_f64(d.oscillation_narrow),
            fmt_f64(d.oscillation_wide),
            fmt_f64(d.sup_dev_wide),
            fmt_f64(d.quantile_error),
            fmt_f64(e.oscillation_narrow),
            fmt_f64(e.oscillation_wide),
            fmt_f64(e.deviation_wide),
            fmt_f64(e.quantile_error),
            v.remainder,
            v.oscillation_narrow,
            v.oscillation_wide,
            v.sup_dev_wide,
            v.quantile_error
        );
    }
    out
}

impl Report {
    pub fn to_csv(&self) -> String {
        match self {
            Report::Rates { table, .. } => report_table_csv(table),
            Report::Bounds { table } => bound_table_csv(table),
            Report::Var { estimate } => var_csv(estimate),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_sorted_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => self.to_json(),
        }
    }
}

/// Pretty JSON with object keys in lexicographic order.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    // `serde_json::Value` maps are ordered by key
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn emit_report(report: &Report, format: Format, path: &Path) -> Result<()> {
    write_file(path, &report.render(format)?)
}
