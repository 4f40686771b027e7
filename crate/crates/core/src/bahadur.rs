//! Bahadur remainder, local oscillation of the empirical process, shrinking
//! windows around the true quantile, and the almost-sure envelopes that
//! bound them.
//!
//! All suprema are exact. `F_n` is a right-continuous step function and
//! `F` is continuous and nondecreasing, so on each gap between consecutive
//! sample points `F_n - F` is nonincreasing. The supremum of
//! `|F_n(x) - F(x) - c|` over `[lo, hi]` is therefore attained (or
//! approached) at `lo`, `hi`, and at every sample point in the window,
//! evaluated both at `F_n(x)` and at the left limit `F_n(x-)`.
//!
//! Logarithms are natural throughout.

use serde::{Deserialize, Serialize};

use crate::empirical::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::processes::{Marginal, SamplePath};

/// Free positive constants entering the window widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BahadurConstants {
    /// Scale of the narrow window `a_n = c0 n^{-1/2} (ln n)^{3/4}`.
    pub c0: f64,
    /// Slack added to `16 C_3` in the wide window and its envelopes.
    pub theta: f64,
    /// Slack added to `2 sqrt(C_3)` in the quantile-error radius.
    pub delta: f64,
}

impl Default for BahadurConstants {
    fn default() -> Self {
        BahadurConstants {
            c0: 1.0,
            theta: 1.0,
            delta: 0.1,
        }
    }
}

impl BahadurConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c0", self.c0), ("theta", self.theta), ("delta", self.delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Smallest sample size for which `ln ln n` is comfortably positive.
pub const MIN_WIDE_WINDOW_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// Half-width `c0 n^{-1/2} (ln n)^{3/4}`.
    Narrow,
    /// Half-width `sqrt(16 C_3 + theta) (ln n)^{3/2} / (n^{1/2} (ln ln n)^{1/2})`.
    Wide,
    /// Radius `(2 sqrt(C_3) + delta) (ln n)^{1/2} / (f(xi_p) n^{1/2})`.
    QuantileError,
}

/// Inputs shared by the window formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowInputs {
    pub constants: BahadurConstants,
    pub c3: f64,
    /// Density at the true quantile.
    pub f_xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub kind: WindowKind,
    pub center: f64,
    pub half_width: f64,
}

impl WindowSpec {
    pub fn bounds(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

pub fn half_width(kind: WindowKind, n: usize, inputs: &WindowInputs) -> Result<f64> {
    let nf = n as f64;
    let ln = nf.ln();
    match kind {
        WindowKind::Narrow => {
            if n < 2 {
                return Err(Error::Argument(format!("narrow window needs n >= 2, got {n}")));
            }
            Ok(inputs.constants.c0 * ln.powf(0.75) / nf.sqrt())
        }
        WindowKind::Wide => {
            if n < MIN_WIDE_WINDOW_N {
                return Err(Error::Argument(format!(
                    "wide window needs n >= {MIN_WIDE_WINDOW_N}, got {n}"
                )));
            }
            Ok((16.0 * inputs.c3 + inputs.constants.theta).sqrt() * ln.powf(1.5)
                / (nf.sqrt() * ln.ln().sqrt()))
        }
        WindowKind::QuantileError => {
            if !(inputs.f_xi > 0.0) {
                return Err(Error::Domain("density at the quantile is zero".into()));
            }
            Ok(quantile_error_radius(n, inputs.f_xi, inputs.c3, inputs.constants.delta))
        }
    }
}

pub fn window(kind: WindowKind, n: usize, center: f64, inputs: &WindowInputs) -> Result<WindowSpec> {
    Ok(WindowSpec {
        kind,
        center,
        half_width: half_width(kind, n, inputs)?,
    })
}

/// Total for every `n >= 1` (zero at `n = 1`).
fn quantile_error_radius(n: usize, f_xi: f64, c3: f64, delta: f64) -> f64 {
    let nf = n as f64;
    (2.0 * c3.sqrt() + delta) * nf.ln().max(0.0).sqrt() / (f_xi * nf.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    /// `(d + 4 C_3) n^{-3/4} ln n`: oscillation over the narrow window.
    OscillationNarrow,
    /// `(1 + d) ((16 C_3 + theta) ln n / n)^{1/2}`: centered oscillation
    /// over the wide window.
    OscillationWide,
    /// `(1 + d) ((16 C_3 + theta) ln n / (4n))^{1/2}`: uncentered deviation
    /// over the wide window.
    DeviationWide,
    /// `n^{-3/4} (ln n)^{3/4}`, the unscaled i.i.d. modulus (rate fitting only).
    IidModulus,
}

/// Envelope value at sample size `n` (real-valued so the formulas can be
/// evaluated off the integers).
pub fn envelope(kind: EnvelopeKind, n: f64, d: f64, c3: f64, theta: f64) -> f64 {
    let nf = n;
    let ln = nf.ln();
    match kind {
        EnvelopeKind::OscillationNarrow => (d + 4.0 * c3) * nf.powf(-0.75) * ln,
        EnvelopeKind::OscillationWide => (1.0 + d) * ((16.0 * c3 + theta) * ln / nf).sqrt(),
        EnvelopeKind::DeviationWide => (1.0 + d) * ((16.0 * c3 + theta) * ln / (4.0 * nf)).sqrt(),
        EnvelopeKind::IidModulus => nf.powf(-0.75) * ln.powf(0.75),
    }
}

/// `sup_{x in [lo, hi]} |F_n(x) - F(x) - offset|`, exact.
pub fn sup_abs_deviation(
    ecdf: &EmpiricalCdf,
    cdf: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    offset: f64,
) -> f64 {
    assert!(lo <= hi, "empty window [{lo}, {hi}]");
    let n = ecdf.n() as f64;
    let gap = |count: usize, x: f64| (count as f64 / n - cdf(x) - offset).abs();

    let mut best = gap(ecdf.count_le(lo), lo).max(gap(ecdf.count_le(hi), hi));
    let sorted = ecdf.sorted_values();
    let mut i = ecdf.count_lt(lo);
    let end = ecdf.count_le(hi);
    while i < end {
        let x = sorted[i];
        let first = i;
        while i < end && sorted[i] == x {
            i += 1;
        }
        // count_le(x) may exceed `end` only if x > hi, which cannot happen here
        let fx = cdf(x);
        let right = (i as f64 / n - fx - offset).abs();
        best = best.max(right);
        if x > lo {
            best = best.max((first as f64 / n - fx - offset).abs());
        }
    }
    best
}

/// Result of a windowed supremum; `clipped` is set when the window had to
/// be intersected with the marginal's support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSup {
    pub value: f64,
    pub clipped: bool,
}

fn clip(marginal: &Marginal, window: &WindowSpec) -> Result<(f64, f64, bool)> {
    if !(window.half_width >= 0.0) {
        return Err(Error::Argument(format!(
            "window half-width {} is negative",
            window.half_width
        )));
    }
    let (lo, hi) = window.bounds();
    let (slo, shi) = marginal.support();
    let clipped = lo < slo || hi > shi;
    Ok((lo.max(slo), hi.min(shi), clipped))
}

/// Oscillation `sup_{x in window} |(F_n(x) - F(x)) - (F_n(xi_p) - p)|`,
/// with the window centred at `xi_p`.
pub fn oscillation_sup(
    ecdf: &EmpiricalCdf,
    marginal: &Marginal,
    p: f64,
    window: &WindowSpec,
) -> Result<WindowSup> {
    let (lo, hi, clipped) = clip(marginal, window)?;
    let offset = ecdf.eval(window.center) - p;
    Ok(WindowSup {
        value: sup_abs_deviation(ecdf, |x| marginal.cdf(x), lo, hi, offset),
        clipped,
    })
}

/// `sup_{x in window} |F_n(x) - F(x)|`.
pub fn deviation_sup(ecdf: &EmpiricalCdf, marginal: &Marginal, window: &WindowSpec) -> Result<WindowSup> {
    let (lo, hi, clipped) = clip(marginal, window)?;
    Ok(WindowSup {
        value: sup_abs_deviation(ecdf, |x| marginal.cdf(x), lo, hi, 0.0),
        clipped,
    })
}

/// True quantile and the density there, rejecting a vanishing density.
fn quantile_and_density(marginal: &Marginal, p: f64) -> Result<(f64, f64)> {
    let xi = marginal.inv_cdf(p)?;
    let f = marginal.pdf(xi);
    if !(f > 0.0) {
        return Err(Error::Domain(format!(
            "density vanishes at the {p}-quantile {xi}; the representation is undefined"
        )));
    }
    Ok((xi, f))
}

/// `R_n = xi_{p,n} - xi_p + (F_n(xi_p) - p) / f(xi_p)`.
pub fn remainder_from_ecdf(ecdf: &EmpiricalCdf, marginal: &Marginal, p: f64) -> Result<f64> {
    let (xi, f) = quantile_and_density(marginal, p)?;
    let xi_n = ecdf.quantile(p)?.value;
    Ok(xi_n - xi + (ecdf.eval(xi) - p) / f)
}

pub fn remainder(path: &SamplePath, marginal: &Marginal, p: f64) -> Result<f64> {
    remainder_from_ecdf(&EmpiricalCdf::from_path(path)?, marginal, p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichCheck {
    pub holds: bool,
    pub fn_at_quantile: f64,
}

/// Checks `p <= F_n(xi_{p,n}) < p + 1/n` on a path with pairwise-distinct
/// values.
pub fn quantile_sandwich_check(path: &SamplePath, p: f64) -> Result<SandwichCheck> {
    let ecdf = EmpiricalCdf::from_path(path)?;
    if let Some(w) = ecdf.sorted_values().windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Hypothesis(format!(
            "sample contains the repeated value {}; the sandwich needs distinct values",
            w[0]
        )));
    }
    let xi_n = ecdf.quantile(p)?.value;
    let count = ecdf.count_le(xi_n);
    let n = ecdf.n() as f64;
    let fn_at = count as f64 / n;
    // `F_n(xi) < p + 1/n` is tested as `(count - 1) / n < p`; the rounded
    // sum `p + 1/n` can land exactly on `F_n(xi)`.
    let below = (count - 1) as f64 / n;
    Ok(SandwichCheck {
        holds: p <= fn_at && below < p,
        fn_at_quantile: fn_at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileErrorCheck {
    pub deviation: f64,
    pub bound: f64,
    pub within: bool,
}

/// `|xi_{p,n} - xi_p|` against `(2 sqrt(C_3) + delta) (ln n)^{1/2} / (f(xi_p) n^{1/2})`.
pub fn quantile_error_check(
    path: &SamplePath,
    marginal: &Marginal,
    p: f64,
    delta: f64,
    c3: f64,
) -> Result<QuantileErrorCheck> {
    let (xi, f) = quantile_and_density(marginal, p)?;
    let ecdf = EmpiricalCdf::from_path(path)?;
    let deviation = (ecdf.quantile(p)?.value - xi).abs();
    let bound = quantile_error_radius(ecdf.n(), f, c3, delta);
    Ok(QuantileErrorCheck {
        deviation,
        bound,
        within: deviation <= bound,
    })
}

/// Envelope values attached to one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelopes {
    pub oscillation_narrow: f64,
    pub oscillation_wide: f64,
    pub deviation_wide: f64,
    pub quantile_error: f64,
}

/// `true` where the statistic exceeds its envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    /// `|R_n|` above the narrow-window oscillation envelope.
    pub remainder: bool,
    pub oscillation_narrow: bool,
    pub oscillation_wide: bool,
    pub sup_dev_wide: bool,
    pub quantile_error: bool,
}

/// Every per-path statistic and envelope for one `(path, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BahadurDiagnostics {
    pub spec_id: String,
    pub seed: u64,
    pub n: usize,
    pub p: f64,
    pub xi_p: f64,
    pub xi_pn: f64,
    pub f_xi: f64,
    pub remainder: f64,
    /// Oscillation over the narrow window.
    pub oscillation_narrow: f64,
    /// Oscillation over the wide window.
    pub oscillation_wide: f64,
    /// `sup |F_n - F|` over the wide window.
    pub sup_dev_wide: f64,
    /// `|xi_{p,n} - xi_p|`.
    pub quantile_error: f64,
    /// Density suprema over the narrow and wide windows.
    pub d_narrow: f64,
    pub d_wide: f64,
    pub envelopes: Envelopes,
    pub violations: Violations,
    /// A window extended beyond the marginal's support.
    pub clipped: bool,
}

/// Marginal and mixing constant needed to diagnose a path.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsModel<'a> {
    pub marginal: &'a Marginal,
    pub c3: f64,
    pub constants: BahadurConstants,
}

pub fn diagnose(path: &SamplePath, model: &DiagnosticsModel<'_>, p: f64) -> Result<BahadurDiagnostics> {
    let ecdf = EmpiricalCdf::from_path(path)?;
    diagnose_ecdf(&ecdf, path, model, p)
}

/// As [`diagnose`], reusing an already sorted sample across several `p`.
pub fn diagnose_ecdf(
    ecdf: &EmpiricalCdf,
    path: &SamplePath,
    model: &DiagnosticsModel<'_>,
    p: f64,
) -> Result<BahadurDiagnostics> {
    let marginal = model.marginal;
    let n = ecdf.n();
    let (xi, f_xi) = quantile_and_density(marginal, p)?;
    let inputs = WindowInputs {
        constants: model.constants,
        c3: model.c3,
        f_xi,
    };
    let narrow = window(WindowKind::Narrow, n, xi, &inputs)?;
    let wide = window(WindowKind::Wide, n, xi, &inputs)?;

    let xi_pn = ecdf.quantile(p)?.value;
    let remainder = xi_pn - xi + (ecdf.eval(xi) - p) / f_xi;
    let osc_narrow = oscillation_sup(ecdf, marginal, p, &narrow)?;
    let osc_wide = oscillation_sup(ecdf, marginal, p, &wide)?;
    let dev_wide = deviation_sup(ecdf, marginal, &wide)?;
    let quantile_error = (xi_pn - xi).abs();

    let (nlo, nhi) = narrow.bounds();
    let (wlo, whi) = wide.bounds();
    let d_narrow = marginal.sup_pdf(nlo, nhi);
    let d_wide = marginal.sup_pdf(wlo, whi);
    let theta = model.constants.theta;
    let envelopes = Envelopes {
        oscillation_narrow: envelope(EnvelopeKind::OscillationNarrow, n as f64, d_narrow, model.c3, theta),
        oscillation_wide: envelope(EnvelopeKind::OscillationWide, n as f64, d_wide, model.c3, theta),
        deviation_wide: envelope(EnvelopeKind::DeviationWide, n as f64, d_wide, model.c3, theta),
        quantile_error: quantile_error_radius(n, f_xi, model.c3, model.constants.delta),
    };
    let violations = Violations {
        remainder: remainder.abs() > envelopes.oscillation_narrow,
        oscillation_narrow: osc_narrow.value > envelopes.oscillation_narrow,
        oscillation_wide: osc_wide.value > envelopes.oscillation_wide,
        sup_dev_wide: dev_wide.value > envelopes.deviation_wide,
        quantile_error: quantile_error > envelopes.quantile_error,
    };
    Ok(BahadurDiagnostics {
        spec_id: path.spec_id.clone(),
        seed: path.seed,
        n,
        p,
        xi_p: xi,
        xi_pn,
        f_xi,
        remainder,
        oscillation_narrow: osc_narrow.value,
        oscillation_wide: osc_wide.value,
        sup_dev_wide: dev_wide.value,
        quantile_error,
        d_narrow,
        d_wide,
        envelopes,
        violations,
        clipped: osc_narrow.clipped || osc_wide.clipped,
    })
}
