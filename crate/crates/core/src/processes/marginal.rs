//! Analytic marginal laws with exact CDF, density and inverse.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest Bates order accepted (`k!` must be exact in a double).
pub const MAX_BATES_ORDER: u32 = 18;

/// A continuous marginal distribution.
///
/// Every variant has a unimodal density, so the supremum of the density
/// over an interval is attained at the mode clamped into the interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    Uniform {
        #[serde(default)]
        low: f64,
        #[serde(default = "one")]
        high: f64,
    },
    Exponential {
        #[serde(default = "one")]
        rate: f64,
    },
    Normal {
        #[serde(default)]
        mean: f64,
        #[serde(default = "one")]
        sd: f64,
    },
    /// Mean of `k` independent standard uniforms.
    Bates { k: u32 },
}

fn one() -> f64 {
    1.0
}

impl Marginal {
    pub fn standard_uniform() -> Self {
        Marginal::Uniform {
            low: 0.0,
            high: 1.0,
        }
    }

    pub fn standard_exponential() -> Self {
        Marginal::Exponential { rate: 1.0 }
    }

    pub fn standard_normal() -> Self {
        Marginal::Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            Marginal::Exponential { rate } => rate.is_finite() && rate > 0.0,
            Marginal::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            Marginal::Bates { k } => (1..=MAX_BATES_ORDER).contains(&k),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Spec(format!("invalid marginal parameters: {self:?}")))
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Marginal::Uniform { low, high } if low == 0.0 && high == 1.0 => "uniform".into(),
            Marginal::Uniform { low, high } => format!("uniform({low}:{high})"),
            Marginal::Exponential { rate: 1.0 } => "exponential".into(),
            Marginal::Exponential { rate } => format!("exponential({rate})"),
            Marginal::Normal { mean, sd } if mean == 0.0 && sd == 1.0 => "normal".into(),
            Marginal::Normal { mean, sd } => format!("normal({mean}:{sd})"),
            Marginal::Bates { k } => format!("bates({k})"),
        }
    }

    /// Closed support interval (endpoints may be infinite).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Marginal::Uniform { low, high } => (low, high),
            Marginal::Exponential { .. } => (0.0, f64::INFINITY),
            Marginal::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Marginal::Bates { .. } => (0.0, 1.0),
        }
    }

    pub fn mode(&self) -> f64 {
        match *self {
            Marginal::Uniform { low, high } => 0.5 * (low + high),
            Marginal::Exponential { .. } => 0.0,
            Marginal::Normal { mean, .. } => mean,
            Marginal::Bates { .. } => 0.5,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            Marginal::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Marginal::Normal { mean, sd } => normal(mean, sd).cdf(x),
            Marginal::Bates { k } => bates_cdf(k, x),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::Uniform { low, high } => {
                if (low..=high).contains(&x) {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            Marginal::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Marginal::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            Marginal::Bates { k } => bates_pdf(k, x),
        }
    }

    /// Derivative of the density where it exists (one-sided at kinks).
    pub fn pdf_derivative(&self, x: f64) -> f64 {
        match *self {
            Marginal::Uniform { .. } => 0.0,
            Marginal::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    -rate * rate * (-rate * x).exp()
                }
            }
            Marginal::Normal { mean, sd } => -(x - mean) / (sd * sd) * self.pdf(x),
            Marginal::Bates { k } => bates_pdf_derivative(k, x),
        }
    }

    /// Quantile function `inf{x : cdf(x) >= t}`, exact with respect to the
    /// floating-point CDF: the result is the smallest double `x` with
    /// `cdf(x) >= t`.
    pub fn inv_cdf(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Argument(format!("quantile level {t} outside (0,1)")));
        }
        let guess = match *self {
            Marginal::Uniform { low, high } => low + t * (high - low),
            Marginal::Exponential { rate } => -(-t).ln_1p() / rate,
            Marginal::Normal { mean, sd } => normal(mean, sd).inverse_cdf(t),
            Marginal::Bates { .. } => 0.5,
        };
        Ok(smallest_at_least(|x| self.cdf(x), t, guess, self.support()))
    }

    /// Draws a value from a uniform in (0, 1) through the quantile function.
    pub(crate) fn transform_uniform(&self, u: f64) -> f64 {
        match *self {
            Marginal::Uniform { low, high } => low + u * (high - low),
            Marginal::Exponential { rate } => -(-u).ln_1p() / rate,
            Marginal::Normal { mean, sd } => normal(mean, sd).inverse_cdf(u),
            Marginal::Bates { .. } => self
                .inv_cdf(u)
                .expect("uniform draws lie strictly inside (0, 1)"),
        }
    }

    /// `sup f` over `[lo, hi]` (unimodal densities).
    pub fn sup_pdf(&self, lo: f64, hi: f64) -> f64 {
        let (slo, shi) = self.support();
        let lo = lo.max(slo);
        let hi = hi.min(shi);
        if lo > hi {
            return 0.0;
        }
        self.pdf(self.mode().clamp(lo, hi))
    }

    /// Grid estimate of `sup |f'|` over `[center - radius, center + radius]`.
    pub fn pdf_derivative_bound(&self, center: f64, radius: f64) -> f64 {
        const POINTS: usize = 401;
        let lo = center - radius;
        let step = 2.0 * radius / (POINTS - 1) as f64;
        (0..POINTS)
            .map(|i| self.pdf_derivative(lo + step * i as f64).abs())
            .fold(0.0, f64::max)
    }
}

fn normal(mean: f64, sd: f64) -> Normal {
    Normal::new(mean, sd).expect("validated normal parameters")
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Irwin-Hall sum `sum_{j <= floor(x)} (-1)^j C(k, j) (x - j)^power`.
fn irwin_hall_sum(k: u32, x: f64, power: u32) -> f64 {
    let top = (x.floor() as u32).min(k);
    (0..=top)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(k, j) * (x - f64::from(j)).powi(power as i32)
        })
        .sum()
}

/// Unevaluated sum `hi + lo` of two doubles.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        DoubleDouble {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        DoubleDouble {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        Self::two_sum(s.hi, lo)
    }

    fn mul(self, o: Self) -> Self {
        let p = Self::two_prod(self.hi, o.hi);
        let lo = p.lo + self.hi * o.lo + self.lo * o.hi;
        Self::two_sum(p.hi, lo)
    }

    fn scale(self, c: f64) -> Self {
        let p = Self::two_prod(self.hi, c);
        Self::two_sum(p.hi, p.lo + self.lo * c)
    }

    /// Nearest double to `(hi + lo) / d`.
    fn div_to_f64(self, d: f64) -> f64 {
        let q = self.hi / d;
        let r = (-q).mul_add(d, self.hi) + self.lo;
        q + r / d
    }
}

/// Irwin-Hall CDF of `k` uniforms at `k * y` for `y <= 1/2`, summed in
/// double-double so the alternating series stays monotone in `y`.
fn bates_cdf_lower(k: u32, y: f64) -> f64 {
    let x = DoubleDouble::two_prod(f64::from(k), y);
    let top = ((x.hi + x.lo).floor() as u32).min(k);
    let mut acc = DoubleDouble { hi: 0.0, lo: 0.0 };
    for j in 0..=top {
        let base = x.add(DoubleDouble {
            hi: -f64::from(j),
            lo: 0.0,
        });
        let mut pow = DoubleDouble { hi: 1.0, lo: 0.0 };
        for _ in 0..k {
            pow = pow.mul(base);
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc.add(pow.scale(sign * binomial(k, j)));
    }
    acc.div_to_f64(factorial(k)).clamp(0.0, 1.0)
}

fn bates_cdf(k: u32, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    if y > 0.5 {
        return 1.0 - bates_cdf_lower(k, 1.0 - y);
    }
    bates_cdf_lower(k, y)
}

fn bates_pdf(k: u32, y: f64) -> f64 {
    if !(0.0..=1.0).contains(&y) {
        return 0.0;
    }
    if k == 1 {
        return 1.0;
    }
    let y = if y > 0.5 { 1.0 - y } else { y };
    let x = f64::from(k) * y;
    (f64::from(k) * irwin_hall_sum(k, x, k - 1) / factorial(k - 1)).max(0.0)
}

fn bates_pdf_derivative(k: u32, y: f64) -> f64 {
    if k == 1 || !(0.0..=1.0).contains(&y) {
        return 0.0;
    }
    // the density is symmetric about 1/2, so its derivative is odd
    let (y, sign) = if y > 0.5 { (1.0 - y, -1.0) } else { (y, 1.0) };
    let kf = f64::from(k);
    sign * kf * kf * irwin_hall_sum(k, kf * y, k - 2) / factorial(k - 2)
}

/// Order-preserving map from doubles to integers.
fn float_key(x: f64) -> i64 {
    let bits = x.to_bits() as i64;
    if bits < 0 {
        i64::MIN - bits
    } else {
        bits
    }
}

fn key_float(k: i64) -> f64 {
    let bits = if k < 0 { i64::MIN - k } else { k };
    f64::from_bits(bits as u64)
}

/// Smallest double `x` in `support` with `cdf(x) >= t`, for a nondecreasing
/// `cdf` that reaches `t` inside the support. `guess` seeds the bracket.
pub(crate) fn smallest_at_least(
    cdf: impl Fn(f64) -> f64,
    t: f64,
    guess: f64,
    support: (f64, f64),
) -> f64 {
    let (slo, shi) = support;
    let guess = if guess.is_finite() {
        guess.clamp(slo, shi)
    } else {
        0.0f64.clamp(slo, shi)
    };
    let mut step = 1e-9 * guess.abs().max(1.0);

    // hi: cdf(hi) >= t
    let mut hi = guess;
    while cdf(hi) < t {
        hi = (guess + step).min(shi);
        step *= 2.0;
        if hi >= shi {
            hi = shi;
            break;
        }
    }
    // lo: cdf(lo) < t, or lo is the lower support edge with cdf(lo) >= t
    let mut step = 1e-9 * guess.abs().max(1.0);
    let mut lo = hi;
    loop {
        if cdf(lo) < t {
            break;
        }
        if lo <= slo {
            return slo;
        }
        lo = (hi - step).max(slo);
        step *= 2.0;
    }

    let (mut a, mut b) = (float_key(lo), float_key(hi));
    while b - a > 1 {
        let mid = a + (b - a) / 2;
        if cdf(key_float(mid)) >= t {
            b = mid;
        } else {
            a = mid;
        }
    }
    key_float(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> Vec<Marginal> {
        vec![
            Marginal::standard_uniform(),
            Marginal::Uniform {
                low: -2.0,
                high: 3.0,
            },
            Marginal::standard_exponential(),
            Marginal::Exponential { rate: 2.5 },
            Marginal::standard_normal(),
            Marginal::Normal {
                mean: 0.001,
                sd: 0.02,
            },
            Marginal::Bates { k: 1 },
            Marginal::Bates { k: 2 },
            Marginal::Bates { k: 3 },
            Marginal::Bates { k: 7 },
            Marginal::Bates { k: 18 },
        ]
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
        let h = (b - a) / intervals as f64;
        let mut s = f(a) + f(b);
        for i in 1..intervals {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + h * i as f64);
        }
        s * h / 3.0
    }

    #[test]
    fn density_integrates_to_one() {
        for m in all() {
            let (lo, hi) = m.support();
            let lo = if lo.is_finite() { lo } else { m.mode() - 40.0 * spread(&m) };
            let hi = if hi.is_finite() { hi } else { m.mode() + 40.0 * spread(&m) };
            // split at 1/2 so the triangular kink of Bates(2) sits on a node
            let mid = 0.5 * (lo + hi);
            let total = simpson(|x| m.pdf(x), lo, mid, 20_000) + simpson(|x| m.pdf(x), mid, hi, 20_000);
            assert!((total - 1.0).abs() < 1e-6, "{m:?}: {total}");
        }
    }

    fn spread(m: &Marginal) -> f64 {
        match *m {
            Marginal::Normal { sd, .. } => sd,
            Marginal::Exponential { rate } => 1.0 / rate,
            _ => 1.0,
        }
    }

    #[test]
    fn cdf_matches_integrated_density() {
        for m in all() {
            for p in [0.05, 0.3, 0.5, 0.8] {
                let x = m.inv_cdf(p).unwrap();
                let start = m.inv_cdf(1e-9).unwrap();
                let integral = simpson(|s| m.pdf(s), start, x, 20_000) + 1e-9;
                assert!((integral - p).abs() < 1e-6, "{m:?} p={p}: {integral}");
            }
        }
    }

    #[test]
    fn inverse_laws_on_grid() {
        for m in all() {
            for i in 1..1000 {
                let t = i as f64 / 1000.0;
                let x = m.inv_cdf(t).unwrap();
                assert!(m.cdf(x) >= t, "{m:?} t={t}");
                assert!(m.cdf(x.next_down()) < t || x <= m.support().0);
                let back = m.inv_cdf(m.cdf(x).min(1.0 - 1e-16)).unwrap();
                assert!(back <= x, "{m:?} t={t} x={x} back={back} F(x)={} F(back)={}", m.cdf(x), m.cdf(back));
            }
        }
    }

    #[test]
    fn density_positive_at_supported_quantiles() {
        for m in all() {
            for i in 1..=99 {
                let x = m.inv_cdf(i as f64 / 100.0).unwrap();
                assert!(m.pdf(x) > 0.0, "{m:?} at p={}", i as f64 / 100.0);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for m in all() {
            for p in [0.1, 0.3, 0.7, 0.9] {
                let x = m.inv_cdf(p).unwrap();
                let h = 1e-6 * spread(&m);
                let fd = (m.pdf(x + h) - m.pdf(x - h)) / (2.0 * h);
                assert!((fd - m.pdf_derivative(x)).abs() < 1e-4 * (1.0 + fd.abs()), "{m:?} p={p}");
            }
        }
    }

    #[test]
    fn known_values() {
        let e = Marginal::standard_exponential();
        assert!((e.inv_cdf(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        let b2 = Marginal::Bates { k: 2 };
        assert_eq!(b2.cdf(0.5), 0.5);
        assert!((b2.cdf(0.25) - 0.125).abs() < 1e-15);
        assert!((b2.pdf(0.5) - 2.0).abs() < 1e-15);
        let b3 = Marginal::Bates { k: 3 };
        assert!((b3.cdf(0.5) - 0.5).abs() < 1e-15);
        assert!((b3.pdf(0.5) - 2.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Marginal::Exponential { rate: 0.0 }.validate().is_err());
        assert!(Marginal::Bates { k: 0 }.validate().is_err());
        assert!(Marginal::Uniform { low: 1.0, high: 1.0 }.validate().is_err());
        assert!(Marginal::standard_uniform().inv_cdf(1.0).is_err());
    }
}
