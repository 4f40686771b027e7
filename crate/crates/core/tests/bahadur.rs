use bahadur_core::bahadur::{
    diagnose, envelope, half_width, oscillation_sup, quantile_error_check,
    quantile_sandwich_check, remainder, remainder_from_ecdf, sup_abs_deviation, DiagnosticsModel,
    WindowInputs,
};
use bahadur_core::harness::{Aggregate, Statistic};
use bahadur_core::{
    BahadurConstants, EmpiricalCdf, EnvelopeKind, Marginal, ProcessConfig, ProcessSpec,
    SamplePath, WindowKind, WindowSpec,
};
use proptest::prelude::*;

fn marginal() -> impl Strategy<Value = Marginal> {
    prop_oneof![
        Just(Marginal::standard_uniform()),
        Just(Marginal::standard_exponential()),
        Just(Marginal::standard_normal()),
        Just(Marginal::Bates { k: 3 }),
    ]
}

fn stratified(marginal: &Marginal, n: usize) -> SamplePath {
    SamplePath::from_values(
        (1..=n)
            .map(|i| marginal.inv_cdf((i as f64 - 0.5) / n as f64).unwrap())
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn remainder_rearranges_to_quantile(m in marginal(), n in 1usize..500, seed in any::<u64>(), p in 0.02..0.98f64) {
        let path = ProcessSpec::new(ProcessConfig::iid(m)).unwrap().generate(n, seed).unwrap();
        let ecdf = EmpiricalCdf::from_path(&path).unwrap();
        let r = remainder_from_ecdf(&ecdf, &m, p).unwrap();
        let xi = m.inv_cdf(p).unwrap();
        let f = m.pdf(xi);
        let linear = (ecdf.eval(xi) - p) / f;
        let xi_n = ecdf.quantile(p).unwrap().value;
        let scale = xi_n.abs() + xi.abs() + linear.abs();
        prop_assert!((xi - linear + r - xi_n).abs() <= 8.0 * f64::EPSILON * scale);
        // triangle inequality
        prop_assert!(r.abs() <= (xi_n - xi).abs() + linear.abs() + 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn sandwich_holds_on_distinct_paths(m in marginal(), n in 1usize..2000, seed in any::<u64>(), p in 1e-6..0.999999f64) {
        let path = ProcessSpec::new(ProcessConfig::iid(m)).unwrap().generate(n, seed).unwrap();
        let check = quantile_sandwich_check(&path, p).unwrap();
        prop_assert!(check.holds, "F_n(xi_pn) = {}", check.fn_at_quantile);
    }

    #[test]
    fn suprema_are_nonnegative(m in marginal(), n in 16usize..400, seed in any::<u64>(), p in 0.05..0.95f64) {
        let spec = ProcessSpec::new(ProcessConfig::iid(m)).unwrap();
        let path = spec.generate(n, seed).unwrap();
        let model = DiagnosticsModel { marginal: &m, c3: 4.0, constants: BahadurConstants::default() };
        let d = diagnose(&path, &model, p).unwrap();
        prop_assert!(d.oscillation_narrow >= 0.0);
        prop_assert!(d.oscillation_wide >= d.oscillation_narrow);
        prop_assert!(d.sup_dev_wide >= 0.0);
        prop_assert_eq!(d.envelopes.deviation_wide, d.envelopes.oscillation_wide / 2.0);
    }

    #[test]
    fn degenerate_window_has_zero_oscillation(m in marginal(), n in 1usize..300, seed in any::<u64>(), p in 0.05..0.95f64) {
        let path = ProcessSpec::new(ProcessConfig::iid(m)).unwrap().generate(n, seed).unwrap();
        let ecdf = EmpiricalCdf::from_path(&path).unwrap();
        let xi = m.inv_cdf(p).unwrap();
        let w = WindowSpec { kind: WindowKind::Narrow, center: xi, half_width: 0.0 };
        let h = oscillation_sup(&ecdf, &m, p, &w).unwrap().value;
        // F(xi) equals p up to the rounding of the inverse
        prop_assert!(h <= 4.0 * f64::EPSILON, "H = {h}");
    }

    #[test]
    fn deviation_envelope_is_half(n in 3.0..1e9f64, d in 0.0..10.0f64, c3 in 4.0..100.0f64, theta in 0.01..5.0f64) {
        prop_assert_eq!(
            envelope(EnvelopeKind::DeviationWide, n, d, c3, theta),
            envelope(EnvelopeKind::OscillationWide, n, d, c3, theta) / 2.0
        );
    }
}

#[test]
fn two_point_window_by_hand() {
    let ecdf = EmpiricalCdf::new(vec![0.2, 0.8]).unwrap();
    let offset = ecdf.eval(0.5) - 0.5;
    // (x, F_n) at 0.1, 0.2-, 0.2, 0.8-, 0.8, 0.9
    let candidates = [
        (0.1, 0.0),
        (0.2, 0.0),
        (0.2, 0.5),
        (0.8, 0.5),
        (0.8, 1.0),
        (0.9, 1.0),
    ];
    let hand = candidates
        .iter()
        .map(|&(x, fn_x): &(f64, f64)| (fn_x - x - offset).abs())
        .fold(0.0, f64::max);
    let w = WindowSpec {
        kind: WindowKind::Narrow,
        center: 0.5,
        half_width: 0.4,
    };
    let m = Marginal::standard_uniform();
    let got = oscillation_sup(&ecdf, &m, 0.5, &w).unwrap().value;
    assert!((got - hand).abs() < 1e-15, "{got} vs {hand}");
    assert_eq!(sup_abs_deviation(&ecdf, |x| x, 0.1, 0.9, offset), got);
}

#[test]
fn stratified_uniform_remainder() {
    let m = Marginal::standard_uniform();
    for n in [2, 10, 64, 1000] {
        let r = remainder(&stratified(&m, n), &m, 0.5).unwrap();
        assert!((r + 1.0 / (2.0 * n as f64)).abs() < 1e-15, "n = {n}: {r}");
    }
}

#[test]
fn stratified_paths_are_within_quantile_radius() {
    for m in [
        Marginal::standard_uniform(),
        Marginal::standard_exponential(),
        Marginal::standard_normal(),
    ] {
        for n in [16, 100, 5000] {
            let path = stratified(&m, n);
            let p = 0.3;
            let check = quantile_error_check(&path, &m, p, 0.1, 4.0).unwrap();
            let f = m.pdf(m.inv_cdf(p).unwrap());
            assert!(check.within);
            assert!(check.deviation <= 1.0 / (2.0 * n as f64 * f) * 1.05 + 1e-12);
        }
    }
}

#[test]
fn remainder_with_exact_centre_is_quantile_error() {
    // F_n(0.5) = 0.5 exactly for this path
    let path = SamplePath::from_values(vec![0.1, 0.3, 0.7, 0.9]);
    let m = Marginal::standard_uniform();
    assert_eq!(remainder(&path, &m, 0.5).unwrap(), 0.3 - 0.5);
}

#[test]
fn window_widths_by_formula() {
    let inputs = WindowInputs {
        constants: BahadurConstants {
            c0: 1.0,
            theta: 1e-300,
            delta: 0.1,
        },
        c3: 4.0,
        f_xi: 1.0,
    };
    let a = half_width(WindowKind::Narrow, 55, &inputs).unwrap();
    assert!((a - 55f64.powf(-0.5) * 55f64.ln().powf(0.75)).abs() < 1e-15);
    let tau = half_width(WindowKind::Wide, 10_000, &inputs).unwrap();
    let l = 1e4f64.ln();
    assert!((tau - 8.0 * l.powf(1.5) / (100.0 * l.ln().sqrt())).abs() < 1e-14);

    for kind in [WindowKind::Narrow, WindowKind::Wide, WindowKind::QuantileError] {
        let mut prev = f64::INFINITY;
        for k in 0..=50 {
            let n = (1e3 * 10f64.powf(k as f64 / 10.0)).round() as usize;
            let w = half_width(kind, n, &inputs).unwrap();
            assert!(w > 0.0 && w < prev, "{kind:?} at n = {n}");
            prev = w;
        }
    }
}

#[test]
fn envelope_plug_in_values() {
    let e = std::f64::consts::E;
    let narrow = envelope(EnvelopeKind::OscillationNarrow, e, 1.0, 4.0, 1.0);
    assert!((narrow - 17.0 * e.powf(-0.75)).abs() < 1e-15);
    let wide = envelope(EnvelopeKind::OscillationWide, 1e4, 1.0, 4.0, 1.0);
    assert!((wide - 2.0 * (65.0 * 1e4f64.ln() / 1e4).sqrt()).abs() < 1e-15);
}

fn replications(n: usize, reps: u64, p: f64) -> Vec<bahadur_core::BahadurDiagnostics> {
    let m = Marginal::standard_uniform();
    let spec = ProcessSpec::new(ProcessConfig::iid(m)).unwrap();
    let model = DiagnosticsModel {
        marginal: &m,
        c3: 4.0,
        constants: BahadurConstants::default(),
    };
    (0..reps)
        .map(|r| diagnose(&spec.generate(n, 500 + r).unwrap(), &model, p).unwrap())
        .collect()
}

#[test]
fn iid_remainder_scale() {
    let n = 1 << 14;
    let stats: Vec<f64> = replications(n, 200, 0.5)
        .iter()
        .map(|d| Statistic::AbsRemainder.of(d))
        .collect();
    let median = Aggregate::Median.apply(&stats);
    let scale = 4.0 * (n as f64).powf(-0.75) * (n as f64).ln();
    assert!(median < scale, "median |R_n| {median} vs {scale}");
}

#[test]
fn iid_quantile_error_rarely_exceeds_radius() {
    let diags = replications(1 << 16, 200, 0.5);
    let violations = diags.iter().filter(|d| d.violations.quantile_error).count();
    assert!(violations <= 2, "{violations} of 200");
}
