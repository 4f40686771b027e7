use bahadur_core::processes::markov::{deviation_powers, two_state};
use bahadur_core::processes::{phi_markov, SquareMatrix};
use bahadur_core::rng::path_rng;
use bahadur_core::{EmpiricalCdf, Marginal, MixingProfile, ProcessConfig, ProcessSpec};
use rand::seq::SliceRandom;
use rand::Rng;

fn lag_corr(v: &[f64], lag: usize) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let cov = v
        .windows(lag + 1)
        .map(|w| (w[0] - mean) * (w[lag] - mean))
        .sum::<f64>()
        / n;
    cov / var
}

fn shipped_generators() -> Vec<ProcessConfig> {
    let three_state = SquareMatrix::from_rows(&[
        vec![0.5, 0.3, 0.2],
        vec![0.2, 0.5, 0.3],
        vec![0.3, 0.2, 0.5],
    ])
    .unwrap();
    vec![
        ProcessConfig::iid(Marginal::standard_uniform()),
        ProcessConfig::iid(Marginal::standard_exponential()),
        ProcessConfig::iid(Marginal::standard_normal()),
        ProcessConfig::m_dependent(1),
        ProcessConfig::m_dependent(3),
        ProcessConfig::two_state(0.3, Marginal::standard_normal()),
        ProcessConfig::markov_copula(&three_state, Marginal::standard_exponential()),
    ]
}

#[test]
fn pooled_marginal_matches_law() {
    for config in shipped_generators() {
        let spec = ProcessSpec::new(config).unwrap();
        let pooled: Vec<f64> = (0..10)
            .flat_map(|s| spec.generate(100_000, 40 + s).unwrap().values)
            .collect();
        let ecdf = EmpiricalCdf::new(pooled).unwrap();
        for k in 1..=9 {
            let p = k as f64 / 10.0;
            let x = spec.marginal().inv_cdf(p).unwrap();
            let band = 5.0 * 3.0 * (p * (1.0 - p) / 1e6).sqrt();
            let got = ecdf.eval(x);
            assert!((got - p).abs() <= band, "{} at p = {p}: {got}", spec.id());
        }
    }
}

#[test]
fn values_stay_in_support_and_regenerate() {
    for config in shipped_generators() {
        let spec = ProcessSpec::new(config).unwrap();
        let a = spec.generate(2000, 17).unwrap();
        let (lo, hi) = spec.marginal().support();
        assert_eq!(a.n(), 2000);
        assert!(a.values.iter().all(|&v| v >= lo && v <= hi));
        let b = spec.generate(2000, 17).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

#[test]
fn generation_ignores_thread_pool() {
    let spec = ProcessSpec::new(ProcessConfig::two_state(0.1, Marginal::standard_normal())).unwrap();
    let reference = spec.generate(5000, 3).unwrap();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        assert_eq!(pool.install(|| spec.generate(5000, 3).unwrap()), reference);
    }
}

#[test]
fn two_state_copula_lag_one_correlation() {
    // U = (S + V) / 2 with S the chain state: Corr(U_0, U_1) = 3 (1 - 2a) / 4
    let spec = ProcessSpec::new(ProcessConfig::two_state(0.1, Marginal::standard_uniform())).unwrap();
    let path = spec.generate(100_000, 5).unwrap();
    let r = lag_corr(&path.values, 1);
    assert!(r > 0.0);
    assert!((r - 0.6).abs() < 0.03, "lag-1 correlation {r}");

    let indep = ProcessSpec::new(ProcessConfig::two_state(0.5, Marginal::standard_uniform())).unwrap();
    let r = lag_corr(&indep.generate(10_000, 5).unwrap().values, 1);
    assert!(r.abs() < 0.04, "lag-1 correlation {r}");
}

#[test]
fn moving_average_correlations() {
    let path = ProcessSpec::new(ProcessConfig::m_dependent(2)).unwrap().generate(100_000, 9).unwrap();
    assert!((lag_corr(&path.values, 1) - 2.0 / 3.0).abs() < 0.02);
    assert!((lag_corr(&path.values, 2) - 1.0 / 3.0).abs() < 0.02);
    assert!(lag_corr(&path.values, 3).abs() < 0.02);
}

#[test]
fn profile_shapes() {
    assert!((1..100).all(|n| MixingProfile::zero().phi(n) == 0.0));
    let m2 = ProcessSpec::new(ProcessConfig::m_dependent(2)).unwrap();
    let phis: Vec<f64> = (1..=5).map(|n| m2.mixing().phi(n)).collect();
    assert_eq!(phis, vec![1.0, 1.0, 0.0, 0.0, 0.0]);
    assert_eq!(m2.mixing().c3().unwrap(), 36.0);

    let markov = ProcessSpec::new(ProcessConfig::two_state(0.3, Marginal::standard_uniform())).unwrap();
    let closed = 4.0 * (1.0 + 4.0 * 0.4f64.sqrt() / (1.0 - 0.4f64.sqrt()) / 2f64.sqrt());
    assert!((markov.mixing().c3().unwrap() - closed).abs() < 1e-10);
}

fn random_doubly_stochastic(k: usize, rng: &mut impl Rng) -> SquareMatrix {
    let mut m = vec![vec![0.1 / k as f64; k]; k];
    let weights: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(rng);
        for (i, &j) in perm.iter().enumerate() {
            m[i][j] += 0.9 * w / total;
        }
    }
    SquareMatrix::from_rows(&m).unwrap()
}

#[test]
fn phi_equals_subset_enumeration_up_to_ten_states() {
    let mut rng = path_rng(77);
    for k in 2..=10 {
        for _ in 0..5 {
            let p = random_doubly_stochastic(k, &mut rng);
            let profile = phi_markov(&p, 100_000).unwrap();
            for (lag, d) in deviation_powers(&p, 10).iter().enumerate() {
                let best = (0..k)
                    .flat_map(|i| {
                        (0u32..1 << k).map(move |mask| {
                            (0..k)
                                .filter(|j| mask & (1 << j) != 0)
                                .map(|j| d.get(i, j))
                                .sum::<f64>()
                                .abs()
                        })
                    })
                    .fold(0.0, f64::max);
                assert_eq!(profile.phi(lag + 1), best, "K = {k}, lag {}", lag + 1);
            }
        }
    }
}

#[test]
fn phi_is_monotone_and_bounded() {
    let mut rng = path_rng(78);
    let mut chains = vec![two_state(0.05), two_state(0.3), two_state(0.45)];
    chains.extend((0..10).map(|i| random_doubly_stochastic(2 + i % 6, &mut rng)));
    for p in chains {
        let profile = phi_markov(&p, 100_000).unwrap();
        let mut prev = 1.0;
        for n in 1..2000 {
            let phi = profile.phi(n);
            assert!((0.0..=prev).contains(&phi), "phi({n}) = {phi} after {prev}");
            prev = phi;
        }
        assert!(profile.half_series(1e-12).unwrap().is_finite());
    }
}

#[test]
fn two_state_closed_form_over_long_lags() {
    for a in [0.1, 0.3, 0.45] {
        let profile = phi_markov(&two_state(a), 100_000).unwrap();
        for n in 1..=30 {
            let closed = (1.0 - 2.0 * a).abs().powi(n) / 2.0;
            assert!((profile.phi(n as usize) - closed).abs() <= 1e-12);
        }
    }
}

#[test]
fn half_series_geometric_closed_form() {
    let profile = phi_markov(&two_state(0.3), 100_000).unwrap();
    let closed = 0.4f64.sqrt() / (1.0 - 0.4f64.sqrt()) / 2f64.sqrt();
    assert!((profile.half_series(1e-14).unwrap() - closed).abs() < 1e-10);
    assert_eq!(MixingProfile::m_dependent(1).half_series(1e-12).unwrap(), 1.0);
    assert_eq!(MixingProfile::zero().half_series(1e-12).unwrap(), 0.0);
}

#[test]
fn invalid_specs_are_rejected() {
    let bad = [
        ProcessConfig::MarkovCopula {
            transition: vec![vec![0.5, 0.6], vec![0.5, 0.4]],
            marginal: Marginal::standard_uniform(),
        },
        ProcessConfig::MarkovCopula {
            transition: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            marginal: Marginal::standard_uniform(),
        },
        ProcessConfig::iid(Marginal::Normal { mean: 0.0, sd: 0.0 }),
    ];
    for config in bad {
        assert!(ProcessSpec::new(config.clone()).is_err(), "{config:?}");
    }
    let spec = ProcessSpec::new(ProcessConfig::m_dependent(1)).unwrap();
    assert!(spec.generate(0, 1).is_err());
}
