mod common;

use cardsim::rng::RandomStream;
use cardsim::{Error, JobSizeModel};
use common::{exp1_partial, exp1_threshold, weibull_moment, weibull_partial_moment};
use proptest::prelude::*;

fn exp1() -> JobSizeModel {
    JobSizeModel::exponential(1.0).unwrap()
}

fn weibull_parts(m: &JobSizeModel) -> (f64, f64) {
    match *m {
        JobSizeModel::Weibull { shape, scale } => (shape, scale),
        _ => panic!("not Weibull"),
    }
}

#[test]
fn exponential_truncated_moments_match_quadrature() {
    let e = exp1();
    for m in [0.0, 0.01, 0.3, 1.0, 1.6783, 5.0, 20.0] {
        assert!((e.truncated_first_moment(m) - exp1_partial(1, m)).abs() < 1e-11, "m={m}");
        assert!((e.truncated_second_moment(m) - exp1_partial(2, m)).abs() < 1e-11, "m={m}");
    }
    assert!((e.truncated_first_moment(1.6783) - 0.5).abs() < 1e-4);
    assert!((e.truncated_second_moment(1.6783) - 0.474).abs() < 1e-3);
    assert!((e.truncated_first_moment(f64::INFINITY) - 1.0).abs() < 1e-12);
    assert!((e.truncated_second_moment(f64::INFINITY) - 2.0).abs() < 1e-12);
}

#[test]
fn exponential_thresholds_match_bisection_oracle() {
    let e = exp1();
    assert_eq!(e.solve_size_threshold(0.0).unwrap(), 0.0);
    assert!(e.solve_size_threshold(1.0).unwrap().is_infinite());
    for f in [0.25, 0.35, 0.5, 0.65, 0.75, 0.9, 0.95] {
        let m = e.solve_size_threshold(f).unwrap();
        let oracle = exp1_threshold(f);
        assert!((m - oracle).abs() < 1e-8 * oracle.max(1.0), "f={f}: {m} vs {oracle}");
    }
    assert!((e.solve_size_threshold(0.5).unwrap() - 1.678347).abs() < 1e-6);
}

#[test]
fn weibull_half_shape_mean_is_twice_scale() {
    for s in [0.5, 1.0, 3.0] {
        let w = JobSizeModel::weibull(0.5, s).unwrap();
        assert!((w.mean() - 2.0 * s).abs() < 1e-12 * s);
        let q = weibull_moment(0.5, s, 1);
        assert!((w.mean() - q).abs() < 1e-9 * q, "{} vs {q}", w.mean());
    }
}

#[test]
fn weibull_from_cv_realizes_target_by_quadrature() {
    for (cv, shape) in [(1.0, 1.0), (10.0, 0.233207), (100.0, 0.128047)] {
        let w = JobSizeModel::weibull_from_mean_cv(1.0, cv).unwrap();
        let (k, scale) = weibull_parts(&w);
        assert!((k - shape).abs() < 1e-5, "cv={cv}: shape {k}");
        let m1 = weibull_moment(k, scale, 1);
        let m2 = weibull_moment(k, scale, 2);
        let realized_cv = (m2 / (m1 * m1) - 1.0).sqrt();
        assert!((m1 - 1.0).abs() < 1e-7, "cv={cv}: mean {m1}");
        assert!((realized_cv - cv).abs() / cv < 1e-6, "cv={cv}: realized {realized_cv}");
        assert!((w.mean() - 1.0).abs() < 1e-9);
        assert!((w.cv() - cv).abs() / cv < 1e-9);
    }
}

#[test]
fn weibull_truncated_moments_match_quadrature() {
    for cv in [1.0, 10.0, 100.0] {
        let w = JobSizeModel::weibull_from_mean_cv(1.0, cv).unwrap();
        let (k, scale) = weibull_parts(&w);
        for f in [0.05, 0.35, 0.5, 0.65, 0.95] {
            let m = w.solve_size_threshold(f).unwrap();
            let q1 = weibull_partial_moment(k, scale, 1, m);
            let q2 = weibull_partial_moment(k, scale, 2, m);
            assert!((w.truncated_first_moment(m) - q1).abs() < 1e-8, "cv={cv} f={f}");
            assert!((q1 - f).abs() < 1e-8, "cv={cv} f={f}: oracle {q1}");
            assert!(
                (w.truncated_second_moment(m) - q2).abs() < 1e-7 * q2.max(1.0),
                "cv={cv} f={f}: {} vs {q2}",
                w.truncated_second_moment(m)
            );
        }
    }
}

#[test]
fn known_practical_thresholds() {
    let cases = [(10.0, 12.0088, 52.5799), (100.0, 230.73, 1812.18)];
    for (cv, m_minus, m_plus) in cases {
        let w = JobSizeModel::weibull_from_mean_cv(1.0, cv).unwrap();
        let a = w.solve_size_threshold(0.35).unwrap();
        let b = w.solve_size_threshold(0.65).unwrap();
        assert!((a - m_minus).abs() / m_minus < 1e-4, "cv={cv}: {a}");
        assert!((b - m_plus).abs() / m_plus < 1e-4, "cv={cv}: {b}");
    }
}

#[test]
fn deterministic_is_rejected_by_threshold_solver() {
    let d = JobSizeModel::deterministic(2.0).unwrap();
    assert!(matches!(d.solve_size_threshold(0.5), Err(Error::ContinuityViolation(_))));
    let mut rng = RandomStream::from_seed(1);
    assert_eq!(d.sample(&mut rng), 2.0);
}

#[test]
fn monte_carlo_means_within_five_standard_errors() {
    let models = [
        exp1(),
        JobSizeModel::exponential(3.0).unwrap(),
        JobSizeModel::uniform(0.5, 2.0).unwrap(),
        JobSizeModel::weibull_from_mean_cv(1.0, 1.0).unwrap(),
        JobSizeModel::weibull_from_mean_cv(1.0, 10.0).unwrap(),
        JobSizeModel::weibull(2.5, 1.3).unwrap(),
    ];
    let draws = 1_000_000;
    for (i, model) in models.iter().enumerate() {
        let mut rng = RandomStream::from_seed(100 + i as u64);
        let sum: f64 = (0..draws).map(|_| model.sample(&mut rng)).sum();
        let mean = sum / draws as f64;
        let sd = (model.second_moment() - model.mean().powi(2)).sqrt();
        let se = sd / (draws as f64).sqrt();
        assert!((mean - model.mean()).abs() < 5.0 * se, "{model}: {mean} vs {}", model.mean());
    }
}

#[test]
fn weibull_cv_one_passes_ks_against_exponential() {
    let w = JobSizeModel::weibull_from_mean_cv(1.0, 1.0).unwrap();
    let mut rng = RandomStream::from_seed(77);
    let n = 100_000;
    let mut xs: Vec<f64> = (0..n).map(|_| w.sample(&mut rng)).collect();
    xs.sort_by(f64::total_cmp);
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-x).exp();
            (cdf - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - cdf)
        })
        .fold(0.0, f64::max);
    let critical = 1.628 / (n as f64).sqrt();
    assert!(d < critical, "KS statistic {d} >= {critical}");
}

fn any_model() -> impl Strategy<Value = JobSizeModel> {
    prop_oneof![
        (0.1f64..10.0).prop_map(|r| JobSizeModel::exponential(r).unwrap()),
        (0.0f64..2.0, 0.1f64..5.0).prop_map(|(lo, w)| JobSizeModel::uniform(lo, lo + w).unwrap()),
        (0.5f64..60.0).prop_map(|cv| JobSizeModel::weibull_from_mean_cv(1.0, cv).unwrap()),
        (0.2f64..5.0, 0.1f64..10.0).prop_map(|(k, s)| JobSizeModel::weibull(k, s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn truncated_first_moment_is_nondecreasing(model in any_model(), a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(model.truncated_first_moment(lo) <= model.truncated_first_moment(hi) + 1e-15);
        prop_assert!(model.truncated_second_moment(lo) <= model.truncated_second_moment(hi) + 1e-12);
    }

    #[test]
    fn truncated_moments_reach_full_moments(model in any_model()) {
        let big = f64::INFINITY;
        prop_assert!((model.truncated_first_moment(big) - model.mean()).abs() <= 1e-8 * model.mean());
        prop_assert!((model.truncated_second_moment(big) - model.second_moment()).abs() <= 1e-8 * model.second_moment());
    }

    #[test]
    fn threshold_round_trips(model in any_model(), f in 0.001f64..0.999) {
        let m = model.solve_size_threshold(f).unwrap();
        let got = model.truncated_first_moment(m);
        prop_assert!((got - f * model.mean()).abs() <= 1e-8 * model.mean(), "f={} m={} got={}", f, m, got);
    }

    #[test]
    fn samples_are_positive_and_finite(model in any_model(), seed in any::<u64>()) {
        let mut rng = RandomStream::from_seed(seed);
        for _ in 0..100 {
            let s = model.sample(&mut rng);
            prop_assert!(s.is_finite() && s >= 0.0);
        }
    }
}
