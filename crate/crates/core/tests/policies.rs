mod common;

use cardsim::policies::{
    card_params_from_alpha_beta, dice_thresholds, multiband_config, sita_equal_load, CardConfig,
    DiceConfig, MultiBandConfig, PolicyState, ShortSelection,
};
use cardsim::rng::RandomStream;
use cardsim::{run_trial, JobSizeModel, PolicyConfig, SimConfig};
use common::exp1_threshold;
use proptest::prelude::*;

fn exp1() -> JobSizeModel {
    JobSizeModel::exponential(1.0).unwrap()
}

fn pick(p: &PolicyConfig, s: f64, w: &[f64]) -> usize {
    p.dispatch(&mut PolicyState::new(), s, w, &mut RandomStream::from_seed(0))
}

#[test]
fn documented_examples() {
    assert_eq!(pick(&PolicyConfig::Lwl { n: 3 }, 1.0, &[3.0, 1.0, 2.0]), 1);
    let rigid = PolicyConfig::Card(CardConfig::new(2, 1.0, 2.0, 5.0).unwrap());
    assert_eq!(pick(&rigid, 1.5, &[5.0, 9.0]), 0);
    let dice = PolicyConfig::Dice(DiceConfig::new(vec![4.0]).unwrap());
    assert_eq!(pick(&dice, 2.0, &[1.0, 5.0]), 0);
    assert_eq!(pick(&dice, 3.5, &[1.0, 5.0]), 1);
    let flex = PolicyConfig::Card(CardConfig::new(2, 1.0, 2.0, 5.0).unwrap().with_flexible(true));
    assert_eq!(pick(&flex, 0.5, &[7.0, 2.0]), 1);
}

#[test]
fn alpha_beta_example_matches_oracle() {
    // ρ = 0.9, ρ_s = 0.40, ρ_s + ρ_m = 0.55 with two servers.
    let (alpha, beta) = (0.5 - 0.40, 0.55 - 0.5);
    let (m_minus, m_plus) = card_params_from_alpha_beta(2, 0.9, &exp1(), alpha, beta).unwrap();
    assert!((m_minus - exp1_threshold(4.0 / 9.0)).abs() < 1e-8);
    assert!((m_plus - exp1_threshold(11.0 / 18.0)).abs() < 1e-8);
}

#[test]
fn alpha_beta_round_trip() {
    let model = JobSizeModel::weibull_from_mean_cv(1.0, 10.0).unwrap();
    for n in [2usize, 3, 10] {
        let nf = n as f64;
        let rho = 0.95;
        let (alpha, beta) = (0.3 / nf, 0.5 * (rho / (nf - 1.0) - 1.0 / nf));
        let (m_minus, m_plus) = card_params_from_alpha_beta(n, rho, &model, alpha, beta).unwrap();
        let rho_s = rho * model.truncated_first_moment(m_minus);
        let rho_sm = rho * model.truncated_first_moment(m_plus);
        assert!((1.0 / nf - rho_s / (nf - 1.0) - alpha).abs() < 1e-6);
        assert!((rho_sm / (nf - 1.0) - 1.0 / nf - beta).abs() < 1e-6);
    }
    // ρ_s = ρ/2 and β → 0 recover the equal-load cutoff.
    let rho = 0.9;
    let (m_minus, m_plus) = card_params_from_alpha_beta(2, rho, &exp1(), 0.5 - rho / 2.0, 1e-12).unwrap();
    let m = exp1().solve_size_threshold(0.5).unwrap();
    assert!((m_minus - m).abs() < 1e-8);
    assert!(m_plus >= m_minus);
}

#[test]
fn multiband_and_dice_thresholds_match_oracle() {
    let mb = multiband_config(2, 0.8, &exp1(), true).unwrap();
    assert!((mb.cutoffs[0] - exp1_threshold(0.25)).abs() < 1e-8);
    assert!((mb.cutoffs[1] - exp1_threshold(0.75)).abs() < 1e-8);
    assert!((mb.thresholds[0] - mb.cutoffs[0] / 0.2f64.sqrt()).abs() < 1e-12);

    let d = dice_thresholds(10, 0.04, &exp1(), None).unwrap();
    for (i, tau) in d.tau.iter().enumerate() {
        let m = exp1_threshold(0.05 + 0.1 * i as f64);
        assert!((tau - 2.0 * m * 0.04f64.powf(-1.0 / 3.0)).abs() < 1e-7 * tau, "i={i}");
    }

    let s = sita_equal_load(2, &exp1()).unwrap();
    assert!((s.cutoffs[0] - exp1_threshold(0.5)).abs() < 1e-8);
    let u = sita_equal_load(2, &JobSizeModel::uniform(0.0, 2.0).unwrap()).unwrap();
    assert!((u.cutoffs[0] - 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn sita_e_balances_utilization() {
    let policy = PolicyConfig::Sita(sita_equal_load(2, &exp1()).unwrap());
    let mut cfg = SimConfig::new(0.8, exp1(), policy, 1_000_000);
    cfg.seed = 11;
    let r = run_trial(&cfg).unwrap();
    let u: Vec<f64> = r.idle_fraction_per_server.iter().map(|i| 1.0 - i).collect();
    let spread = (u[0] - u[1]).abs() / (0.5 * (u[0] + u[1]));
    assert!(spread < 0.01, "utilizations {u:?}");
}

#[test]
fn round_robin_cycles() {
    let p = PolicyConfig::RoundRobin { n: 3 };
    let mut st = PolicyState::new();
    let mut rng = RandomStream::from_seed(0);
    let picks: Vec<usize> = (0..7).map(|_| p.dispatch(&mut st, 1.0, &[0.0; 3], &mut rng)).collect();
    assert_eq!(picks, [0, 1, 2, 0, 1, 2, 0]);
}

fn card_strategy() -> impl Strategy<Value = (usize, f64, f64, f64, ShortSelection)> {
    (2usize..7, 0.0f64..3.0, 0.0f64..3.0, 0.0f64..10.0, prop::bool::ANY).prop_map(
        |(n, a, b, extra, least)| {
            let sel = if least { ShortSelection::LeastWork } else { ShortSelection::UniformRandom };
            (n, a, a + b, a + b + extra, sel)
        },
    )
}

fn works(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..20.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn rigid_card_class_invariants(
        (n, m_minus, m_plus, c, sel) in card_strategy(),
        seed in any::<u64>(),
        s in 0.0f64..15.0,
        raw in works(6),
    ) {
        let w = &raw[..n];
        let card = CardConfig::new(n, m_minus, m_plus, c).unwrap().with_short_selection(sel);
        let p = PolicyConfig::Card(card);
        let mut rng = RandomStream::from_seed(seed);
        let i = p.dispatch(&mut PolicyState::new(), s, w, &mut rng);
        prop_assert!(i < n);
        if s >= m_plus {
            prop_assert_eq!(i, n - 1);
        }
        if s < m_minus {
            prop_assert!(i < n - 1);
        }
        if n == 2 && s >= m_minus && s < m_plus {
            prop_assert_eq!(i, if w[0] <= c { 0 } else { 1 });
        }
        if sel == ShortSelection::LeastWork && s < m_minus {
            let best = w[..n - 1].iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(w[i], best);
        }
    }

    #[test]
    fn flexible_is_rigid_after_relabeling(
        (_, m_minus, m_plus, c, _) in card_strategy(),
        s in 0.0f64..15.0,
        w0 in 0.0f64..20.0,
        w1 in 0.0f64..20.0,
    ) {
        let rigid = CardConfig::new(2, m_minus, m_plus, c).unwrap();
        let flex = PolicyConfig::Card(rigid.clone().with_flexible(true));
        let rigid = PolicyConfig::Card(rigid);
        let got = pick(&flex, s, &[w0, w1]);
        let expected = if w0 > w1 { 1 - pick(&rigid, s, &[w1, w0]) } else { pick(&rigid, s, &[w0, w1]) };
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn dice_with_infinite_thresholds_is_lwl(n in 2usize..8, s in 0.0f64..1e6, raw in works(8)) {
        let w = &raw[..n];
        let dice = PolicyConfig::Dice(DiceConfig::new(vec![f64::INFINITY; n - 1]).unwrap());
        prop_assert_eq!(pick(&dice, s, w), pick(&PolicyConfig::Lwl { n }, s, w));
    }

    #[test]
    fn every_policy_stays_in_range(n in 2usize..8, s in 0.0f64..50.0, raw in works(8), seed in any::<u64>()) {
        let w = &raw[..n];
        let model = exp1();
        let policies = vec![
            PolicyConfig::Lwl { n },
            PolicyConfig::Random { n },
            PolicyConfig::RoundRobin { n },
            PolicyConfig::Sita(sita_equal_load(n, &model).unwrap()),
            PolicyConfig::Card(CardConfig::new(n, 0.5, 1.5, 4.0).unwrap()),
            PolicyConfig::Card(CardConfig::new(n, 0.5, 1.5, 4.0).unwrap().with_flexible(true)),
            PolicyConfig::MultiBand(multiband_config(n, 0.9, &model, true).unwrap()),
            PolicyConfig::MultiBand(multiband_config(n, 0.9, &model, false).unwrap()),
            PolicyConfig::Dice(dice_thresholds(n, 0.1, &model, Some(3.0)).unwrap()),
        ];
        let mut rng = RandomStream::from_seed(seed);
        for p in &policies {
            let mut st = PolicyState::new();
            let i = p.dispatch(&mut st, s, w, &mut rng);
            prop_assert!(i < n, "{} returned {}", p.name(), i);
        }
    }

    #[test]
    fn rigid_multiband_bands(n in 2usize..8, s in 0.0f64..10.0, raw in works(8)) {
        let w = &raw[..n];
        let mb = multiband_config(n, 0.9, &exp1(), false).unwrap();
        let p = PolicyConfig::MultiBand(mb.clone());
        let i = pick(&p, s, w);
        let m = &mb.cutoffs;
        if s < m[0] {
            prop_assert_eq!(i, 0);
        } else if s >= m[n - 1] {
            prop_assert_eq!(i, n - 1);
        } else {
            let band = (0..n - 1).find(|&b| s >= m[b] && s < m[b + 1]).unwrap();
            prop_assert_eq!(i, if w[band] <= mb.thresholds[band] { band } else { band + 1 });
        }
    }

    #[test]
    fn multiband_fractions_are_exact(n in 2usize..30) {
        let mb = MultiBandConfig::new(
            (1..=n).map(|i| i as f64).collect(),
            vec![1.0; n - 1],
            true,
        ).unwrap();
        prop_assert_eq!(mb.n, n);
        for i in 1..=n {
            let f = cardsim::policies::multiband_fraction(n, i);
            prop_assert!((f - (1.0 / (2.0 * n as f64) + (i as f64 - 1.0) / n as f64)).abs() < 1e-15);
        }
    }
}
