//! Property-based invariants across the library.

use proptest::prelude::*;

use wkde_core::contamination::{apply_plan, shift_adversary, WassersteinBudget};
use wkde_core::density::{make_bump, make_gaussian, perturb, HolderClass};
use wkde_core::estimator::BandwidthRule;
use wkde_core::risk::rate_fit;
use wkde_core::transport::{w_exact_1d, w_exact_discrete};

fn small_cloud(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec(-5.0..5.0f64, 2),
        n,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_cost_is_symmetric_and_translation_invariant(
        a in small_cloud(5),
        b in small_cloud(5),
        shift in prop::collection::vec(-3.0..3.0f64, 2),
    ) {
        let ab = w_exact_discrete(&a, &b, 2.0, 2.0).unwrap().value;
        let ba = w_exact_discrete(&b, &a, 2.0, 2.0).unwrap().value;
        prop_assert!((ab - ba).abs() < 1e-10);

        let a2: Vec<Vec<f64>> = a.iter().map(|p| vec![p[0] + shift[0], p[1] + shift[1]]).collect();
        let b2: Vec<Vec<f64>> = b.iter().map(|p| vec![p[0] + shift[0], p[1] + shift[1]]).collect();
        let moved = w_exact_discrete(&a2, &b2, 2.0, 2.0).unwrap().value;
        prop_assert!((ab - moved).abs() < 1e-10);
    }

    #[test]
    fn quantile_cost_monotone_in_r(
        mean in -2.0..2.0f64,
        scale in 0.5..2.0f64,
    ) {
        let mu = make_gaussian(1.0, 1).unwrap();
        let nu = wkde_core::density::Density::gaussian(vec![mean], scale).unwrap();
        let q = |d: &wkde_core::density::Density, u: f64| d.quantile(u).unwrap();
        let w1 = w_exact_1d(|u| q(&mu, u), |u| q(&nu, u), 1.0).unwrap().value;
        let w2 = w_exact_1d(|u| q(&mu, u), |u| q(&nu, u), 2.0).unwrap().value;
        let w3 = w_exact_1d(|u| q(&mu, u), |u| q(&nu, u), 3.0).unwrap().value;
        prop_assert!(w1 <= w2 + 1e-10);
        prop_assert!(w2 <= w3 + 1e-10);
    }

    #[test]
    fn shift_plans_respect_their_budget(
        eps in 0.0..0.5f64,
        width in 0.1..2.0f64,
        direction in prop::collection::vec(-1.0..1.0f64, 1),
        seed in 0u64..1000,
    ) {
        prop_assume!(direction[0].abs() > 1e-6);
        let budget = WassersteinBudget::new(2.0, 2.0, eps).unwrap();
        let plan = shift_adversary(vec![0.0], budget, direction, width).unwrap();
        prop_assert!(plan.certificate.value <= eps + 1e-12);
        let clean = make_gaussian(1.0, 1).unwrap().sample(200, seed);
        let out = apply_plan(&plan, &clean, 0).unwrap();
        let cost = out.realized_cost.unwrap();
        prop_assert!(cost <= eps + 1e-12);
        prop_assert!((out.recompute_cost(2.0, 2.0) - cost).abs() < 1e-12);
    }

    #[test]
    fn robust_bandwidth_dominates_classical(
        s in 0.5..4.0f64,
        eps in 0.0..1.0f64,
        n in 2usize..1_000_000,
        c in 0.1..3.0f64,
    ) {
        let class = HolderClass::new(s, 1.0, 1).unwrap();
        let classical = BandwidthRule::classical(c, class).unwrap();
        let robust = BandwidthRule::robust(
            c,
            class,
            WassersteinBudget::new(2.0, 2.0, eps).unwrap(),
        )
        .unwrap();
        prop_assert!(robust.bandwidth(n) >= classical.bandwidth(n));
    }

    #[test]
    fn rate_fit_recovers_random_power_laws(
        slope in -3.0..3.0f64,
        level in 0.1..10.0f64,
    ) {
        let pts: Vec<(f64, f64)> = (1..8)
            .map(|i| {
                let x = 2.0f64.powi(i);
                (x, level * x.powf(slope))
            })
            .collect();
        let fit = rate_fit(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
    }

    #[test]
    fn opposite_bumps_cancel(
        tau in 0.0..0.04f64,
        width in 0.2..0.8f64,
        center in -0.5..0.5f64,
    ) {
        let base = make_gaussian(3.0, 1).unwrap();
        let plus = make_bump(vec![center], width, tau, "poly4").unwrap();
        let minus = make_bump(vec![center], width, -tau, "poly4").unwrap();
        let d = perturb(&base, &plus).unwrap();
        for i in 0..20 {
            let x = center - width + 2.0 * width * i as f64 / 19.0;
            let recovered = d.pdf(&[x]) + minus.eval(&[x]);
            prop_assert!((recovered - base.pdf(&[x])).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic(
        seed in 0u64..10_000,
        n in 1usize..200,
    ) {
        let d = make_gaussian(2.0, 1).unwrap();
        let a = d.sample(n, seed);
        let b = d.sample(n, seed);
        prop_assert_eq!(a.data(), b.data());
    }
}
