use bbeq::distributed::{run_distributed, run_sequential, AssignmentRule, Context, Snapshot};
use bbeq::dynamics::DynamicsConfig;
use bbeq::estimator::{smoothed_pseudogradient, EstimatorConfig, Smoothing, Stencil};
use bbeq::eval::{blotto_best_response_enum, blotto_value};
use bbeq::games::{Auction, Blotto, GameSpec, PaymentRule, ValueStructure};
use bbeq::prng::RngStream;
use bbeq::trainer::ExperimentConfig;
use bbeq::utility::GameUtility;
use proptest::prelude::*;

fn smoothing() -> impl Strategy<Value = Smoothing> {
    prop_oneof![Just(Smoothing::Gaussian), Just(Smoothing::Ball), Just(Smoothing::Rademacher)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn central_estimate_is_affine_in_f(
        x in prop::collection::vec(-2.0..2.0f64, 1..12),
        scale in -3.0..3.0f64,
        shift in -5.0..5.0f64,
        seed in any::<u64>(),
        smoothing in smoothing(),
    ) {
        let cfg = EstimatorConfig { smoothing, n_samples: 3, sigma: 0.05, ..EstimatorConfig::default() };
        let f = |p: &[f64], _: &mut RngStream| p.iter().map(|v| v.sin()).sum::<f64>();
        let base = smoothed_pseudogradient(f, &x, &cfg, &mut RngStream::new(seed, 0));
        let g = |p: &[f64], s: &mut RngStream| scale * f(p, s) + shift;
        let moved = smoothed_pseudogradient(g, &x, &cfg, &mut RngStream::new(seed, 0));
        for (a, b) in base.iter().zip(&moved) {
            prop_assert!((scale * a - b).abs() <= 1e-6 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn linear_objectives_give_projected_gradient(
        g in prop::collection::vec(-1.0..1.0f64, 2..8),
        seed in any::<u64>(),
        stencil in prop_oneof![Just(Stencil::Central), Just(Stencil::Forward)],
    ) {
        // For f = g.x every sample equals (u.g) u, so averaging over many
        // directions from Rademacher smoothing recovers g up to noise.
        let cfg = EstimatorConfig { smoothing: Smoothing::Rademacher, stencil, n_samples: 4000, ..EstimatorConfig::default() };
        let x = vec![0.3; g.len()];
        let est = smoothed_pseudogradient(
            |p: &[f64], _: &mut RngStream| p.iter().zip(&g).map(|(a, b)| a * b).sum(),
            &x, &cfg, &mut RngStream::new(seed, 0));
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (e, gi) in est.iter().zip(&g) {
            prop_assert!((e - gi).abs() < 6.0 * norm / 4000f64.sqrt() + 1e-9);
        }
    }

    #[test]
    fn enumeration_beats_random_feasible_allocations(
        h in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 1..5), 2..5),
        budget in 0.1..2.0f64,
        seed in any::<u64>(),
    ) {
        let values: Vec<f64> = (0..h.len()).map(|j| 1.0 + j as f64 * 0.25).collect();
        let (alloc, best) = blotto_best_response_enum(&h, budget, &values).unwrap();
        prop_assert!((alloc.iter().sum::<f64>() - budget).abs() < 1e-9);
        prop_assert!(alloc.iter().all(|&a| a >= 0.0));
        prop_assert!((blotto_value(&alloc, &h, &values) - best).abs() < 1e-12);
        let mut s = RngStream::new(seed, 0);
        for _ in 0..200 {
            let w: Vec<f64> = (0..h.len()).map(|_| -s.next_f64().max(1e-300).ln()).collect();
            let total: f64 = w.iter().sum();
            let a: Vec<f64> = w.iter().map(|v| v / total * budget).collect();
            prop_assert!(blotto_value(&a, &h, &values) <= best + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pool_matches_sequential_reference(
        seed in any::<u64>(),
        workers in 1usize..6,
        physical in 1usize..4,
        iterations in 1u64..15,
        game_pick in 0usize..3,
    ) {
        let game = match game_pick {
            0 => GameSpec::Auction(Auction::new(2, ValueStructure::Ipv, PaymentRule::WinnerPay { k: 1 })),
            1 => GameSpec::Auction(Auction::new(3, ValueStructure::Complete, PaymentRule::AllPay)),
            _ => GameSpec::Blotto(Blotto::symmetric(2, 3)),
        };
        let cfg = ExperimentConfig { seed, game: game.clone(), ..ExperimentConfig::default() };
        let policies = cfg.initial_profile();
        let utility = GameUtility::new(&game, &policies, 1);
        let dynamics = DynamicsConfig { alpha: 1e-3, ..DynamicsConfig::default() };
        let ctx = Context { utility: &utility, estimator: &cfg.estimator, dynamics: &dynamics, rule: AssignmentRule::RoundRobin };
        let mut a = Snapshot::new(seed, policies.clone(), &dynamics, workers);
        let mut b = a.clone();
        let sa = run_sequential(&ctx, &mut a, iterations, &[]).unwrap();
        let sb = run_distributed(&ctx, &mut b, iterations, physical, &[]).unwrap();
        prop_assert_eq!(sa, sb);
        prop_assert_eq!(sa.delta_messages, iterations * workers as u64);
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
}
