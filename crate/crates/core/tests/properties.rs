use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use equitynet::equilibrium::{solve_equilibrium, verify_nash};
use equitynet::extensive::{brute_force_oracle, search_active_set, SearchOptions};
use equitynet::intensive::{allocate_on_set, balanced_performance, predicted_equilibrium};
use equitynet::linalg::spectral_radius_sigma_g;
use equitynet::network::circle_without_opposites;
use equitynet::objective::{optimize, rp_linear_closed_form, Objective};
use equitynet::{random, SuccessModel};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equilibrium_satisfies_first_order_conditions(seed in any::<u64>(), n in 2usize..8, linear in any::<bool>()) {
        let mut r = rng(seed);
        let net = random::weighted_network(&mut r, n, 0.5);
        let alloc = random::allocation(&mut r, n, 0.2);
        let model = if linear {
            SuccessModel::linear(0.5, 0.2).unwrap()
        } else {
            SuccessModel::saturating(0.9, 1.5, 0.4).unwrap()
        };
        if let Ok(eq) = solve_equilibrium(&net, &model, &alloc) {
            prop_assert!(eq.foc_residual <= 1e-10);
            prop_assert!(verify_nash(&net, &model, &alloc, &eq, 100) <= 1e-9);
            for (a, s) in eq.actions.iter().zip(alloc.shares()) {
                prop_assert!(*a >= 0.0);
                if *s == 0.0 {
                    prop_assert_eq!(*a, 0.0);
                }
            }
        }
    }

    #[test]
    fn performance_rises_with_every_share(seed in any::<u64>(), n in 2usize..7, bump in 0.001f64..0.05) {
        let mut r = rng(seed);
        let net = random::weighted_network(&mut r, n, 0.6);
        let alloc = random::allocation(&mut r, n, 0.0);
        let model = SuccessModel::saturating(0.9, 1.0, 0.3).unwrap();
        let base = solve_equilibrium(&net, &model, &alloc).unwrap();
        let mut shares = alloc.shares().to_vec();
        let total: f64 = shares.iter().sum();
        prop_assume!(total + bump <= 1.0);
        shares[0] += bump;
        let more = solve_equilibrium(&net, &model, &equitynet::EquityAllocation::new(shares).unwrap()).unwrap();
        prop_assert!(more.performance > base.performance);
    }

    #[test]
    fn pruning_never_loses_the_optimum(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let net = random::weighted_network(&mut r, n, 0.6);
        let fast = search_active_set(&net, &SearchOptions::default()).unwrap();
        let slow = brute_force_oracle(&net).unwrap();
        prop_assert!((fast.best.c_per_unit - slow.best.c_per_unit).abs() <= 1e-9);
        prop_assert!(net.diameter(&fast.best.set).unwrap().is_some_and(|d| d <= 2));
        for t in &fast.ties {
            prop_assert!((t.c_per_unit - fast.best.c_per_unit).abs() <= 1e-9 * fast.best.c_per_unit);
        }
    }

    #[test]
    fn ratios_do_not_depend_on_total(seed in any::<u64>(), n in 2usize..7, s in 0.05f64..1.0) {
        let mut r = rng(seed);
        let net = random::weighted_network(&mut r, n, 0.7);
        let best = search_active_set(&net, &SearchOptions::default()).unwrap().best;
        let sol = allocate_on_set(&net, &best.set, s).unwrap();
        prop_assert!((sol.c - s * best.c_per_unit).abs() <= 1e-12);
        for (a, b) in sol.shares.iter().zip(&best.solution.shares) {
            prop_assert!((a - s * b).abs() <= 1e-12);
        }
    }

    #[test]
    fn optimal_shares_maximize_spectral_radius(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let net = random::weighted_network(&mut r, n, 0.6);
        let model = SuccessModel::linear(0.5, 0.1).unwrap();
        let c = optimize(&net, &model, Objective::SuccessProbability).unwrap();
        let rho = spectral_radius_sigma_g(net.weights(), c.allocation.shares());
        prop_assert!((rho - c.c).abs() <= 1e-9);
        for _ in 0..50 {
            let rival = random::simplex_point(&mut r, n);
            prop_assert!(spectral_radius_sigma_g(net.weights(), &rival) <= rho + 1e-9);
        }
    }

    #[test]
    fn total_share_root_is_increasing(k in 0.5f64..4.0, alpha in 0.1f64..1.0, b1 in 0.0001f64..1.0, b2 in 0.0001f64..1.0) {
        let top = 0.99 * k / alpha;
        let (lo, hi) = if b1 < b2 { (b1 * top, b2 * top) } else { (b2 * top, b1 * top) };
        prop_assume!(hi - lo > 1e-6);
        let s_lo = rp_linear_closed_form(k, alpha, lo).unwrap();
        let s_hi = rp_linear_closed_form(k, alpha, hi).unwrap();
        prop_assert!(s_lo > 0.5 && s_hi < 1.0 && s_lo < s_hi);
    }

    #[test]
    fn prediction_matches_full_solve(seed in any::<u64>(), n in 2usize..7, s in 0.1f64..1.0) {
        let mut r = rng(seed);
        let net = random::weighted_network(&mut r, n, 0.7);
        let model = SuccessModel::saturating(0.8, 2.0, 0.5).unwrap();
        let best = search_active_set(&net, &SearchOptions::default()).unwrap().best;
        let sol = best.solution.scaled(s);
        let p = predicted_equilibrium(&model, &sol).unwrap();
        let eq = solve_equilibrium(&net, &model, &sol.allocation()).unwrap();
        prop_assert!((p.performance - eq.performance).abs() <= 1e-9 * eq.performance.max(1.0));
    }
}

#[test]
fn tied_supports_give_equal_performance() {
    let net = circle_without_opposites(10);
    let model = SuccessModel::saturating(0.9, 1.0, 0.5).unwrap();
    let report = search_active_set(&net, &SearchOptions::default()).unwrap();
    let y_best = balanced_performance(&model, 1.0, report.best.c_per_unit).unwrap();
    for t in &report.ties {
        let eq = solve_equilibrium(&net, &model, &t.solution.allocation()).unwrap();
        assert!(
            (eq.performance - y_best).abs() <= 1e-9,
            "{} gives {}",
            t.set,
            eq.performance
        );
    }
}
