mod common;

use bwe_core::analysis::{compute_thresholds, pair_sizes};
use bwe_core::lp::{solve_lp, LinearProgram, LpStatus};
use bwe_core::model::Positivity;
use bwe_core::solver::{solve_bwe, SolveOptions};
use bwe_core::{EdgeCost, GameSpec, InformationStructure, Network, ProfileSpace, StrategyProfile};
use common::instances::*;
use common::oracles::{adaptive_simpson, central_difference, vertex_enumeration};
use proptest::prelude::*;

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    (0.1f64..10.0, prop::collection::vec(0.0f64..3.0, 1..4)).prop_map(|(b, mut rest)| {
        rest.insert(0, b);
        rest
    })
}

/// Random feasible profile: each type splits its mass by the given weights.
fn profile_from(g: &GameSpec, weights: &[f64]) -> StrategyProfile {
    let nr = g.num_routes();
    let mut k = 0;
    let q = (0..g.num_populations())
        .map(|i| {
            (0..g.info().profiles().sizes()[i])
                .map(|_| {
                    let w: Vec<f64> = (0..nr)
                        .map(|_| {
                            k += 1;
                            weights[(k - 1) % weights.len()]
                        })
                        .collect();
                    let total: f64 = w.iter().sum();
                    w.iter()
                        .map(|x| x / total * g.sizes()[i] * g.demand())
                        .collect()
                })
                .collect()
        })
        .collect();
    StrategyProfile { q }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn antiderivative_matches_quadrature(c in coeffs(), w in 0.0f64..5.0) {
        let cost = EdgeCost::new(c).unwrap();
        let quad = adaptive_simpson(&|x| cost.value(x), 0.0, w, 1e-12);
        prop_assert!((cost.antiderivative(w) - quad).abs() <= 1e-8 * (1.0 + quad.abs()));
    }

    #[test]
    fn marginal_cost_is_derivative_of_total(c in coeffs(), w in 0.1f64..5.0) {
        let cost = EdgeCost::new(c).unwrap();
        let total = |x: f64| x * cost.value(x);
        let fd = central_difference(&total, w, 1e-5);
        prop_assert!((cost.marginal_value(w) - fd).abs() <= 1e-5 * (1.0 + fd.abs()));
        prop_assert!((cost.slope(w) - central_difference(&|x| cost.value(x), w, 1e-5)).abs() <= 1e-5 * (1.0 + cost.slope(w)));
    }

    #[test]
    fn zero_constant_needs_weak_positivity(c in coeffs()) {
        let mut c = c;
        c[0] = 0.0;
        prop_assert!(EdgeCost::new(c.clone()).is_err());
        prop_assert!(EdgeCost::with_positivity(c, Positivity::Weak).is_ok());
    }

    #[test]
    fn profile_codes_round_trip(sizes in prop::collection::vec(1usize..4, 1..4), pick in any::<u64>()) {
        let p = ProfileSpace::new(sizes.clone());
        let t = (pick as usize) % p.count();
        let types = p.decode(t);
        prop_assert_eq!(p.encode(&types), t);
        for (i, &ti) in types.iter().enumerate() {
            prop_assert_eq!(p.type_of(t, i), ti);
            prop_assert!(p.profiles_with(i, ti).any(|u| u == t));
        }
    }

    #[test]
    fn beliefs_are_distributions(prior_a in 0.05f64..0.95, acc1 in 0.0f64..1.0, acc2 in 0.0f64..1.0) {
        let sym = |a: f64| vec![vec![a, 1.0 - a], vec![1.0 - a, a]];
        let ab = || vec!["a".to_string(), "n".to_string()];
        let info = InformationStructure::build_conditionally_independent(
            ab(), vec![prior_a, 1.0 - prior_a], vec![ab(), ab()], &[sym(acc1), sym(acc2)],
        );
        let Ok(info) = info else { return Ok(()) };
        let total: f64 = info.joint_tensor().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mu = info.interim_beliefs();
        for i in 0..2 {
            for ti in 0..2 {
                let row: f64 = mu.row(i, ti).iter().sum();
                prop_assert!((row - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences(
        seed in 0u64..1000,
        weights in prop::collection::vec(0.1f64..1.0, 6),
    ) {
        let g = random_affine(seed, Network::parallel(3).unwrap(), 2, false);
        let q = profile_from(&g, &weights);
        let grad = g.potential_gradient(&q);
        for i in 0..2 {
            for ti in 0..2 {
                for r in 0..3 {
                    let f = |x: f64| {
                        let mut p = q.clone();
                        p.q[i][ti][r] = x;
                        g.potential_q(&p)
                    };
                    let fd = central_difference(&f, q.q[i][ti][r], 1e-5);
                    prop_assert!((grad[i][ti][r] - fd).abs() <= 1e-5 * (1.0 + fd.abs()));
                }
            }
        }
    }

    #[test]
    fn flows_of_strategies_are_feasible_and_reconstructible(
        seed in 0u64..1000,
        weights in prop::collection::vec(0.05f64..1.0, 7),
    ) {
        let g = random_affine(seed, braess_network(), 2, false);
        let q = profile_from(&g, &weights);
        let f = g.flow_of(&q);
        prop_assert!(g.flow_feasibility(&f).worst(1e-9).is_none());
        let rec = g.reconstruct_strategies(&f).unwrap();
        prop_assert!(g.strategy_violation(&rec.profile) < 1e-9);
        let back = g.flow_of(&rec.profile);
        for (a, b) in back.f.iter().flatten().zip(f.f.iter().flatten()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn equilibrium_beats_random_profiles(
        seed in 0u64..1000,
        weights in prop::collection::vec(0.05f64..1.0, 5),
    ) {
        let g = random_affine(seed, Network::parallel(2).unwrap(), 2, false);
        let r = solve_bwe(&g, &SolveOptions::default()).unwrap();
        prop_assert!(r.certified);
        prop_assert!(r.kkt.max_violation() <= 1e-6);
        let other = g.potential_q(&profile_from(&g, &weights));
        prop_assert!(r.potential <= other + r.tolerances.gap);
    }

    #[test]
    fn potential_is_convex_in_sizes(seed in 0u64..1000, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let g = random_affine(seed, Network::parallel(2).unwrap(), 2, false);
        let psi = |x: f64| {
            solve_bwe(&g.with_sizes(pair_sizes(&g, 0, 1, x).unwrap()).unwrap(), &SolveOptions::default())
                .unwrap()
                .potential
        };
        let tol = 4.0 * SolveOptions::default().resolve(&g).gap;
        prop_assert!(psi(0.5 * (a + b)) <= 0.5 * (psi(a) + psi(b)) + tol);
    }

    #[test]
    fn thresholds_are_ordered(seed in 0u64..1000) {
        let g = random_affine(seed, Network::parallel(2).unwrap(), 2, false);
        let th = compute_thresholds(&g, 0, 1, &SolveOptions::default()).unwrap();
        prop_assert!(0.0 <= th.lower && th.lower <= th.upper + 1e-9 && th.upper <= 1.0);
    }

    #[test]
    fn lp_matches_vertex_enumeration(
        c in prop::collection::vec(-3.0f64..3.0, 4),
        a in prop::collection::vec(-2.0f64..2.0, 12),
        x0 in prop::collection::vec(0.0f64..1.0, 4),
        upper in prop::collection::vec(1.0f64..3.0, 4),
        slack in prop::collection::vec(0.0f64..1.0, 2),
    ) {
        let x0: Vec<f64> = x0.iter().zip(&upper).map(|(x, u)| x * u).collect();
        let dot = |r: &[f64]| r.iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>();
        let mut lp = LinearProgram::new(4);
        lp.objective = c;
        for (j, u) in upper.iter().enumerate() {
            lp.set_bounds(j, 0.0, *u);
        }
        let rows: Vec<Vec<f64>> = a.chunks(4).map(|r| r.to_vec()).collect();
        let b = dot(&rows[0]);
        lp.add_eq(rows[0].clone(), b);
        for k in 0..2 {
            let b = dot(&rows[k + 1]) + slack[k];
            lp.add_le(rows[k + 1].clone(), b);
        }
        let sol = solve_lp(&lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        prop_assert!(lp.max_violation(&sol.x) <= 1e-9);
        let (best, _) = vertex_enumeration(
            &lp.objective, &lp.a_eq, &lp.b_eq, &lp.a_in, &lp.b_in, &lp.lower, &lp.upper,
        ).unwrap();
        prop_assert!((sol.objective - best).abs() <= 1e-7);
    }
}
