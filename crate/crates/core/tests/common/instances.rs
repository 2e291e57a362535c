//! Test instances.

use bwe_core::model::Positivity;
use bwe_core::{CostTable, EdgeCost, GameSpec, InformationStructure, Network, ProfileSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Motivating example constants.
pub const A1N: f64 = 1.0;
pub const A1A: f64 = 3.0;
pub const A2: f64 = 2.0;
pub const B: f64 = 20.0;
pub const P: f64 = 0.2;

fn labels(n: &[usize]) -> Vec<Vec<String>> {
    n.iter()
        .map(|&k| {
            if k == 2 {
                vec!["a".into(), "n".into()]
            } else {
                (0..k).map(|x| format!("t{x}")).collect()
            }
        })
        .collect()
}

fn an() -> Vec<String> {
    vec!["a".into(), "n".into()]
}

fn symmetric(acc: f64) -> Vec<Vec<f64>> {
    vec![vec![acc, 1.0 - acc], vec![1.0 - acc, acc]]
}

fn affine(slope: f64, constant: f64) -> EdgeCost {
    EdgeCost::affine(slope, constant).unwrap()
}

/// Two parallel routes; edge 1 costs `(s1a, c1a)` in state a and `(s1n, c1n)`
/// in state n, edge 2 is state-independent.
fn two_route_costs(s1a: f64, c1a: f64, s1n: f64, c1n: f64, s2: f64, c2: f64) -> CostTable {
    CostTable::new(vec![
        vec![affine(s1a, c1a), affine(s1n, c1n)],
        vec![affine(s2, c2), affine(s2, c2)],
    ])
    .unwrap()
}

fn two_population_info(prior_a: f64, acc1: f64, acc2: f64) -> InformationStructure {
    InformationStructure::build_conditionally_independent(
        an(),
        vec![prior_a, 1.0 - prior_a],
        labels(&[2, 2]),
        &[symmetric(acc1), symmetric(acc2)],
    )
    .unwrap()
}

/// Population 1 perfectly informed, population 2 receives a coin flip.
pub fn motivating(lambda1: f64) -> GameSpec {
    GameSpec::new(
        Network::parallel(2).unwrap(),
        two_route_costs(A1A, B, A1N, B, A2, B),
        two_population_info(P, 1.0, 0.5),
        1.0,
        vec![lambda1, 1.0 - lambda1],
    )
    .unwrap()
}

/// Closed-form regime-1 strategies `(q¹₁(a), q¹₁(n), q²₁)`.
pub fn motivating_regime_one(lambda1: f64) -> (f64, f64, f64) {
    let abar = P * A1A + (1.0 - P) * A1N;
    let q2 = A2 / (abar + A2) - lambda1 * (1.0 - P) * (A1N + A2) / (abar + A2);
    (0.0, lambda1, q2)
}

/// `λ̲¹ = α₂ (1/(α₁ⁿ+α₂) - 1/(α₁ᵃ+α₂))`.
pub fn motivating_lower_threshold() -> f64 {
    A2 * (1.0 / (A1N + A2) - 1.0 / (A1A + A2))
}

pub fn benchmark(lambda1: f64) -> GameSpec {
    GameSpec::new(
        Network::parallel(2).unwrap(),
        two_route_costs(3.0, 15.0, 1.0, 15.0, 2.0, 20.0),
        two_population_info(0.2, 0.8, 0.6),
        10.0,
        vec![lambda1, 1.0 - lambda1],
    )
    .unwrap()
}

/// Benchmark signals with equal free-flow constants on both routes.
pub fn homogeneous(lambda1: f64) -> GameSpec {
    GameSpec::new(
        Network::parallel(2).unwrap(),
        two_route_costs(3.0, 20.0, 1.0, 20.0, 2.0, 20.0),
        two_population_info(0.2, 0.8, 0.6),
        10.0,
        vec![lambda1, 1.0 - lambda1],
    )
    .unwrap()
}

/// Benchmark costs with 0.75-accurate signals, either identical for both
/// populations or conditionally independent.
pub fn correlation(lambda1: f64, perfectly_correlated: bool) -> GameSpec {
    let info = if perfectly_correlated {
        let p = ProfileSpace::new(vec![2, 2]);
        let mut joint = vec![0.0; 8];
        for (s, theta) in [0.2, 0.8].iter().enumerate() {
            for t in 0..2 {
                let acc = if t == s { 0.75 } else { 0.25 };
                joint[s * 4 + p.encode(&[t, t])] = theta * acc;
            }
        }
        InformationStructure::from_common_prior(an(), vec![0.2, 0.8], labels(&[2, 2]), joint)
            .unwrap()
    } else {
        two_population_info(0.2, 0.75, 0.75)
    };
    GameSpec::new(
        Network::parallel(2).unwrap(),
        two_route_costs(3.0, 15.0, 1.0, 15.0, 2.0, 20.0),
        info,
        10.0,
        vec![lambda1, 1.0 - lambda1],
    )
    .unwrap()
}

/// Two equally likely states with mirrored costs; population 1 observes the
/// state, population 2 observes nothing.
pub fn single_tis(lambda1: f64) -> GameSpec {
    let costs = CostTable::new(vec![
        vec![affine(1.0, 10.0), affine(1.0, 1.0)],
        vec![affine(1.0, 1.0), affine(1.0, 10.0)],
    ])
    .unwrap();
    let info = InformationStructure::build_conditionally_independent(
        vec!["s1".into(), "s2".into()],
        vec![0.5, 0.5],
        vec![vec!["s1".into(), "s2".into()], vec!["none".into()]],
        &[
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0], vec![1.0]],
        ],
    )
    .unwrap();
    GameSpec::new(
        Network::parallel(2).unwrap(),
        costs,
        info,
        1.0,
        vec![lambda1, 1.0 - lambda1],
    )
    .unwrap()
}

/// Pigou network: `c₁ = w`, `c₂ = 1`, one state, one population.
pub fn pigou() -> GameSpec {
    let costs = CostTable::new(vec![
        vec![EdgeCost::with_positivity(vec![0.0, 1.0], Positivity::Weak).unwrap()],
        vec![EdgeCost::with_positivity(vec![1.0], Positivity::Weak).unwrap()],
    ])
    .unwrap();
    GameSpec::new(
        Network::parallel(2).unwrap(),
        costs,
        single_state_info(),
        1.0,
        vec![1.0],
    )
    .unwrap()
}

pub fn single_state_info() -> InformationStructure {
    InformationStructure::build_conditionally_independent(
        vec!["s".into()],
        vec![1.0],
        vec![vec!["t".into()]],
        &[vec![vec![1.0]]],
    )
    .unwrap()
}

/// Single state, single population, two parallel routes.
pub fn single_state_parallel(costs: Vec<EdgeCost>, demand: f64) -> GameSpec {
    let n = costs.len();
    let table = CostTable::new(costs.into_iter().map(|c| vec![c]).collect()).unwrap();
    GameSpec::new(
        Network::parallel(n).unwrap(),
        table,
        single_state_info(),
        demand,
        vec![1.0],
    )
    .unwrap()
}

/// Five edges, three routes: `s-a, a-t, s-b, b-t, a-b`.
pub fn braess_network() -> Network {
    let e = |s: &str| s.to_string();
    Network::from_named(
        vec![e("sa"), e("at"), e("sb"), e("bt"), e("ab")],
        &[
            vec![e("sa"), e("at")],
            vec![e("sb"), e("bt")],
            vec![e("sa"), e("ab"), e("bt")],
        ],
    )
    .unwrap()
}

/// Random two-state affine game over `network` with `I` populations of
/// two types each. `uninformed` gives population 1 a coin-flip signal.
pub fn random_affine(
    seed: u64,
    network: Network,
    populations: usize,
    uninformed: bool,
) -> GameSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ne = network.num_edges();
    let costs = CostTable::new(
        (0..ne)
            .map(|_| {
                (0..2)
                    .map(|_| affine(rng.gen_range(0.5..3.0), rng.gen_range(1.0..20.0)))
                    .collect()
            })
            .collect(),
    )
    .unwrap();
    let prior_a = rng.gen_range(0.2..0.8);
    let accuracy: Vec<Vec<Vec<f64>>> = (0..populations)
        .map(|i| {
            if uninformed && i == 1 {
                symmetric(0.5)
            } else {
                symmetric(rng.gen_range(0.55..0.95))
            }
        })
        .collect();
    let info = InformationStructure::build_conditionally_independent(
        an(),
        vec![prior_a, 1.0 - prior_a],
        labels(&vec![2; populations]),
        &accuracy,
    )
    .unwrap();
    let raw: Vec<f64> = (0..populations).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut sizes: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = sizes[1..].iter().sum();
    sizes[0] = 1.0 - head;
    let demand = rng.gen_range(1.0..10.0);
    GameSpec::new(network, costs, info, demand, sizes).unwrap()
}

/// Size vector `(λ, 1-λ)` for a two-population game.
pub fn pair_sizes(lambda1: f64) -> Vec<f64> {
    vec![lambda1, 1.0 - lambda1]
}
