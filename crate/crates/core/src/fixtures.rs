//! Small games shared by unit tests.

use crate::game::GameSpec;
use crate::information::InformationStructure;
use crate::model::{CostTable, EdgeCost, Network, Positivity};

fn affine(a: f64, b: f64) -> EdgeCost {
    EdgeCost::with_positivity(vec![b, a], Positivity::Weak).unwrap()
}

fn symmetric(acc: f64) -> Vec<Vec<f64>> {
    vec![vec![acc, 1.0 - acc], vec![1.0 - acc, acc]]
}

/// Two routes, two states `[a, n]`, two populations with symmetric signals.
pub fn two_route(
    route1: [(f64, f64); 2],
    route2: (f64, f64),
    prior_a: f64,
    acc: [f64; 2],
    demand: f64,
    lambda1: f64,
) -> GameSpec {
    let costs = CostTable::new(vec![
        vec![
            affine(route1[0].0, route1[0].1),
            affine(route1[1].0, route1[1].1),
        ],
        vec![affine(route2.0, route2.1), affine(route2.0, route2.1)],
    ])
    .unwrap();
    let ab = || vec!["a".to_string(), "n".to_string()];
    let info = InformationStructure::build_conditionally_independent(
        ab(),
        vec![prior_a, 1.0 - prior_a],
        vec![ab(), ab()],
        &[symmetric(acc[0]), symmetric(acc[1])],
    )
    .unwrap();
    GameSpec::new(
        Network::parallel(2).unwrap(),
        costs,
        info,
        demand,
        vec![lambda1, 1.0 - lambda1],
    )
    .unwrap()
}

pub fn motivating(lambda1: f64) -> GameSpec {
    two_route(
        [(3.0, 20.0), (1.0, 20.0)],
        (2.0, 20.0),
        0.2,
        [1.0, 0.5],
        1.0,
        lambda1,
    )
}

pub fn benchmark(lambda1: f64) -> GameSpec {
    two_route(
        [(3.0, 15.0), (1.0, 15.0)],
        (2.0, 20.0),
        0.2,
        [0.8, 0.6],
        10.0,
        lambda1,
    )
}

/// One state, one population, parallel routes with costs `a w + b`.
pub fn parallel(costs: &[(f64, f64)], demand: f64) -> GameSpec {
    let table = CostTable::new(costs.iter().map(|&(a, b)| vec![affine(a, b)]).collect()).unwrap();
    let info = InformationStructure::build_conditionally_independent(
        vec!["s".into()],
        vec![1.0],
        vec![vec!["t".into()]],
        &[vec![vec![1.0]]],
    )
    .unwrap();
    GameSpec::new(
        Network::parallel(costs.len()).unwrap(),
        table,
        info,
        demand,
        vec![1.0],
    )
    .unwrap()
}
