//! Bayesian Wardrop equilibrium by block pairwise Frank–Wolfe over the
//! product of simplices `Q(λ)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kkt::certify_kkt;
use super::linesearch::minimize_on_interval;
use super::{EquilibriumReport, SolveOptions, USED_ROUTE_TOL};
use crate::error::Result;
use crate::game::{EdgeLoad, GameSpec, StrategyProfile};

/// Pairwise moves per block within one pass.
const INNER_MOVES: usize = 4;

/// Deterministic starting profile: uniform for seed 0, otherwise an
/// interior point drawn from a seeded generator.
pub fn start_profile(game: &GameSpec, seed: u64) -> StrategyProfile {
    if seed == 0 {
        return game.uniform_profile();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nr = game.num_routes();
    let q = (0..game.num_populations())
        .map(|i| {
            let mass = game.sizes()[i] * game.demand();
            (0..game.info().profiles().num_types(i))
                .map(|_| {
                    let u: Vec<f64> = (0..nr).map(|_| rng.gen_range(0.1..1.0)).collect();
                    let total: f64 = u.iter().sum();
                    u.iter().map(|x| mass * x / total).collect()
                })
                .collect()
        })
        .collect();
    StrategyProfile { q }
}

pub fn solve_bwe(game: &GameSpec, options: &SolveOptions) -> Result<EquilibriumReport> {
    solve_bwe_from(game, options, start_profile(game, options.seed))
}

/// Solve starting from a given feasible profile.
pub fn solve_bwe_from(
    game: &GameSpec,
    options: &SolveOptions,
    start: StrategyProfile,
) -> Result<EquilibriumReport> {
    let tol = options.resolve(game);
    let ctx = Context::new(game);
    let mut q = start;
    let mut w = ctx.loads(&q);
    let mut history = Vec::new();
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut passes = 0;
    let mut grad = vec![0.0; game.num_routes()];
    while passes < options.max_iterations {
        passes += 1;
        for (i, ti) in ctx.blocks() {
            for _ in 0..INNER_MOVES {
                ctx.block_gradient(&w, i, ti, &mut grad);
                if !ctx.pairwise_move(&mut q, &mut w, i, ti, &grad) {
                    break;
                }
            }
        }
        w = ctx.loads(&q);
        gap = ctx.gap(&q, &w, &mut grad);
        history.push(game.potential_w(&EdgeLoad { w: w.clone() }));
        log::trace!("pass {passes}: gap {gap:.3e}");
        if gap <= tol.gap {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "equilibrium solve stopped after {passes} passes with gap {gap:.3e} > {:.3e}",
            tol.gap
        );
    }
    Ok(build_report(game, q, tol, gap, passes, converged, history))
}

pub(crate) fn build_report(
    game: &GameSpec,
    q: StrategyProfile,
    tolerances: super::Tolerances,
    gap: f64,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
) -> EquilibriumReport {
    let f = game.flow_of(&q);
    let w = game.load_of(&f);
    let expected_costs = game.expected_route_costs(&w);
    let kkt = certify_kkt(game, &q);
    let population_costs = (0..game.num_populations())
        .map(|i| game.population_cost_min(&w, i))
        .collect();
    let mut max_cost_slack: f64 = 0.0;
    for (i, (ei, qi)) in expected_costs.iter().zip(&q.q).enumerate() {
        if game.sizes()[i] <= 0.0 {
            continue;
        }
        for (e, qr) in ei.iter().zip(qi) {
            let m = e.iter().copied().fold(f64::INFINITY, f64::min);
            for (c, x) in e.iter().zip(qr) {
                if *x > USED_ROUTE_TOL {
                    max_cost_slack = max_cost_slack.max(c - m);
                }
            }
        }
    }
    let certified = converged && max_cost_slack <= tolerances.cost;
    EquilibriumReport {
        sizes: game.sizes().to_vec(),
        potential: game.potential_w(&w),
        average_cost: game.average_cost(&w),
        mu: kkt.mu.clone(),
        nu: kkt.nu.clone(),
        expected_costs,
        population_costs,
        gap,
        tolerances,
        max_cost_slack,
        kkt,
        iterations,
        converged,
        certified,
        history,
        q,
        f,
        w,
    }
}

/// Precomputed index sets for the block iterations.
struct Context<'a> {
    game: &'a GameSpec,
    /// `members[i][ti]`: profiles with `t^i = ti`.
    members: Vec<Vec<Vec<usize>>>,
    /// `support[t]`: states with `π(s,t) > 0` and their weights.
    support: Vec<Vec<(usize, f64)>>,
}

impl<'a> Context<'a> {
    fn new(game: &'a GameSpec) -> Self {
        let pr = game.info().profiles();
        let members = (0..game.num_populations())
            .map(|i| {
                (0..pr.num_types(i))
                    .map(|ti| pr.profiles_with(i, ti).collect())
                    .collect()
            })
            .collect();
        let support = (0..pr.count())
            .map(|t| {
                (0..game.info().num_states())
                    .map(|s| (s, game.info().joint(s, t)))
                    .filter(|(_, p)| *p > 0.0)
                    .collect()
            })
            .collect();
        Self {
            game,
            members,
            support,
        }
    }

    fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let sizes = self.game.sizes();
        self.members
            .iter()
            .enumerate()
            .filter(move |(i, _)| sizes[*i] > 0.0)
            .flat_map(|(i, m)| (0..m.len()).map(move |ti| (i, ti)))
    }

    fn loads(&self, q: &StrategyProfile) -> Vec<Vec<f64>> {
        self.game.load_of(&self.game.flow_of(q)).w
    }

    /// `Pr(t^i) E[c_r | t^i]` for every route.
    fn block_gradient(&self, w: &[Vec<f64>], i: usize, ti: usize, out: &mut [f64]) {
        let costs = self.game.costs();
        let routes = self.game.network().routes();
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut edge = vec![0.0; self.game.num_edges()];
        for &t in &self.members[i][ti] {
            for &(s, p) in &self.support[t] {
                for (e, c) in edge.iter_mut().enumerate() {
                    *c = costs.get(e, s).value(w[t][e]);
                }
                for (o, r) in out.iter_mut().zip(routes) {
                    *o += p * r.iter().map(|&e| edge[e]).sum::<f64>();
                }
            }
        }
    }

    /// Shift demand from the costliest used route to the cheapest one with
    /// an exact line search. Returns false when the block is equilibrated.
    fn pairwise_move(
        &self,
        q: &mut StrategyProfile,
        w: &mut [Vec<f64>],
        i: usize,
        ti: usize,
        grad: &[f64],
    ) -> bool {
        let qb = &q.q[i][ti];
        let mut best = 0;
        for r in 1..grad.len() {
            if grad[r] < grad[best] {
                best = r;
            }
        }
        let mut worst: Option<usize> = None;
        for r in 0..grad.len() {
            if qb[r] > 0.0 && worst.is_none_or(|v| grad[r] > grad[v]) {
                worst = Some(r);
            }
        }
        let Some(away) = worst else { return false };
        let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let slope = grad[best] - grad[away];
        if away == best || slope >= -1e-15 * scale {
            return false;
        }
        let routes = self.game.network().routes();
        let mut dir: Vec<(usize, f64)> = Vec::new();
        for &e in &routes[best] {
            if !routes[away].contains(&e) {
                dir.push((e, 1.0));
            }
        }
        for &e in &routes[away] {
            if !routes[best].contains(&e) {
                dir.push((e, -1.0));
            }
        }
        let costs = self.game.costs();
        let members = &self.members[i][ti];
        let eval = |delta: f64| {
            let (mut d1, mut d2) = (0.0, 0.0);
            for &t in members {
                for &(s, p) in &self.support[t] {
                    for &(e, a) in &dir {
                        let c = costs.get(e, s);
                        let x = w[t][e] + a * delta;
                        d1 += p * a * c.value(x);
                        d2 += p * c.slope(x);
                    }
                }
            }
            (d1, d2)
        };
        let cap = qb[away];
        let delta = minimize_on_interval(cap, slope, eval);
        if delta <= 0.0 {
            return false;
        }
        let qb = &mut q.q[i][ti];
        qb[best] += delta;
        if delta >= cap {
            qb[away] = 0.0;
        } else {
            qb[away] -= delta;
        }
        for &t in members {
            for &(e, a) in &dir {
                w[t][e] += a * delta;
            }
        }
        true
    }

    /// Frank–Wolfe gap `Σ_blocks Σ_r q_r (g_r - min g)`.
    fn gap(&self, q: &StrategyProfile, w: &[Vec<f64>], grad: &mut [f64]) -> f64 {
        let mut total = 0.0;
        for (i, ti) in self.blocks() {
            self.block_gradient(w, i, ti, grad);
            let m = grad.iter().copied().fold(f64::INFINITY, f64::min);
            total += q.q[i][ti]
                .iter()
                .zip(grad.iter())
                .map(|(x, g)| x * (g - m))
                .sum::<f64>();
        }
        total
    }
}
