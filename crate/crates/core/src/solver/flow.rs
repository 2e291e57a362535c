//! Potential minimization over route-flow polytopes by Frank–Wolfe with
//! away steps and an LP oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linesearch::minimize_on_interval;
use super::{SolveOptions, Tolerances};
use crate::error::{Error, Result};
use crate::game::{EdgeLoad, GameSpec, RouteFlow};
use crate::lp::{solve_lp, LinearProgram, LpStatus};

/// Which information impact constraints the flow program keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowVariant {
    /// Every population's constraint: the equilibrium program.
    Full,
    /// Constraints of `i` and `j` replaced by their sum.
    Pair(usize, usize),
    /// No information impact constraints.
    Unconstrained,
}

/// Linear description of a route-flow polytope.
///
/// Variables are `f_r(t)` at index `t |R| + r`, followed by auxiliary
/// `m^i_r` blocks (one per population that needs them) and any extra
/// variables added by the caller. Balance is imposed through the additive
/// form `f(t) = f(t̂) + Σ_i (f(t^i, t̂^{-i}) - f(t̂))` with `t̂` the first
/// profile, and demand only on the profiles `(t^i, t̂^{-i})`.
#[derive(Debug, Clone)]
pub struct FlowLp {
    pub lp: LinearProgram,
    num_profiles: usize,
    num_routes: usize,
    aux_start: Vec<Option<usize>>,
}

impl FlowLp {
    pub fn new(game: &GameSpec) -> Self {
        let pr = game.info().profiles();
        let np = pr.count();
        let nr = game.num_routes();
        let d = game.demand();
        let mut lp = LinearProgram::new(np * nr);
        for j in 0..np * nr {
            lp.set_bounds(j, 0.0, d);
        }
        let idx = |t: usize, r: usize| t * nr + r;
        for t in 0..np {
            let moved: Vec<usize> = (0..pr.num_populations())
                .filter(|&i| pr.type_of(t, i) != 0)
                .collect();
            if moved.len() <= 1 {
                let terms: Vec<(usize, f64)> = (0..nr).map(|r| (idx(t, r), 1.0)).collect();
                lp.add_eq_sparse(&terms, d);
                continue;
            }
            for r in 0..nr {
                let mut terms = vec![(idx(t, r), 1.0), (idx(0, r), moved.len() as f64 - 1.0)];
                for &i in &moved {
                    terms.push((idx(pr.with_type(0, i, pr.type_of(t, i)), r), -1.0));
                }
                lp.add_eq_sparse(&terms, 0.0);
            }
        }
        Self {
            lp,
            num_profiles: np,
            num_routes: nr,
            aux_start: vec![None; game.num_populations()],
        }
    }

    /// The polytope of a flow-program variant at the game's sizes.
    pub fn for_variant(game: &GameSpec, variant: FlowVariant) -> Self {
        let mut p = Self::new(game);
        let sizes = game.sizes();
        match variant {
            FlowVariant::Full => {
                for (i, &l) in sizes.iter().enumerate() {
                    p.add_iic(game, i, l);
                }
            }
            FlowVariant::Pair(i, j) => {
                for (k, &l) in sizes.iter().enumerate() {
                    if k != i && k != j {
                        p.add_iic(game, k, l);
                    }
                }
                let rest = 1.0 - sizes[i] - sizes[j];
                p.add_pair_iic(game, i, j, rest);
            }
            FlowVariant::Unconstrained => {}
        }
        p
    }

    pub fn num_flow_vars(&self) -> usize {
        self.num_profiles * self.num_routes
    }

    pub fn f_var(&self, t: usize, r: usize) -> usize {
        t * self.num_routes + r
    }

    /// Append a variable with the given bounds; returns its index.
    pub fn add_var(&mut self, lower: f64, upper: f64) -> usize {
        let lp = &mut self.lp;
        lp.objective.push(0.0);
        lp.lower.push(lower);
        lp.upper.push(upper);
        for row in lp.a_eq.iter_mut().chain(lp.a_in.iter_mut()) {
            row.push(0.0);
        }
        lp.objective.len() - 1
    }

    /// Auxiliary `m^i_r ≤ f_r(t^i, t̂^{-i})` for every type; returns the
    /// index of `m^i_0`.
    pub fn add_aux(&mut self, game: &GameSpec, i: usize) -> usize {
        if let Some(start) = self.aux_start[i] {
            return start;
        }
        let pr = game.info().profiles();
        let start = self.lp.num_vars();
        for _ in 0..self.num_routes {
            self.add_var(0.0, game.demand());
        }
        for ti in 0..pr.num_types(i) {
            let t = pr.with_type(0, i, ti);
            for r in 0..self.num_routes {
                let f = self.f_var(t, r);
                self.lp.add_le_sparse(&[(start + r, 1.0), (f, -1.0)], 0.0);
            }
        }
        self.aux_start[i] = Some(start);
        start
    }

    pub fn aux_var(&self, i: usize, r: usize) -> Option<usize> {
        self.aux_start[i].map(|s| s + r)
    }

    /// `Σ_r m^i_r` as sparse terms.
    pub fn aux_sum_terms(&mut self, game: &GameSpec, i: usize) -> Vec<(usize, f64)> {
        let start = self.add_aux(game, i);
        (0..self.num_routes).map(|r| (start + r, 1.0)).collect()
    }

    /// `Ĵ^i(f) ≤ λ^i D`.
    pub fn add_iic(&mut self, game: &GameSpec, i: usize, lambda: f64) {
        let terms = self.aux_sum_terms(game, i);
        self.lp
            .add_ge_sparse(&terms, (1.0 - lambda) * game.demand());
    }

    /// `Ĵ^i(f) + Ĵ^j(f) ≤ (1 - rest) D`.
    pub fn add_pair_iic(&mut self, game: &GameSpec, i: usize, j: usize, rest: f64) {
        let mut terms = self.aux_sum_terms(game, i);
        terms.extend(self.aux_sum_terms(game, j));
        self.lp.add_ge_sparse(&terms, (1.0 + rest) * game.demand());
    }

    /// `|Σ_{r∋e} f_r(t) - w_e(t)| ≤ band` for every edge and every profile
    /// of positive probability.
    pub fn add_load_band(&mut self, game: &GameSpec, w: &EdgeLoad, band: f64) {
        let routes = game.network().routes();
        for t in 0..self.num_profiles {
            if game.info().profile_probability(t) <= 0.0 {
                continue;
            }
            for e in 0..game.num_edges() {
                let terms: Vec<(usize, f64)> = routes
                    .iter()
                    .enumerate()
                    .filter(|(_, edges)| edges.contains(&e))
                    .map(|(r, _)| (self.f_var(t, r), 1.0))
                    .collect();
                self.lp.add_le_sparse(&terms, w.w[t][e] + band);
                self.lp.add_ge_sparse(&terms, w.w[t][e] - band);
            }
        }
    }

    pub fn flow_of(&self, x: &[f64]) -> RouteFlow {
        RouteFlow {
            f: (0..self.num_profiles)
                .map(|t| x[t * self.num_routes..(t + 1) * self.num_routes].to_vec())
                .collect(),
        }
    }
}

/// Result of a flow-space potential minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowProgram {
    pub variant: FlowVariant,
    pub f: RouteFlow,
    pub w: EdgeLoad,
    /// Optimal value of the potential.
    pub value: f64,
    pub gap: f64,
    pub tolerances: Tolerances,
    pub iterations: usize,
    pub converged: bool,
    /// Vertices in the final active set.
    pub active_vertices: usize,
}

pub fn solve_flow_program(
    game: &GameSpec,
    options: &SolveOptions,
    variant: FlowVariant,
) -> Result<FlowProgram> {
    if let FlowVariant::Pair(i, j) = variant {
        let n = game.num_populations();
        if i >= n || j >= n || i == j {
            return Err(Error::InvalidGame(format!(
                "invalid population pair ({i}, {j})"
            )));
        }
        if game.sizes()[i] <= 0.0 || game.sizes()[j] <= 0.0 {
            return Err(Error::InvalidGame(
                "pairwise program needs both sizes positive".into(),
            ));
        }
    }
    let tol = options.resolve(game);
    let poly = FlowLp::for_variant(game, variant);
    let nf = poly.num_flow_vars();
    let n = poly.lp.num_vars();
    let lmo = |g: &[f64]| -> Result<Vec<f64>> {
        let mut lp = poly.lp.clone();
        lp.objective[..nf].copy_from_slice(g);
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok(sol.x),
            status => Err(Error::Internal(format!(
                "flow polytope oracle returned {status:?}"
            ))),
        }
    };

    let uniform = RouteFlow {
        f: vec![
            vec![game.demand() / game.num_routes() as f64; game.num_routes()];
            game.num_profiles()
        ],
    };
    let first = if options.seed == 0 {
        lmo(&flow_gradient(game, &game.load_of(&uniform)))?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        let g: Vec<f64> = (0..nf).map(|_| rng.gen_range(-1.0..1.0)).collect();
        lmo(&g)?
    };
    let mut active: Vec<(Vec<f64>, f64)> = vec![(first, 1.0)];
    let mut x = active[0].0.clone();
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let w = game.load_of(&poly.flow_of(&x));
        let g = flow_gradient(game, &w);
        let s = lmo(&g)?;
        let dot = |v: &[f64]| v[..nf].iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        let gx = dot(&x);
        gap = gx - dot(&s);
        if gap <= tol.gap {
            converged = true;
            break;
        }
        let away = if options.away_steps {
            active
                .iter()
                .enumerate()
                .map(|(k, (v, _))| (k, dot(v)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
        } else {
            None
        };
        let (dir, gamma_max, step) = match away {
            Some((k, gv)) if gv - gx > gap && active.len() > 1 => {
                let alpha = active[k].1;
                let d: Vec<f64> = x.iter().zip(&active[k].0).map(|(a, b)| a - b).collect();
                (d, alpha / (1.0 - alpha), Step::Away(k))
            }
            _ => {
                let d: Vec<f64> = s.iter().zip(&x).map(|(a, b)| a - b).collect();
                (d, 1.0, Step::Toward)
            }
        };
        let slope = dot(&dir);
        if slope >= 0.0 {
            break;
        }
        let dw = game.load_of(&poly.flow_of(&dir));
        let gamma = minimize_on_interval(gamma_max, slope, |gm| directional(game, &w, &dw, gm));
        match step {
            Step::Toward => {
                if gamma >= 1.0 {
                    active.clear();
                    active.push((s, 1.0));
                } else {
                    for (_, a) in active.iter_mut() {
                        *a *= 1.0 - gamma;
                    }
                    match active.iter_mut().find(|(v, _)| same_vertex(v, &s)) {
                        Some((_, a)) => *a += gamma,
                        None => active.push((s, gamma)),
                    }
                }
            }
            Step::Away(k) => {
                for (_, a) in active.iter_mut() {
                    *a *= 1.0 + gamma;
                }
                active[k].1 -= gamma;
                if gamma >= gamma_max || active[k].1 <= 0.0 {
                    active.remove(k);
                }
            }
        }
        x = vec![0.0; n];
        for (v, a) in &active {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += a * vi;
            }
        }
    }
    if !converged {
        log::warn!(
            "flow program {variant:?} stopped after {iterations} iterations with gap {gap:.3e}"
        );
    }
    let f = poly.flow_of(&x);
    let w = game.load_of(&f);
    Ok(FlowProgram {
        variant,
        value: game.potential_w(&w),
        f,
        w,
        gap,
        tolerances: tol,
        iterations,
        converged,
        active_vertices: active.len(),
    })
}

enum Step {
    Toward,
    Away(usize),
}

fn same_vertex(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// `∂Φ̂/∂f_r(t) = Σ_s π(s,t) c^s_r(w(t))`, flattened as `t |R| + r`.
pub(crate) fn flow_gradient(game: &GameSpec, w: &EdgeLoad) -> Vec<f64> {
    let nr = game.num_routes();
    let mut g = vec![0.0; game.num_profiles() * nr];
    for s in 0..game.info().num_states() {
        for t in 0..game.num_profiles() {
            let p = game.info().joint(s, t);
            if p == 0.0 {
                continue;
            }
            for (r, c) in game.route_costs(s, &w.w[t]).into_iter().enumerate() {
                g[t * nr + r] += p * c;
            }
        }
    }
    g
}

/// First and second derivative of `γ ↦ Φ̌(w + γ dw)`.
fn directional(game: &GameSpec, w: &EdgeLoad, dw: &EdgeLoad, gamma: f64) -> (f64, f64) {
    let (mut d1, mut d2) = (0.0, 0.0);
    for s in 0..game.info().num_states() {
        for t in 0..game.num_profiles() {
            let p = game.info().joint(s, t);
            if p == 0.0 {
                continue;
            }
            for e in 0..game.num_edges() {
                let d = dw.w[t][e];
                if d == 0.0 {
                    continue;
                }
                let c = game.costs().get(e, s);
                let x = w.w[t][e] + gamma * d;
                d1 += p * d * c.value(x);
                d2 += p * d * d * c.slope(x);
            }
        }
    }
    (d1, d2)
}
