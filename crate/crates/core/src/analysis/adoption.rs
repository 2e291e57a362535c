use serde::{Deserialize, Serialize};

use super::LOAD_BAND_REL;
use crate::error::{Error, Result};
use crate::game::{EdgeLoad, GameSpec};
use crate::lp::{feasibility, solve_lp, LpStatus};
use crate::solver::{solve_bwe, solve_flow_program, FlowLp, FlowVariant, SolveOptions};

/// Size vectors at which dropping every information impact constraint
/// leaves the equilibrium unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdoptionSet {
    /// `w†` of the unconstrained program.
    pub w_dagger: EdgeLoad,
    /// `min_λ Ψ(λ)`.
    pub psi_min: f64,
    pub band: f64,
    pub converged: bool,
}

impl AdoptionSet {
    /// Whether some flow inducing `w†` satisfies every constraint at `sizes`.
    pub fn contains(&self, game: &GameSpec, sizes: &[f64]) -> Result<bool> {
        if sizes.len() != game.num_populations() {
            return Err(Error::InvalidGame(format!(
                "{} sizes for {} populations",
                sizes.len(),
                game.num_populations()
            )));
        }
        let mut poly = FlowLp::new(game);
        for (i, &l) in sizes.iter().enumerate() {
            poly.add_iic(game, i, l);
        }
        poly.add_load_band(game, &self.w_dagger, self.band);
        Ok(feasibility(&poly.lp)?.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdoptionReport {
    pub set: AdoptionSet,
    /// `[λ^{i†}_min, λ^{i†}_max]` per population.
    pub ranges: Vec<(f64, f64)>,
    /// Whether population `i` has positive size in some adoption vector.
    pub support: Vec<bool>,
}

pub fn compute_adoption_set(game: &GameSpec, options: &SolveOptions) -> Result<AdoptionReport> {
    let un = solve_flow_program(game, options, FlowVariant::Unconstrained)?;
    let band = LOAD_BAND_REL * game.demand();
    let set = AdoptionSet {
        w_dagger: un.w,
        psi_min: un.value,
        band,
        converged: un.converged,
    };
    let d = game.demand();
    let n = game.num_populations();
    let mut poly = FlowLp::new(game);
    let mut lambda = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms = poly.aux_sum_terms(game, i);
        let l = poly.add_var(0.0, 1.0);
        terms.push((l, d));
        poly.lp.add_ge_sparse(&terms, d);
        lambda.push(l);
    }
    let all: Vec<(usize, f64)> = lambda.iter().map(|&l| (l, 1.0)).collect();
    poly.lp.add_eq_sparse(&all, 1.0);
    poly.add_load_band(game, &set.w_dagger, band);
    let mut ranges = Vec::with_capacity(n);
    for &l in &lambda {
        let bound = |sign: f64| -> Result<f64> {
            let mut lp = poly.lp.clone();
            lp.objective[l] = sign;
            let sol = solve_lp(&lp)?;
            if sol.status != LpStatus::Optimal {
                return Err(Error::Lp(format!("adoption range LP is {:?}", sol.status)));
            }
            Ok(sol.x[l].clamp(0.0, 1.0))
        };
        ranges.push((bound(1.0)?, bound(-1.0)?));
    }
    let support = ranges.iter().map(|(_, hi)| *hi > 1e-9).collect();
    Ok(AdoptionReport {
        set,
        ranges,
        support,
    })
}

/// No population with positive size strictly prefers another TIS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdoptionVerdict {
    pub sizes: Vec<f64>,
    pub population_costs: Vec<f64>,
    pub min_cost: f64,
    pub tolerance: f64,
    pub equilibrium: bool,
    pub certified: bool,
}

pub fn verify_adoption_equilibrium(
    game: &GameSpec,
    options: &SolveOptions,
) -> Result<AdoptionVerdict> {
    let eq = solve_bwe(game, options)?;
    let costs = eq.population_costs.clone();
    let min_cost = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let tolerance = eq.tolerances.cost;
    let equilibrium = game
        .sizes()
        .iter()
        .zip(&costs)
        .all(|(l, c)| *l <= 0.0 || *c <= min_cost + tolerance);
    Ok(AdoptionVerdict {
        sizes: game.sizes().to_vec(),
        population_costs: costs,
        min_cost,
        tolerance,
        equilibrium,
        certified: eq.certified,
    })
}
