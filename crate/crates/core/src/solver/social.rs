//! Cost-minimizing routing through the marginal-cost game.

use serde::{Deserialize, Serialize};

use super::{solve_bwe, EquilibriumReport, SolveOptions};
use crate::error::Result;
use crate::game::{EdgeLoad, GameSpec, StrategyProfile};
use crate::information::InformationStructure;

/// Minimum average cost when each population is routed on its own signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialOptimum {
    /// Equilibrium of the game with every cost replaced by `c + w c'`.
    pub modified: EquilibriumReport,
    pub q: StrategyProfile,
    pub w: EdgeLoad,
    /// `C^opt(λ)`: average cost of `q` under the original costs.
    pub c_opt: f64,
}

/// Optimum of a planner who observes the state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateOptimum {
    pub state: String,
    pub route_flow: Vec<f64>,
    pub load: Vec<f64>,
    /// `Σ_e w_e c_e^s(w_e)`.
    pub total_cost: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullInfoOptimum {
    pub per_state: Vec<StateOptimum>,
    /// `C^so = Σ_s θ(s) total_cost_s / D`.
    pub c_so: f64,
}

pub fn solve_social_optimum(game: &GameSpec, options: &SolveOptions) -> Result<SocialOptimum> {
    let modified_game = game.with_costs(game.costs().marginal_costs())?;
    let modified = solve_bwe(&modified_game, options)?;
    let c_opt = game.average_cost(&modified.w);
    Ok(SocialOptimum {
        q: modified.q.clone(),
        w: modified.w.clone(),
        c_opt,
        modified,
    })
}

pub fn solve_full_info_optimum(game: &GameSpec, options: &SolveOptions) -> Result<FullInfoOptimum> {
    let info = game.info();
    let mut per_state = Vec::with_capacity(info.num_states());
    let mut c_so = 0.0;
    for s in 0..info.num_states() {
        let single = InformationStructure::from_common_prior(
            vec![info.states()[s].clone()],
            vec![1.0],
            vec![vec!["*".into()]],
            vec![1.0],
        )?;
        let original = GameSpec::new(
            game.network().clone(),
            game.costs().restrict_to_state(s),
            single,
            game.demand(),
            vec![1.0],
        )?;
        let social = solve_social_optimum(&original, options)?;
        let total_cost = social.c_opt * game.demand();
        c_so += info.prior()[s] * total_cost;
        per_state.push(StateOptimum {
            state: info.states()[s].clone(),
            route_flow: social.modified.f.f[0].clone(),
            load: social.w.w[0].clone(),
            total_cost,
            converged: social.modified.converged,
        });
    }
    Ok(FullInfoOptimum {
        per_state,
        c_so: c_so / game.demand(),
    })
}
