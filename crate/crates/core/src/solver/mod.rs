//! Equilibrium computation by convex potential minimization.

mod bwe;
mod flow;
mod kkt;
mod linesearch;
mod social;

pub use bwe::{solve_bwe, solve_bwe_from, start_profile};
pub use flow::{solve_flow_program, FlowLp, FlowProgram, FlowVariant};
pub use kkt::{certify_kkt, KktCertificate};
pub use social::{solve_full_info_optimum, solve_social_optimum, FullInfoOptimum, SocialOptimum};

use serde::{Deserialize, Serialize};

use crate::game::{EdgeLoad, GameSpec, RouteFlow, StrategyProfile};

/// Solver settings. Unset tolerances resolve to defaults scaled by the game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Outer passes (BWE) or Frank–Wolfe iterations (flow programs).
    pub max_iterations: usize,
    /// Absolute duality-gap tolerance; default `1e-12 (1 + |Φ₀|)`.
    pub gap_tol: Option<f64>,
    /// Edge-load tolerance; default `1e-4 D`.
    pub load_tol: Option<f64>,
    /// Expected-cost slack for certification; default `1e-5 Φ₀ / D`.
    pub cost_tol: Option<f64>,
    /// Away steps in the flow-program Frank–Wolfe.
    pub away_steps: bool,
    /// Selects among deterministic starting points; 0 is the uniform split.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            gap_tol: None,
            load_tol: None,
            cost_tol: None,
            away_steps: true,
            seed: 0,
        }
    }
}

/// Relative factor of the default gap tolerance.
pub const DEFAULT_GAP_REL: f64 = 1e-12;
/// Relative factor of the default load tolerance.
pub const DEFAULT_LOAD_REL: f64 = 1e-4;
/// Relative factor of the default cost slack.
pub const DEFAULT_COST_REL: f64 = 1e-5;
/// Flow threshold above which a route counts as used.
pub const USED_ROUTE_TOL: f64 = 1e-7;

/// Tolerances resolved against a particular game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub gap: f64,
    pub load: f64,
    pub cost: f64,
    /// Potential at the uniform split.
    pub reference_potential: f64,
}

impl SolveOptions {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn resolve(&self, game: &GameSpec) -> Tolerances {
        let phi0 = game.reference_potential();
        Tolerances {
            gap: self.gap_tol.unwrap_or(DEFAULT_GAP_REL * (1.0 + phi0.abs())),
            load: self.load_tol.unwrap_or(DEFAULT_LOAD_REL * game.demand()),
            cost: self
                .cost_tol
                .unwrap_or(DEFAULT_COST_REL * phi0.abs() / game.demand()),
            reference_potential: phi0,
        }
    }
}

/// A solved Bayesian Wardrop equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub sizes: Vec<f64>,
    pub q: StrategyProfile,
    pub f: RouteFlow,
    pub w: EdgeLoad,
    /// `Ψ(λ)`, the potential at the equilibrium.
    pub potential: f64,
    /// `μ^{t^i} = min_r Pr(t^i) E[c_r | t^i]`.
    pub mu: Vec<Vec<f64>>,
    /// `ν^{t^i}_r = Pr(t^i) E[c_r | t^i] - μ^{t^i}`.
    pub nu: Vec<Vec<Vec<f64>>>,
    /// `E[c_r | t^i]`.
    pub expected_costs: Vec<Vec<Vec<f64>>>,
    /// `C^{i*}` in min form.
    pub population_costs: Vec<f64>,
    pub average_cost: f64,
    /// Frank–Wolfe gap at termination.
    pub gap: f64,
    pub tolerances: Tolerances,
    /// Largest `E[c_r|t^i] - min E[c|t^i]` over used routes.
    pub max_cost_slack: f64,
    pub kkt: KktCertificate,
    pub iterations: usize,
    pub converged: bool,
    /// Converged and every used route is cost-minimal within `ε_c`.
    pub certified: bool,
    /// Potential after each pass.
    pub history: Vec<f64>,
}
