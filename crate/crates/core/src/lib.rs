//! Bayesian Wardrop equilibria of routing games with heterogeneously
//! informed populations, their equilibrium regimes, and the relative value
//! of information between populations.

pub mod analysis;
pub mod error;
#[cfg(test)]
mod fixtures;
pub mod game;
pub mod information;
pub mod instance;
pub mod lp;
pub mod model;
pub mod solver;

pub use analysis::{
    bathtub_sweep, classify_regime, compute_adoption_set, compute_thresholds,
    homogeneous_spot_check, inefficiency_report, relative_value, verify_adoption_equilibrium,
    Regime, Sweep, Thresholds,
};
pub use error::{Error, Result};
pub use game::{
    load_of, ConstraintFamily, EdgeLoad, FlowFeasibility, GameSpec, Reconstruction, RouteFlow,
    StrategyProfile,
};
pub use information::{Belief, InformationStructure, ProfileSpace};
pub use instance::Instance;
pub use lp::{feasibility, solve_lp, LinearProgram, LpSolution, LpStatus};
pub use model::{
    check_homogeneous_condition, CostTable, EdgeCost, HomogeneityRejection,
    HomogeneousDecomposition, Network, Positivity,
};
pub use solver::{
    certify_kkt, solve_bwe, solve_flow_program, solve_full_info_optimum, solve_social_optimum,
    EquilibriumReport, FlowProgram, FlowVariant, KktCertificate, SolveOptions,
};
