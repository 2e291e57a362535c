use serde::{Deserialize, Serialize};

use super::{check_pair, pair_sizes, rest_size, DIRECTIONAL_EPS, LOAD_BAND_REL};
use crate::error::{Error, Result};
use crate::game::{EdgeLoad, GameSpec};
use crate::lp::{solve_lp, LpStatus};
use crate::solver::{
    solve_bwe, solve_flow_program, EquilibriumReport, FlowLp, FlowVariant, SolveOptions,
};

/// Distance from a threshold below which a size counts as on it.
const REGIME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "L1")]
    Lambda1,
    #[serde(rename = "L2")]
    Lambda2,
    #[serde(rename = "L3")]
    Lambda3,
    #[serde(rename = "degenerate")]
    Degenerate,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Lambda1 => "L1",
            Regime::Lambda2 => "L2",
            Regime::Lambda3 => "L3",
            Regime::Degenerate => "degenerate",
        })
    }
}

/// Threshold sizes of population `i` against `j` with the others fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub pair: (usize, usize),
    /// `λ̲^i`.
    pub lower: f64,
    /// `λ̄^i`.
    pub upper: f64,
    /// `|λ^{-ij}|`.
    pub rest: f64,
    /// Edge load of the pairwise program, `w^{ij,†}`.
    pub w_dagger: EdgeLoad,
    /// Optimal value of the pairwise program.
    pub pair_value: f64,
    /// Half-width of the load band used in the LPs.
    pub band: f64,
    pub converged: bool,
}

impl Thresholds {
    pub fn classify(&self, lambda_i: f64, lambda_j: f64) -> Regime {
        if lambda_i <= 0.0 || lambda_j <= 0.0 {
            Regime::Degenerate
        } else if lambda_i < self.lower - REGIME_TOL {
            Regime::Lambda1
        } else if lambda_i > self.upper + REGIME_TOL {
            Regime::Lambda3
        } else {
            Regime::Lambda2
        }
    }
}

pub fn compute_thresholds(
    game: &GameSpec,
    i: usize,
    j: usize,
    options: &SolveOptions,
) -> Result<Thresholds> {
    check_pair(game, i, j)?;
    let pair = solve_flow_program(game, options, FlowVariant::Pair(i, j))?;
    let d = game.demand();
    let band = LOAD_BAND_REL * d;
    let rest = rest_size(game, i, j);
    let mut poly = FlowLp::for_variant(game, FlowVariant::Pair(i, j));
    poly.add_load_band(game, &pair.w, band);
    let max_aux = |k: usize| -> Result<f64> {
        let mut lp = poly.lp.clone();
        let start = poly
            .aux_var(k, 0)
            .expect("pair constraint creates auxiliaries");
        for r in 0..game.num_routes() {
            lp.objective[start + r] = -1.0;
        }
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Lp(format!(
                "threshold LP for population {} is {:?} with load band {band:.3e}",
                k + 1,
                sol.status
            )));
        }
        Ok(-sol.objective)
    };
    let lower = ((d - max_aux(i)?) / d).clamp(0.0, 1.0 - rest);
    let upper = (max_aux(j)? / d - rest).clamp(0.0, 1.0 - rest);
    Ok(Thresholds {
        pair: (i, j),
        lower,
        upper,
        rest,
        w_dagger: pair.w,
        pair_value: pair.value,
        band,
        converged: pair.converged,
    })
}

/// `V^{ij*} = C^{j*} - C^{i*}` with a forward-difference cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeValue {
    pub value: f64,
    /// `-(Ψ(λ + ε z^{ij}) - Ψ(λ)) / (ε D)`, when `λ^j ≥ ε`.
    pub directional: Option<f64>,
    pub epsilon: f64,
}

pub fn relative_value(
    game: &GameSpec,
    i: usize,
    j: usize,
    options: &SolveOptions,
) -> Result<RelativeValue> {
    check_pair(game, i, j)?;
    let base = solve_bwe(game, options)?;
    relative_value_at(game, i, j, options, &base)
}

pub(crate) fn relative_value_at(
    game: &GameSpec,
    i: usize,
    j: usize,
    options: &SolveOptions,
    base: &EquilibriumReport,
) -> Result<RelativeValue> {
    let value = base.population_costs[j] - base.population_costs[i];
    let eps = DIRECTIONAL_EPS;
    let directional = if game.sizes()[j] >= eps {
        let sizes = pair_sizes(game, i, j, game.sizes()[i] + eps)?;
        let moved = solve_bwe(&game.with_sizes(sizes)?, options)?;
        Some(-(moved.potential - base.potential) / (eps * game.demand()))
    } else {
        None
    };
    Ok(RelativeValue {
        value,
        directional,
        epsilon: eps,
    })
}

/// Regime of the current sizes, cross-checked against the equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub pair: (usize, usize),
    pub sizes: Vec<f64>,
    pub thresholds: Thresholds,
    pub regime: Regime,
    /// `‖w* - w^{ij,†}‖∞`.
    pub load_deviation: f64,
    pub relative_value: f64,
    pub potential: f64,
    pub population_costs: Vec<f64>,
    /// `λ^i D - Ĵ^i(f*)`.
    pub slack_i: f64,
    pub slack_j: f64,
    pub tight_i: bool,
    pub tight_j: bool,
    /// Label agrees with tightness (`Λ1`, `Λ3`) or load invariance (`Λ2`).
    pub consistent: bool,
    pub certified: bool,
}

pub fn classify_regime(
    game: &GameSpec,
    i: usize,
    j: usize,
    options: &SolveOptions,
) -> Result<RegimeReport> {
    let thresholds = compute_thresholds(game, i, j, options)?;
    regime_report_for(game, &thresholds, options)
}

/// Regime report against already computed thresholds.
pub fn regime_report_for(
    game: &GameSpec,
    thresholds: &Thresholds,
    options: &SolveOptions,
) -> Result<RegimeReport> {
    let eq = solve_bwe(game, options)?;
    Ok(regime_report(game, thresholds, &eq))
}

pub(crate) fn regime_report(
    game: &GameSpec,
    thresholds: &Thresholds,
    eq: &EquilibriumReport,
) -> RegimeReport {
    let (i, j) = thresholds.pair;
    let d = game.demand();
    let tol = eq.tolerances.load;
    let slack = |k: usize| game.sizes()[k] * d - game.impact_of_information(&eq.q, k);
    let (slack_i, slack_j) = (slack(i), slack(j));
    let (tight_i, tight_j) = (slack_i <= tol, slack_j <= tol);
    let regime = thresholds.classify(game.sizes()[i], game.sizes()[j]);
    let load_deviation = game.load_deviation(&eq.w, &thresholds.w_dagger);
    let consistent = match regime {
        Regime::Lambda1 => tight_i,
        Regime::Lambda3 => tight_j,
        Regime::Lambda2 => load_deviation <= tol,
        Regime::Degenerate => true,
    };
    if !consistent {
        log::warn!(
            "regime {regime} at sizes {:?} disagrees with the equilibrium \
             (slack_i {slack_i:.3e}, slack_j {slack_j:.3e}, load deviation {load_deviation:.3e})",
            game.sizes()
        );
    }
    RegimeReport {
        pair: (i, j),
        sizes: game.sizes().to_vec(),
        thresholds: thresholds.clone(),
        regime,
        load_deviation,
        relative_value: eq.population_costs[j] - eq.population_costs[i],
        potential: eq.potential,
        population_costs: eq.population_costs.clone(),
        slack_i,
        slack_j,
        tight_i,
        tight_j,
        consistent,
        certified: eq.certified,
    }
}
