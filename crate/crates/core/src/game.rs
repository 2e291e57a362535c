//! Strategy profiles, route flows, edge loads and the weighted potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::information::{Belief, InformationStructure};
use crate::model::{CostTable, Network};

/// Absolute tolerance on the linear feasibility constraints.
pub const FEAS_TOL: f64 = 1e-9;

/// Tolerance on `Σλ = 1`.
pub const SIZE_TOL: f64 = 1e-12;

/// `q[i][t^i][r]`: demand of population `i` with type `t^i` on route `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub q: Vec<Vec<Vec<f64>>>,
}

/// `f[t][r]`: aggregate flow on route `r` under type profile `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteFlow {
    pub f: Vec<Vec<f64>>,
}

/// `w[t][e]`: load on edge `e` under type profile `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeLoad {
    pub w: Vec<Vec<f64>>,
}

impl EdgeLoad {
    /// `max |w - other|` over all entries.
    pub fn max_deviation(&self, other: &EdgeLoad) -> f64 {
        self.w
            .iter()
            .flatten()
            .zip(other.w.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Constraint families of the feasible flow polytope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    Balance,
    Demand,
    Nonnegativity,
    InformationImpact,
}

impl std::fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConstraintFamily::Balance => "balance",
            ConstraintFamily::Demand => "demand",
            ConstraintFamily::Nonnegativity => "nonnegativity",
            ConstraintFamily::InformationImpact => "information impact",
        };
        f.write_str(s)
    }
}

/// Largest violation per constraint family for a route flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowFeasibility {
    pub balance: f64,
    pub demand: f64,
    pub nonnegativity: f64,
    /// `max(0, Ĵ^i(f) - λ^i D)` per population.
    pub information_impact: Vec<f64>,
}

impl FlowFeasibility {
    /// The family with the largest violation above `tol`, if any.
    pub fn worst(&self, tol: f64) -> Option<(ConstraintFamily, f64)> {
        let iic = self.information_impact.iter().copied().fold(0.0, f64::max);
        [
            (ConstraintFamily::Balance, self.balance),
            (ConstraintFamily::Demand, self.demand),
            (ConstraintFamily::Nonnegativity, self.nonnegativity),
            (ConstraintFamily::InformationImpact, iic),
        ]
        .into_iter()
        .filter(|(_, v)| *v > tol)
        .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Strategy profiles inducing a given route flow.
///
/// Every such profile is `q^i_r(t^i) = offset[i][t^i][r] + χ^i_r` with `χ` in
/// the polytope `Σ_r χ^i_r = λ^i D`, `Σ_i χ^i_r = f_r(t̂)`,
/// `χ^i_r ≥ chi_lower[i][r]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    /// Reference profile `t̂` (always the first profile).
    pub reference_profile: usize,
    /// `f_r(t^i, t̂^{-i}) - f_r(t̂)`.
    pub offset: Vec<Vec<Vec<f64>>>,
    /// `max_{t^i} (f_r(t̂) - f_r(t^i, t̂^{-i}))`.
    pub chi_lower: Vec<Vec<f64>>,
    /// `f_r(t̂)`.
    pub chi_route_totals: Vec<f64>,
    /// The explicit member of the χ polytope used for `profile`.
    pub chi: Vec<Vec<f64>>,
    pub profile: StrategyProfile,
}

/// Network, costs, common prior, demand and population sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    network: Network,
    costs: CostTable,
    info: InformationStructure,
    demand: f64,
    sizes: Vec<f64>,
}

impl GameSpec {
    pub fn new(
        network: Network,
        costs: CostTable,
        info: InformationStructure,
        demand: f64,
        sizes: Vec<f64>,
    ) -> Result<Self> {
        if costs.num_edges() != network.num_edges() {
            return Err(Error::InvalidGame(format!(
                "cost table covers {} edges, network has {}",
                costs.num_edges(),
                network.num_edges()
            )));
        }
        if costs.num_states() != info.num_states() {
            return Err(Error::InvalidGame(format!(
                "cost table covers {} states, information structure has {}",
                costs.num_states(),
                info.num_states()
            )));
        }
        if !(demand.is_finite() && demand > 0.0) {
            return Err(Error::InvalidGame(format!(
                "demand {demand} must be positive"
            )));
        }
        let game = Self {
            network,
            costs,
            info,
            demand,
            sizes: Vec::new(),
        };
        game.with_sizes(sizes)
    }

    /// Same game with a different size vector.
    pub fn with_sizes(&self, sizes: Vec<f64>) -> Result<Self> {
        if sizes.len() != self.info.num_populations() {
            return Err(Error::InvalidGame(format!(
                "{} sizes for {} populations",
                sizes.len(),
                self.info.num_populations()
            )));
        }
        if let Some(x) = sizes.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidGame(format!("invalid population size {x}")));
        }
        let total: f64 = sizes.iter().sum();
        if (total - 1.0).abs() > SIZE_TOL {
            return Err(Error::InvalidGame(format!(
                "population sizes sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            sizes,
            ..self.clone()
        })
    }

    /// Same game with a different cost table (e.g. marginal costs).
    pub fn with_costs(&self, costs: CostTable) -> Result<Self> {
        Self::new(
            self.network.clone(),
            costs,
            self.info.clone(),
            self.demand,
            self.sizes.clone(),
        )
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn costs(&self) -> &CostTable {
        &self.costs
    }

    /// `max |w - other|` over type profiles of positive probability. Loads at
    /// null profiles do not enter the potential and are not determined.
    pub fn load_deviation(&self, w: &EdgeLoad, other: &EdgeLoad) -> f64 {
        (0..self.info.profiles().count())
            .filter(|&t| self.info.profile_probability(t) > 0.0)
            .flat_map(|t| w.w[t].iter().zip(&other.w[t]))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn info(&self) -> &InformationStructure {
        &self.info
    }

    pub fn demand(&self) -> f64 {
        self.demand
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn num_populations(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_routes(&self) -> usize {
        self.network.num_routes()
    }

    pub fn num_edges(&self) -> usize {
        self.network.num_edges()
    }

    pub fn num_profiles(&self) -> usize {
        self.info.profiles().count()
    }

    pub fn beliefs(&self) -> Belief {
        self.info.interim_beliefs()
    }

    /// `q^i_r(t^i) = λ^i D / |R|`.
    pub fn uniform_profile(&self) -> StrategyProfile {
        let nr = self.num_routes() as f64;
        StrategyProfile {
            q: (0..self.num_populations())
                .map(|i| {
                    let share = self.sizes[i] * self.demand / nr;
                    vec![vec![share; self.num_routes()]; self.info.profiles().num_types(i)]
                })
                .collect(),
        }
    }

    /// Potential at the uniform profile; it does not depend on the sizes.
    pub fn reference_potential(&self) -> f64 {
        self.potential_q(&self.uniform_profile())
    }

    /// Typical cost magnitude `Φ₀ / D`.
    pub fn cost_scale(&self) -> f64 {
        self.reference_potential() / self.demand
    }

    pub fn flow_of(&self, q: &StrategyProfile) -> RouteFlow {
        let pr = self.info.profiles();
        let f = (0..pr.count())
            .map(|t| {
                let mut row = vec![0.0; self.num_routes()];
                for (i, qi) in q.q.iter().enumerate() {
                    for (x, v) in row.iter_mut().zip(&qi[pr.type_of(t, i)]) {
                        *x += v;
                    }
                }
                row
            })
            .collect();
        RouteFlow { f }
    }

    pub fn load_of(&self, f: &RouteFlow) -> EdgeLoad {
        load_of(&self.network, f)
    }

    /// `Σ_{e∈r} c_e^s(w_e)` for every route given one profile's loads.
    pub fn route_costs(&self, s: usize, w_t: &[f64]) -> Vec<f64> {
        let edge: Vec<f64> = (0..self.num_edges())
            .map(|e| self.costs.get(e, s).value(w_t[e]))
            .collect();
        self.network
            .routes()
            .iter()
            .map(|r| r.iter().map(|&e| edge[e]).sum())
            .collect()
    }

    /// `Pr(t^i) E[c_r | t^i]` for every `(i, t^i, r)`.
    pub fn weighted_route_costs(&self, w: &EdgeLoad) -> Vec<Vec<Vec<f64>>> {
        let pr = self.info.profiles();
        let nr = self.num_routes();
        let mut out: Vec<Vec<Vec<f64>>> = (0..self.num_populations())
            .map(|i| vec![vec![0.0; nr]; pr.num_types(i)])
            .collect();
        for s in 0..self.info.num_states() {
            for t in 0..pr.count() {
                let p = self.info.joint(s, t);
                if p == 0.0 {
                    continue;
                }
                let c = self.route_costs(s, &w.w[t]);
                for (i, oi) in out.iter_mut().enumerate() {
                    for (acc, cr) in oi[pr.type_of(t, i)].iter_mut().zip(&c) {
                        *acc += p * cr;
                    }
                }
            }
        }
        out
    }

    /// `E[c_r | t^i]` for every `(i, t^i, r)`.
    pub fn expected_route_costs(&self, w: &EdgeLoad) -> Vec<Vec<Vec<f64>>> {
        let mut out = self.weighted_route_costs(w);
        for (i, oi) in out.iter_mut().enumerate() {
            for (ti, row) in oi.iter_mut().enumerate() {
                let p = self.info.type_probability(i, ti);
                row.iter_mut().for_each(|x| *x /= p);
            }
        }
        out
    }

    /// `E[c_r | t^i]` for population `i`, type `ti`, route `r`.
    pub fn expected_route_cost(&self, w: &EdgeLoad, i: usize, ti: usize, r: usize) -> f64 {
        let pr = self.info.profiles();
        let mut acc = 0.0;
        for s in 0..self.info.num_states() {
            for t in pr.profiles_with(i, ti) {
                let p = self.info.joint(s, t);
                if p == 0.0 {
                    continue;
                }
                acc += p * self
                    .network
                    .route(r)
                    .iter()
                    .map(|&e| self.costs.get(e, s).value(w.w[t][e]))
                    .sum::<f64>();
            }
        }
        acc / self.info.type_probability(i, ti)
    }

    pub fn potential_q(&self, q: &StrategyProfile) -> f64 {
        self.potential_f(&self.flow_of(q))
    }

    pub fn potential_f(&self, f: &RouteFlow) -> f64 {
        self.potential_w(&self.load_of(f))
    }

    /// `Σ_{s,t} π(s,t) Σ_e ∫_0^{w_e(t)} c_e^s`.
    pub fn potential_w(&self, w: &EdgeLoad) -> f64 {
        self.expected_edge_sum(w, |c, x| c.antiderivative(x))
    }

    /// `∂Φ/∂q^i_r(t^i) = Pr(t^i) E[c_r | t^i]`.
    pub fn potential_gradient(&self, q: &StrategyProfile) -> Vec<Vec<Vec<f64>>> {
        self.weighted_route_costs(&self.load_of(&self.flow_of(q)))
    }

    /// `Σ_{t^i} Pr(t^i) min_r E[c_r | t^i]`; the equilibrium population cost.
    pub fn population_cost_min(&self, w: &EdgeLoad, i: usize) -> f64 {
        self.weighted_route_costs(w)[i]
            .iter()
            .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
            .sum()
    }

    /// `Σ_{t^i} Pr(t^i) Σ_r E[c_r | t^i] q^i_r(t^i) / (λ^i D)`.
    pub fn population_cost_weighted(&self, q: &StrategyProfile, i: usize) -> f64 {
        let grad = self.potential_gradient(q);
        let mass = self.sizes[i] * self.demand;
        grad[i]
            .iter()
            .zip(&q.q[i])
            .map(|(g, qi)| g.iter().zip(qi).map(|(a, b)| a * b).sum::<f64>())
            .sum::<f64>()
            / mass
    }

    /// Weighted form for populations with positive size, min-form otherwise.
    pub fn population_cost(&self, q: &StrategyProfile, i: usize) -> f64 {
        if self.sizes[i] > 0.0 {
            self.population_cost_weighted(q, i)
        } else {
            self.population_cost_min(&self.load_of(&self.flow_of(q)), i)
        }
    }

    /// `C = (1/D) Σ_{s,t} π(s,t) Σ_e w_e(t) c_e^s(w_e(t))`.
    pub fn average_cost(&self, w: &EdgeLoad) -> f64 {
        self.expected_edge_sum(w, |c, x| x * c.value(x)) / self.demand
    }

    fn expected_edge_sum(
        &self,
        w: &EdgeLoad,
        g: impl Fn(&crate::model::EdgeCost, f64) -> f64,
    ) -> f64 {
        let np = self.num_profiles();
        let mut total = 0.0;
        for s in 0..self.info.num_states() {
            for t in 0..np {
                let p = self.info.joint(s, t);
                if p == 0.0 {
                    continue;
                }
                let v: f64 = (0..self.num_edges())
                    .map(|e| g(self.costs.get(e, s), w.w[t][e]))
                    .sum();
                total += p * v;
            }
        }
        total
    }

    /// `J^i(q) = λ^i D - Σ_r min_{t^i} q^i_r(t^i)`.
    pub fn impact_of_information(&self, q: &StrategyProfile, i: usize) -> f64 {
        let qi = &q.q[i];
        let mins: f64 = (0..self.num_routes())
            .map(|r| qi.iter().map(|row| row[r]).fold(f64::INFINITY, f64::min))
            .sum();
        self.sizes[i] * self.demand - mins
    }

    /// `Ĵ^i(f) = D - Σ_r min_{t^i} f_r(t^i, t̂^{-i})`, checked to be the same
    /// for every choice of `t̂^{-i}`.
    pub fn impact_of_information_flow(&self, f: &RouteFlow, i: usize) -> Result<f64> {
        let values: Vec<f64> = self
            .info
            .profiles()
            .profiles_with(i, 0)
            .map(|base| self.flow_impact_at(f, i, base))
            .collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > FEAS_TOL {
            return Err(Error::Infeasible(format!(
                "impact of information of population {i} depends on the other types \
                 (spread {:.3e}); flow violates balance",
                hi - lo
            )));
        }
        Ok(values[0])
    }

    fn flow_impact_at(&self, f: &RouteFlow, i: usize, base: usize) -> f64 {
        let pr = self.info.profiles();
        let mins: f64 = (0..self.num_routes())
            .map(|r| {
                (0..pr.num_types(i))
                    .map(|ti| f.f[pr.with_type(base, i, ti)][r])
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        self.demand - mins
    }

    /// Largest violation of each constraint family of the flow polytope.
    pub fn flow_feasibility(&self, f: &RouteFlow) -> FlowFeasibility {
        let pr = self.info.profiles();
        let np = pr.count();
        let mut balance: f64 = 0.0;
        for i in 0..self.num_populations() {
            for t in 0..np {
                let t0 = pr.with_type(t, i, 0);
                let axis = pr.with_type(0, i, pr.type_of(t, i));
                for r in 0..self.num_routes() {
                    let lhs = f.f[t][r] - f.f[t0][r];
                    let rhs = f.f[axis][r] - f.f[0][r];
                    balance = balance.max((lhs - rhs).abs());
                }
            }
        }
        let demand =
            f.f.iter()
                .map(|row| (row.iter().sum::<f64>() - self.demand).abs())
                .fold(0.0, f64::max);
        let nonnegativity =
            f.f.iter()
                .flatten()
                .map(|x| (-x).max(0.0))
                .fold(0.0, f64::max);
        let information_impact = (0..self.num_populations())
            .map(|i| {
                pr.profiles_with(i, 0)
                    .map(|base| self.flow_impact_at(f, i, base) - self.sizes[i] * self.demand)
                    .fold(0.0, f64::max)
            })
            .collect();
        FlowFeasibility {
            balance,
            demand,
            nonnegativity,
            information_impact,
        }
    }

    /// Largest violation of `Σ_r q^i_r(t^i) = λ^i D` and `q ≥ 0`.
    pub fn strategy_violation(&self, q: &StrategyProfile) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, qi) in q.q.iter().enumerate() {
            for row in qi {
                let sum: f64 = row.iter().sum();
                worst = worst.max((sum - self.sizes[i] * self.demand).abs());
                for x in row {
                    worst = worst.max(-x);
                }
            }
        }
        worst
    }

    /// Describe every strategy profile inducing `f` and construct one.
    pub fn reconstruct_strategies(&self, f: &RouteFlow) -> Result<Reconstruction> {
        let feas = self.flow_feasibility(f);
        if let Some((family, amount)) = feas.worst(FEAS_TOL) {
            return Err(Error::Infeasible(format!(
                "route flow violates the {family} constraints by {amount:.3e}"
            )));
        }
        let pr = self.info.profiles();
        let ni = self.num_populations();
        let nr = self.num_routes();
        let hat = 0usize;
        let offset: Vec<Vec<Vec<f64>>> = (0..ni)
            .map(|i| {
                (0..pr.num_types(i))
                    .map(|ti| {
                        let t = pr.with_type(hat, i, ti);
                        (0..nr).map(|r| f.f[t][r] - f.f[hat][r]).collect()
                    })
                    .collect()
            })
            .collect();
        let chi_lower: Vec<Vec<f64>> = offset
            .iter()
            .map(|oi| {
                (0..nr)
                    .map(|r| {
                        oi.iter()
                            .map(|row| -row[r])
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .collect()
            })
            .collect();
        let totals = f.f[hat].clone();
        let slack: Vec<f64> = (0..nr)
            .map(|r| totals[r] - (0..ni).map(|i| chi_lower[i][r]).sum::<f64>())
            .collect();
        let slack_sum: f64 = slack.iter().sum();
        let gamma: Vec<f64> = if slack_sum.abs() > 0.0 {
            slack.iter().map(|s| s / slack_sum).collect()
        } else {
            vec![0.0; nr]
        };
        let chi: Vec<Vec<f64>> = (0..ni)
            .map(|i| {
                let spare = self.sizes[i] * self.demand - chi_lower[i].iter().sum::<f64>();
                (0..nr)
                    .map(|r| gamma[r] * spare + chi_lower[i][r])
                    .collect()
            })
            .collect();
        let q = (0..ni)
            .map(|i| {
                offset[i]
                    .iter()
                    .map(|row| row.iter().zip(&chi[i]).map(|(o, c)| o + c).collect())
                    .collect()
            })
            .collect();
        Ok(Reconstruction {
            reference_profile: hat,
            offset,
            chi_lower,
            chi_route_totals: totals,
            chi,
            profile: StrategyProfile { q },
        })
    }
}

/// `w_e(t) = Σ_{r∋e} f_r(t)`.
pub fn load_of(network: &Network, f: &RouteFlow) -> EdgeLoad {
    let w =
        f.f.iter()
            .map(|row| {
                let mut w = vec![0.0; network.num_edges()];
                for (r, edges) in network.routes().iter().enumerate() {
                    for &e in edges {
                        w[e] += row[r];
                    }
                }
                w
            })
            .collect();
    EdgeLoad { w }
}
