//! Networks, routes and state-dependent polynomial edge costs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How strictly an [`EdgeCost`] is validated.
///
/// Travel-time costs must be positive at zero load and strictly increasing.
/// `Weak` admits `c(0) = 0` and constant (non-decreasing) costs, which the
/// classic Pigou-style benchmarks need.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Positivity {
    #[default]
    Strict,
    Weak,
}

/// Polynomial edge cost `c(w) = b + a_1 w + ... + a_K w^K`.
///
/// `coeffs[0]` is the free-flow constant `b`, `coeffs[k]` multiplies `w^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCost {
    coeffs: Vec<f64>,
}

impl EdgeCost {
    /// Validated travel-time cost: `b > 0`, every `a_k >= 0`, some `a_k > 0`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        Self::with_positivity(coeffs, Positivity::Strict)
    }

    pub fn with_positivity(coeffs: Vec<f64>, positivity: Positivity) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidCost("empty coefficient list".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCost("non-finite coefficient".into()));
        }
        if coeffs[0] < 0.0 {
            return Err(Error::InvalidCost(format!(
                "negative free-flow constant {}",
                coeffs[0]
            )));
        }
        if let Some((k, a)) = coeffs.iter().enumerate().skip(1).find(|(_, a)| **a < 0.0) {
            return Err(Error::InvalidCost(format!(
                "negative coefficient {a} on w^{k}"
            )));
        }
        let increasing = coeffs.iter().skip(1).any(|a| *a > 0.0);
        if positivity == Positivity::Strict {
            if !increasing {
                return Err(Error::InvalidCost(
                    "cost is not strictly increasing in the load".into(),
                ));
            }
            if coeffs[0] <= 0.0 {
                return Err(Error::InvalidCost(
                    "cost must be positive at zero load".into(),
                ));
            }
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        Ok(Self { coeffs })
    }

    /// Affine cost `slope * w + constant`.
    pub fn affine(slope: f64, constant: f64) -> Result<Self> {
        Self::new(vec![constant, slope])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn constant(&self) -> f64 {
        self.coeffs[0]
    }

    fn check_load(load: f64) -> Result<()> {
        if load < 0.0 || load.is_nan() {
            Err(Error::Domain(format!(
                "load must be nonnegative, got {load}"
            )))
        } else {
            Ok(())
        }
    }

    pub fn eval(&self, load: f64) -> Result<f64> {
        Self::check_load(load)?;
        Ok(self.value(load))
    }

    pub fn integral(&self, load: f64) -> Result<f64> {
        Self::check_load(load)?;
        Ok(self.antiderivative(load))
    }

    pub fn marginal(&self, load: f64) -> Result<f64> {
        Self::check_load(load)?;
        Ok(self.marginal_value(load))
    }

    /// Horner evaluation without the domain check. Solvers call this on loads
    /// that are nonnegative up to roundoff.
    #[inline]
    pub fn value(&self, w: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * w + c)
    }

    /// `c'(w)`.
    #[inline]
    pub fn slope(&self, w: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * w + k as f64 * c)
    }

    /// `∫_0^w c(z) dz`.
    #[inline]
    pub fn antiderivative(&self, w: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, c)| acc * w + c / (k + 1) as f64)
            * w
    }

    /// `d/dw [w c(w)] = c(w) + w c'(w)`.
    #[inline]
    pub fn marginal_value(&self, w: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, c)| acc * w + (k + 1) as f64 * c)
    }

    /// The cost whose value is the marginal cost of this one.
    pub fn marginal_cost_function(&self) -> EdgeCost {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (k + 1) as f64 * c)
            .collect();
        EdgeCost { coeffs }
    }
}

/// Single origin-destination network given by explicit routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    edges: Vec<String>,
    /// Each route as a list of edge indices.
    routes: Vec<Vec<usize>>,
}

impl Network {
    pub fn new(edges: Vec<String>, routes: Vec<Vec<usize>>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidNetwork("no edges".into()));
        }
        for (i, e) in edges.iter().enumerate() {
            if edges[..i].contains(e) {
                return Err(Error::InvalidNetwork(format!("duplicate edge `{e}`")));
            }
        }
        if routes.is_empty() {
            return Err(Error::InvalidNetwork("no routes".into()));
        }
        for (r, route) in routes.iter().enumerate() {
            if route.is_empty() {
                return Err(Error::InvalidNetwork(format!("route {r} is empty")));
            }
            for (k, &e) in route.iter().enumerate() {
                if e >= edges.len() {
                    return Err(Error::InvalidNetwork(format!(
                        "route {r} references unknown edge index {e}"
                    )));
                }
                if route[..k].contains(&e) {
                    return Err(Error::InvalidNetwork(format!(
                        "route {r} uses edge `{}` twice",
                        edges[e]
                    )));
                }
            }
            let mut sorted = route.clone();
            sorted.sort_unstable();
            for (q, other) in routes[..r].iter().enumerate() {
                let mut o = other.clone();
                o.sort_unstable();
                if o == sorted {
                    return Err(Error::InvalidNetwork(format!(
                        "routes {q} and {r} are identical"
                    )));
                }
            }
        }
        Ok(Self { edges, routes })
    }

    /// Network of `n` parallel single-edge routes named `e1..en`.
    pub fn parallel(n: usize) -> Result<Self> {
        let edges = (1..=n).map(|k| format!("e{k}")).collect();
        let routes = (0..n).map(|k| vec![k]).collect();
        Self::new(edges, routes)
    }

    /// Build from edge names and routes written with edge names.
    pub fn from_named(edges: Vec<String>, routes: &[Vec<String>]) -> Result<Self> {
        let mut idx = Vec::with_capacity(routes.len());
        for (r, route) in routes.iter().enumerate() {
            let mut ids = Vec::with_capacity(route.len());
            for name in route {
                let e = edges.iter().position(|x| x == name).ok_or_else(|| {
                    Error::InvalidNetwork(format!("route {r} references unknown edge `{name}`"))
                })?;
                ids.push(e);
            }
            idx.push(ids);
        }
        Self::new(edges, idx)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_routes(&self) -> usize {
        self.routes.len()
    }

    pub fn edges(&self) -> &[String] {
        &self.edges
    }

    pub fn route(&self, r: usize) -> &[usize] {
        &self.routes[r]
    }

    pub fn routes(&self) -> &[Vec<usize>] {
        &self.routes
    }

    /// Route-edge incidence: `incidence()[e][r]` is true when `e ∈ r`.
    pub fn incidence(&self) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; self.routes.len()]; self.edges.len()];
        for (r, route) in self.routes.iter().enumerate() {
            for &e in route {
                m[e][r] = true;
            }
        }
        m
    }
}

/// Edge costs indexed by `[edge][state]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    costs: Vec<Vec<EdgeCost>>,
}

impl CostTable {
    pub fn new(costs: Vec<Vec<EdgeCost>>) -> Result<Self> {
        let states = costs.first().map(Vec::len).unwrap_or(0);
        if states == 0 {
            return Err(Error::InvalidCost("cost table is empty".into()));
        }
        if costs.iter().any(|row| row.len() != states) {
            return Err(Error::InvalidCost(
                "every edge needs one cost per state".into(),
            ));
        }
        Ok(Self { costs })
    }

    pub fn num_edges(&self) -> usize {
        self.costs.len()
    }

    pub fn num_states(&self) -> usize {
        self.costs[0].len()
    }

    #[inline]
    pub fn get(&self, edge: usize, state: usize) -> &EdgeCost {
        &self.costs[edge][state]
    }

    pub fn eval_cost(&self, edge: usize, state: usize, load: f64) -> Result<f64> {
        self.cost(edge, state)?.eval(load)
    }

    pub fn integral_cost(&self, edge: usize, state: usize, load: f64) -> Result<f64> {
        self.cost(edge, state)?.integral(load)
    }

    pub fn marginal_cost(&self, edge: usize, state: usize, load: f64) -> Result<f64> {
        self.cost(edge, state)?.marginal(load)
    }

    fn cost(&self, edge: usize, state: usize) -> Result<&EdgeCost> {
        self.costs
            .get(edge)
            .and_then(|row| row.get(state))
            .ok_or_else(|| Error::Domain(format!("no cost for edge {edge}, state {state}")))
    }

    /// Table of total marginal costs `c + w c'`.
    pub fn marginal_costs(&self) -> CostTable {
        CostTable {
            costs: self
                .costs
                .iter()
                .map(|row| row.iter().map(EdgeCost::marginal_cost_function).collect())
                .collect(),
        }
    }

    /// Costs of a single state, as a one-state table.
    pub fn restrict_to_state(&self, state: usize) -> CostTable {
        CostTable {
            costs: self
                .costs
                .iter()
                .map(|row| vec![row[state].clone()])
                .collect(),
        }
    }
}

/// Split of every edge cost into a degree-`k` monomial plus constant, with a
/// route-independent free-flow constant per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousDecomposition {
    /// Common degree of the load-dependent part.
    pub degree: usize,
    /// `monomial[e][s]`: coefficient of `w^degree`.
    pub monomial: Vec<Vec<f64>>,
    /// `constant[e][s]`: the `b_e^s` term.
    pub constant: Vec<Vec<f64>>,
    /// `route_constant[s]`: `Σ_{e∈r} b_e^s`, equal for every route.
    pub route_constant: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum HomogeneityRejection {
    /// Edge cost has more than one load-dependent monomial.
    NotMonomial { edge: usize, state: usize },
    /// Monomial degrees differ between edges or states.
    MixedDegree {
        expected: usize,
        found: usize,
        edge: usize,
        state: usize,
    },
    /// Free-flow route constants differ within a state.
    RouteConstants {
        state: usize,
        route_a: usize,
        route_b: usize,
        a: f64,
        b: f64,
    },
}

/// Exact-arithmetic check on decimal inputs leaves ~1 ulp noise; this is the
/// slack allowed on route-constant equality.
const ROUTE_CONSTANT_TOL: f64 = 1e-12;

pub fn check_homogeneous_condition(
    network: &Network,
    costs: &CostTable,
) -> std::result::Result<HomogeneousDecomposition, HomogeneityRejection> {
    let mut degree = None;
    let ne = costs.num_edges();
    let ns = costs.num_states();
    let mut monomial = vec![vec![0.0; ns]; ne];
    let mut constant = vec![vec![0.0; ns]; ne];
    for e in 0..ne {
        for s in 0..ns {
            let c = costs.get(e, s).coefficients();
            let nonzero: Vec<usize> = (1..c.len()).filter(|&k| c[k] != 0.0).collect();
            let k = match nonzero.as_slice() {
                [k] => *k,
                [] => {
                    // Constant cost: compatible with any degree, coefficient 0.
                    constant[e][s] = c[0];
                    continue;
                }
                _ => return Err(HomogeneityRejection::NotMonomial { edge: e, state: s }),
            };
            match degree {
                None => degree = Some(k),
                Some(d) if d != k => {
                    return Err(HomogeneityRejection::MixedDegree {
                        expected: d,
                        found: k,
                        edge: e,
                        state: s,
                    })
                }
                _ => {}
            }
            monomial[e][s] = c[k];
            constant[e][s] = c[0];
        }
    }
    let mut route_constant = vec![0.0; ns];
    for s in 0..ns {
        let sums: Vec<f64> = network
            .routes()
            .iter()
            .map(|route| route.iter().map(|&e| constant[e][s]).sum())
            .collect();
        for r in 1..sums.len() {
            let scale = 1.0 + sums[0].abs().max(sums[r].abs());
            if (sums[r] - sums[0]).abs() > ROUTE_CONSTANT_TOL * scale {
                return Err(HomogeneityRejection::RouteConstants {
                    state: s,
                    route_a: 0,
                    route_b: r,
                    a: sums[0],
                    b: sums[r],
                });
            }
        }
        route_constant[s] = sums[0];
    }
    Ok(HomogeneousDecomposition {
        degree: degree.unwrap_or(1),
        monomial,
        constant,
        route_constant,
    })
}
