//! JSON instance files.
//!
//! ```json
//! {
//!   "network": { "edges": ["e1", "e2"], "routes": [["e1"], ["e2"]] },
//!   "costs": { "e1": { "a": [20, 3], "n": [20, 1] }, "e2": [20, 2] },
//!   "information": {
//!     "states": ["a", "n"],
//!     "prior": [0.2, 0.8],
//!     "populations": [
//!       { "name": "TIS 1", "types": ["a", "n"], "accuracy": [[1, 0], [0, 1]] },
//!       { "name": "TIS 2", "types": ["a", "n"], "accuracy": [[0.5, 0.5], [0.5, 0.5]] }
//!     ]
//!   },
//!   "demand": 1,
//!   "sizes": [0.1, 0.9]
//! }
//! ```
//!
//! Cost coefficients are listed from the constant upward. An edge maps either
//! to one coefficient list shared by all states or to one list per state.
//! `accuracy[s][t]` is the probability of type `t` in state `s`. Instead of
//! accuracy tables, `information.common_prior` may give the joint
//! distribution as a flat list, state-major, then type profiles in
//! lexicographic order with population 1 most significant.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::information::{InformationStructure, PROB_TOL};
use crate::model::{CostTable, EdgeCost, Network, Positivity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub network: NetworkSpec,
    pub costs: BTreeMap<String, CostSpec>,
    /// `weak` admits zero free-flow constants.
    #[serde(default)]
    pub positivity: Positivity,
    pub information: InformationSpec,
    pub demand: f64,
    pub sizes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub edges: Vec<String>,
    pub routes: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostSpec {
    Shared(Vec<f64>),
    PerState(BTreeMap<String, Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InformationSpec {
    pub states: Vec<String>,
    pub prior: Vec<f64>,
    pub populations: Vec<PopulationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub common_prior: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub types: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<Vec<Vec<f64>>>,
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::instance("<document>", e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::instance("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn population_names(&self) -> Vec<String> {
        self.information
            .populations
            .iter()
            .enumerate()
            .map(|(i, p)| {
                p.name
                    .clone()
                    .unwrap_or_else(|| format!("population {}", i + 1))
            })
            .collect()
    }

    pub fn to_game(&self) -> Result<GameSpec> {
        let network = self.network()?;
        let costs = self.costs()?;
        let info = self.information()?;
        if !(self.demand.is_finite() && self.demand > 0.0) {
            return Err(Error::instance(
                "demand",
                format!("must be positive, got {}", self.demand),
            ));
        }
        self.check_sizes()?;
        GameSpec::new(network, costs, info, self.demand, self.sizes.clone())
            .map_err(|e| Error::instance("<game>", e.to_string()))
    }

    fn network(&self) -> Result<Network> {
        let edges = &self.network.edges;
        for (r, route) in self.network.routes.iter().enumerate() {
            if route.is_empty() {
                return Err(Error::instance(
                    format!("network.routes[{r}]"),
                    "route is empty",
                ));
            }
            if let Some(e) = route.iter().find(|e| !edges.contains(e)) {
                return Err(Error::instance(
                    format!("network.routes[{r}]"),
                    format!("unknown edge `{e}`"),
                ));
            }
        }
        Network::from_named(edges.clone(), &self.network.routes)
            .map_err(|e| Error::instance("network", e.to_string()))
    }

    fn costs(&self) -> Result<CostTable> {
        let states = &self.information.states;
        if let Some(name) = self.costs.keys().find(|k| !self.network.edges.contains(k)) {
            return Err(Error::instance(
                format!("costs.{name}"),
                "not an edge of the network",
            ));
        }
        let mut table = Vec::with_capacity(self.network.edges.len());
        for edge in &self.network.edges {
            let path = format!("costs.{edge}");
            let spec = self
                .costs
                .get(edge)
                .ok_or_else(|| Error::instance(&path, "missing cost"))?;
            let build = |path: &str, coeffs: &[f64]| {
                EdgeCost::with_positivity(coeffs.to_vec(), self.positivity)
                    .map_err(|e| Error::instance(path, e.to_string()))
            };
            let row = match spec {
                CostSpec::Shared(c) => {
                    let cost = build(&path, c)?;
                    vec![cost; states.len()]
                }
                CostSpec::PerState(map) => {
                    if let Some(s) = map.keys().find(|s| !states.contains(s)) {
                        return Err(Error::instance(format!("{path}.{s}"), "unknown state"));
                    }
                    states
                        .iter()
                        .map(|s| {
                            let p = format!("{path}.{s}");
                            let c = map
                                .get(s)
                                .ok_or_else(|| Error::instance(&p, "missing cost"))?;
                            build(&p, c)
                        })
                        .collect::<Result<Vec<_>>>()?
                }
            };
            table.push(row);
        }
        CostTable::new(table).map_err(|e| Error::instance("costs", e.to_string()))
    }

    fn information(&self) -> Result<InformationStructure> {
        let spec = &self.information;
        let ns = spec.states.len();
        if ns == 0 {
            return Err(Error::instance("information.states", "no states"));
        }
        if spec.prior.len() != ns {
            return Err(Error::instance(
                "information.prior",
                format!("{} entries for {ns} states", spec.prior.len()),
            ));
        }
        check_distribution("information.prior", &spec.prior)?;
        if spec.populations.is_empty() {
            return Err(Error::instance("information.populations", "no populations"));
        }
        for (i, p) in spec.populations.iter().enumerate() {
            if p.types.is_empty() {
                return Err(Error::instance(
                    format!("information.populations[{i}].types"),
                    "no types",
                ));
            }
        }
        let labels: Vec<Vec<String>> = spec.populations.iter().map(|p| p.types.clone()).collect();
        let wrap = |path: &str| {
            let path = path.to_string();
            move |e: Error| Error::instance(path, e.to_string())
        };
        if let Some(joint) = &spec.common_prior {
            if let Some(i) = spec.populations.iter().position(|p| p.accuracy.is_some()) {
                return Err(Error::instance(
                    format!("information.populations[{i}].accuracy"),
                    "not allowed together with common_prior",
                ));
            }
            return InformationStructure::from_common_prior(
                spec.states.clone(),
                spec.prior.clone(),
                labels,
                joint.clone(),
            )
            .map_err(wrap("information.common_prior"));
        }
        let mut tables = Vec::with_capacity(spec.populations.len());
        for (i, p) in spec.populations.iter().enumerate() {
            let path = format!("information.populations[{i}].accuracy");
            let table = p
                .accuracy
                .as_ref()
                .ok_or_else(|| Error::instance(&path, "missing (or give common_prior)"))?;
            if table.len() != ns {
                return Err(Error::instance(
                    &path,
                    format!("{} rows for {ns} states", table.len()),
                ));
            }
            for (s, row) in table.iter().enumerate() {
                let row_path = format!("{path}[{s}]");
                if row.len() != p.types.len() {
                    return Err(Error::instance(
                        row_path,
                        format!("{} entries for {} types", row.len(), p.types.len()),
                    ));
                }
                check_distribution(&row_path, row)?;
            }
            tables.push(table.clone());
        }
        InformationStructure::build_conditionally_independent(
            spec.states.clone(),
            spec.prior.clone(),
            labels,
            &tables,
        )
        .map_err(wrap("information"))
    }

    fn check_sizes(&self) -> Result<()> {
        let n = self.information.populations.len();
        if self.sizes.len() != n {
            return Err(Error::instance(
                "sizes",
                format!("{} entries for {n} populations", self.sizes.len()),
            ));
        }
        if let Some(i) = self.sizes.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::instance(
                format!("sizes[{i}]"),
                "must be non-negative",
            ));
        }
        let sum: f64 = self.sizes.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::instance(
                "sizes",
                format!("sum to {sum}, expected 1"),
            ));
        }
        Ok(())
    }
}

fn check_distribution(path: &str, p: &[f64]) -> Result<()> {
    if let Some(k) = p.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::instance(
            format!("{path}[{k}]"),
            format!("invalid probability {}", p[k]),
        ));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::instance(path, format!("sums to {sum}, expected 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_ROUTE: &str = r#"{
      "network": { "edges": ["e1", "e2"], "routes": [["e1"], ["e2"]] },
      "costs": { "e1": { "a": [20, 3], "n": [20, 1] }, "e2": [20, 2] },
      "information": {
        "states": ["a", "n"],
        "prior": [0.2, 0.8],
        "populations": [
          { "types": ["a", "n"], "accuracy": [[1, 0], [0, 1]] },
          { "types": ["a", "n"], "accuracy": [[0.5, 0.5], [0.5, 0.5]] }
        ]
      },
      "demand": 1,
      "sizes": [0.1, 0.9]
    }"#;

    fn path_of(e: Error) -> String {
        match e {
            Error::Instance { path, .. } => path,
            other => panic!("expected an instance error, got {other}"),
        }
    }

    #[test]
    fn parses_two_route_instance() {
        let inst = Instance::from_json(TWO_ROUTE).unwrap();
        let g = inst.to_game().unwrap();
        assert_eq!(g.num_routes(), 2);
        assert_eq!(g.num_populations(), 2);
        assert_eq!(g.costs().get(0, 0).value(1.0), 23.0);
        assert_eq!(g.costs().get(0, 1).value(1.0), 21.0);
        assert_eq!(g.costs().get(1, 1).value(1.0), 22.0);
        assert_eq!(inst.population_names()[1], "population 2");
    }

    #[test]
    fn round_trips() {
        let inst = Instance::from_json(TWO_ROUTE).unwrap();
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }

    #[test]
    fn errors_cite_paths() {
        let bad = TWO_ROUTE.replace("[0.2, 0.8]", "[0.2, 0.7]");
        assert_eq!(
            path_of(Instance::from_json(&bad).unwrap().to_game().unwrap_err()),
            "information.prior"
        );
        let bad = TWO_ROUTE.replace("[[0.5, 0.5], [0.5, 0.5]]", "[[0.5, 0.5], [0.5, 0.6]]");
        assert_eq!(
            path_of(Instance::from_json(&bad).unwrap().to_game().unwrap_err()),
            "information.populations[1].accuracy[1]"
        );
        let bad = TWO_ROUTE.replace("\"n\": [20, 1]", "\"x\": [20, 1]");
        assert_eq!(
            path_of(Instance::from_json(&bad).unwrap().to_game().unwrap_err()),
            "costs.e1.x"
        );
        let bad = TWO_ROUTE.replace("[[\"e1\"], [\"e2\"]]", "[[\"e1\"], [\"e3\"]]");
        assert_eq!(
            path_of(Instance::from_json(&bad).unwrap().to_game().unwrap_err()),
            "network.routes[1]"
        );
        let bad = TWO_ROUTE.replace("[0.1, 0.9]", "[0.1, 0.8]");
        assert_eq!(
            path_of(Instance::from_json(&bad).unwrap().to_game().unwrap_err()),
            "sizes"
        );
        assert_eq!(path_of(Instance::from_json("{").unwrap_err()), "<document>");
    }
}
