//! States, type spaces, the common prior and interim beliefs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validation tolerance on probabilities read from decimal literals.
pub const PROB_TOL: f64 = 1e-10;

/// Dense indexing of type profiles `t = (t^1, ..., t^I)` in lexicographic
/// order, population 0 most significant. Profile 0 is all-first-types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSpace {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    count: usize,
}

impl ProfileSpace {
    pub fn new(sizes: Vec<usize>) -> Self {
        let mut strides = vec![1; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        let count = sizes.iter().product();
        Self {
            sizes,
            strides,
            count,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn num_populations(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_types(&self, population: usize) -> usize {
        self.sizes[population]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Type of population `i` in profile `t`.
    #[inline]
    pub fn type_of(&self, t: usize, i: usize) -> usize {
        (t / self.strides[i]) % self.sizes[i]
    }

    /// Profile `t` with population `i`'s type replaced by `ti`.
    #[inline]
    pub fn with_type(&self, t: usize, i: usize, ti: usize) -> usize {
        t - self.type_of(t, i) * self.strides[i] + ti * self.strides[i]
    }

    pub fn decode(&self, t: usize) -> Vec<usize> {
        (0..self.sizes.len()).map(|i| self.type_of(t, i)).collect()
    }

    pub fn encode(&self, types: &[usize]) -> usize {
        types.iter().zip(&self.strides).map(|(t, s)| t * s).sum()
    }

    /// Profiles in which population `i` has type `ti`.
    pub fn profiles_with(&self, i: usize, ti: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.count).filter(move |&t| self.type_of(t, i) == ti)
    }
}

/// Common prior over states and type profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationStructure {
    states: Vec<String>,
    prior: Vec<f64>,
    type_labels: Vec<Vec<String>>,
    profiles: ProfileSpace,
    /// `joint[s * profiles.count() + t] = π(s, t)`.
    joint: Vec<f64>,
    /// `type_marginals[i][ti] = Pr(t^i)`.
    type_marginals: Vec<Vec<f64>>,
}

impl InformationStructure {
    /// Validate a directly specified common prior tensor.
    ///
    /// `joint` is laid out state-major, then profiles in [`ProfileSpace`]
    /// order.
    pub fn from_common_prior(
        states: Vec<String>,
        prior: Vec<f64>,
        type_labels: Vec<Vec<String>>,
        joint: Vec<f64>,
    ) -> Result<Self> {
        validate_distribution("prior", &prior)?;
        if states.len() != prior.len() {
            return Err(Error::InvalidInformation(format!(
                "{} states but {} prior entries",
                states.len(),
                prior.len()
            )));
        }
        if type_labels.is_empty() {
            return Err(Error::InvalidInformation("no populations".into()));
        }
        if let Some(i) = type_labels.iter().position(Vec::is_empty) {
            return Err(Error::InvalidInformation(format!(
                "population {i} has an empty type space"
            )));
        }
        let profiles = ProfileSpace::new(type_labels.iter().map(Vec::len).collect());
        let np = profiles.count();
        if joint.len() != states.len() * np {
            return Err(Error::InvalidInformation(format!(
                "common prior has {} entries, expected {}",
                joint.len(),
                states.len() * np
            )));
        }
        validate_distribution("common prior", &joint)?;
        for (s, theta) in prior.iter().enumerate() {
            let marginal: f64 = joint[s * np..(s + 1) * np].iter().sum();
            if (marginal - theta).abs() > PROB_TOL {
                return Err(Error::InvalidInformation(format!(
                    "common prior marginal {marginal} of state `{}` differs from prior {theta}",
                    states[s]
                )));
            }
        }
        let mut type_marginals: Vec<Vec<f64>> =
            profiles.sizes().iter().map(|&n| vec![0.0; n]).collect();
        for s in 0..states.len() {
            for t in 0..np {
                let p = joint[s * np + t];
                for (i, m) in type_marginals.iter_mut().enumerate() {
                    m[profiles.type_of(t, i)] += p;
                }
            }
        }
        for (i, m) in type_marginals.iter().enumerate() {
            if let Some(ti) = m.iter().position(|&p| p <= 0.0) {
                return Err(Error::InvalidInformation(format!(
                    "type `{}` of population {i} has zero probability",
                    type_labels[i][ti]
                )));
            }
        }
        Ok(Self {
            states,
            prior,
            type_labels,
            profiles,
            joint,
            type_marginals,
        })
    }

    /// `π(s, t) = θ(s) ∏_i p_i(t^i | s)` from per-population accuracy tables
    /// `accuracy[i][s][ti]`.
    pub fn build_conditionally_independent(
        states: Vec<String>,
        prior: Vec<f64>,
        type_labels: Vec<Vec<String>>,
        accuracy: &[Vec<Vec<f64>>],
    ) -> Result<Self> {
        if accuracy.len() != type_labels.len() {
            return Err(Error::InvalidInformation(format!(
                "{} accuracy tables for {} populations",
                accuracy.len(),
                type_labels.len()
            )));
        }
        for (i, table) in accuracy.iter().enumerate() {
            if table.len() != states.len() {
                return Err(Error::InvalidInformation(format!(
                    "accuracy table of population {i} has {} rows, expected {}",
                    table.len(),
                    states.len()
                )));
            }
            for (s, row) in table.iter().enumerate() {
                if row.len() != type_labels[i].len() {
                    return Err(Error::InvalidInformation(format!(
                        "accuracy row {s} of population {i} has {} entries, expected {}",
                        row.len(),
                        type_labels[i].len()
                    )));
                }
                validate_distribution(&format!("accuracy row {s} of population {i}"), row)?;
            }
        }
        let profiles = ProfileSpace::new(type_labels.iter().map(Vec::len).collect());
        let np = profiles.count();
        let mut joint = vec![0.0; states.len() * np];
        for (s, theta) in prior.iter().enumerate().take(states.len()) {
            for t in 0..np {
                joint[s * np + t] = accuracy
                    .iter()
                    .enumerate()
                    .fold(*theta, |p, (i, table)| p * table[s][profiles.type_of(t, i)]);
            }
        }
        Self::from_common_prior(states, prior, type_labels, joint)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn type_labels(&self) -> &[Vec<String>] {
        &self.type_labels
    }

    pub fn num_populations(&self) -> usize {
        self.type_labels.len()
    }

    pub fn profiles(&self) -> &ProfileSpace {
        &self.profiles
    }

    /// `π(s, t)`.
    #[inline]
    pub fn joint(&self, s: usize, t: usize) -> f64 {
        self.joint[s * self.profiles.count() + t]
    }

    pub fn joint_tensor(&self) -> &[f64] {
        &self.joint
    }

    /// `Pr(t^i)`.
    #[inline]
    pub fn type_probability(&self, i: usize, ti: usize) -> f64 {
        self.type_marginals[i][ti]
    }

    pub fn type_marginals(&self) -> &[Vec<f64>] {
        &self.type_marginals
    }

    /// `Σ_s π(s, t)`.
    pub fn profile_probability(&self, t: usize) -> f64 {
        (0..self.num_states()).map(|s| self.joint(s, t)).sum()
    }

    pub fn interim_beliefs(&self) -> Belief {
        let np = self.profiles.count();
        let ns = self.num_states();
        let rows = (0..self.num_populations())
            .map(|i| {
                (0..self.profiles.num_types(i))
                    .map(|ti| {
                        let pr = self.type_probability(i, ti);
                        let mut row = vec![0.0; ns * np];
                        for t in self.profiles.profiles_with(i, ti) {
                            for s in 0..ns {
                                row[s * np + t] = self.joint(s, t) / pr;
                            }
                        }
                        row
                    })
                    .collect()
            })
            .collect();
        Belief { profiles: np, rows }
    }

    /// True when population `j`'s type is independent of the state and of
    /// the other populations' types: `π(s,t) = Pr(t^j) Pr(s, t^{-j})`.
    pub fn is_uninformed(&self, j: usize) -> bool {
        let nj = self.profiles.num_types(j);
        if nj == 1 {
            return true;
        }
        let np = self.profiles.count();
        for s in 0..self.num_states() {
            for t in 0..np {
                if self.profiles.type_of(t, j) != 0 {
                    continue;
                }
                let others: f64 = (0..nj)
                    .map(|tj| self.joint(s, self.profiles.with_type(t, j, tj)))
                    .sum();
                for tj in 0..nj {
                    let p = self.joint(s, self.profiles.with_type(t, j, tj));
                    if (p - self.type_probability(j, tj) * others).abs() > PROB_TOL {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn validate_distribution(what: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidInformation(format!("{what} is empty")));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidInformation(format!(
            "{what} has invalid probability {x}"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidInformation(format!(
            "{what} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Interim beliefs `μ^i(s, t^{-i} | t^i)`.
///
/// Each row is dense over `(state, full profile)`; entries whose profile does
/// not carry type `t^i` for population `i` are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    profiles: usize,
    rows: Vec<Vec<Vec<f64>>>,
}

impl Belief {
    /// `μ^i(s, t^{-i} | t^i)` where `t` is the full profile.
    pub fn get(&self, i: usize, ti: usize, s: usize, t: usize) -> f64 {
        self.rows[i][ti][s * self.profiles + t]
    }

    pub fn row(&self, i: usize, ti: usize) -> &[f64] {
        &self.rows[i][ti]
    }
}
