use serde::{Deserialize, Serialize};

use crate::game::{GameSpec, StrategyProfile};

/// KKT residuals of a strategy profile for the potential program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktCertificate {
    /// `μ^{t^i} = min_r ∂Φ/∂q^i_r(t^i)`.
    pub mu: Vec<Vec<f64>>,
    /// `ν^{t^i}_r = ∂Φ/∂q^i_r(t^i) - μ^{t^i}`.
    pub nu: Vec<Vec<Vec<f64>>>,
    /// `max |∇Φ - μ - ν|`.
    pub stationarity: f64,
    /// `max ν_r q_r`.
    pub complementarity: f64,
    /// `max(0, -min ν)`.
    pub dual_feasibility: f64,
    /// Largest violation of the demand and nonnegativity constraints on `q`.
    pub primal_feasibility: f64,
}

impl KktCertificate {
    pub fn max_violation(&self) -> f64 {
        self.stationarity
            .max(self.complementarity)
            .max(self.dual_feasibility)
            .max(self.primal_feasibility)
    }
}

/// Multipliers and KKT residuals at `q`.
pub fn certify_kkt(game: &GameSpec, q: &StrategyProfile) -> KktCertificate {
    let grad = game.potential_gradient(q);
    let mut mu = Vec::with_capacity(grad.len());
    let mut nu = Vec::with_capacity(grad.len());
    let (mut stationarity, mut complementarity, mut dual): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (gi, qi) in grad.iter().zip(&q.q) {
        let mut mu_i = Vec::with_capacity(gi.len());
        let mut nu_i = Vec::with_capacity(gi.len());
        for (g, qr) in gi.iter().zip(qi) {
            let m = g.iter().copied().fold(f64::INFINITY, f64::min);
            let n: Vec<f64> = g.iter().map(|x| x - m).collect();
            for ((gr, nr), x) in g.iter().zip(&n).zip(qr) {
                stationarity = stationarity.max((gr - m - nr).abs());
                complementarity = complementarity.max((nr * x).abs());
                dual = dual.max(-nr);
            }
            mu_i.push(m);
            nu_i.push(n);
        }
        mu.push(mu_i);
        nu.push(nu_i);
    }
    KktCertificate {
        mu,
        nu,
        stationarity,
        complementarity,
        dual_feasibility: dual,
        primal_feasibility: game.strategy_violation(q),
    }
}
