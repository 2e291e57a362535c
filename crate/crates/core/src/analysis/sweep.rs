use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pair_sizes;
use super::regime::{compute_thresholds, regime_report, Regime, Thresholds};
use crate::error::Result;
use crate::game::GameSpec;
use crate::solver::{solve_bwe, SolveOptions};

/// One grid point of a pairwise size sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda_i: f64,
    #[serde(with = "nullable")]
    pub potential: f64,
    #[serde(with = "nullable")]
    pub cost_i: f64,
    #[serde(with = "nullable")]
    pub cost_j: f64,
    #[serde(with = "nullable")]
    pub relative_value: f64,
    pub regime: Regime,
    #[serde(with = "nullable")]
    pub load_deviation: f64,
    /// `ok`, `uncertified`, `inconsistent` or `error: ...`.
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Shape checks over a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathtubVerdict {
    pub nonincreasing_before: bool,
    pub strictly_decreasing_before: bool,
    pub flat_middle: bool,
    pub nondecreasing_after: bool,
    pub value_nonincreasing: bool,
    /// Smallest potential on the grid.
    pub potential_min: f64,
    /// Grid interval where the potential is within `flat_tol` of its minimum.
    pub flat_interval: Option<(f64, f64)>,
    pub flat_tol: f64,
}

impl BathtubVerdict {
    pub fn holds(&self) -> bool {
        self.nonincreasing_before && self.flat_middle && self.nondecreasing_after
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub pair: (usize, usize),
    pub thresholds: Thresholds,
    pub rows: Vec<SweepRow>,
    pub verdict: BathtubVerdict,
}

/// Solve the game at every `λ^i` in `grid` (others fixed) in parallel.
pub fn bathtub_sweep(
    game: &GameSpec,
    i: usize,
    j: usize,
    grid: &[f64],
    options: &SolveOptions,
) -> Result<Sweep> {
    let thresholds = compute_thresholds(game, i, j, options)?;
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&x| sweep_point(game, i, j, x, &thresholds, options))
        .collect();
    let flat_tol = 2.0 * options.resolve(game).gap;
    let verdict = bathtub_verdict(&rows, &thresholds, flat_tol, 1e-6);
    Ok(Sweep {
        pair: (i, j),
        thresholds,
        rows,
        verdict,
    })
}

fn sweep_point(
    game: &GameSpec,
    i: usize,
    j: usize,
    x: f64,
    thresholds: &Thresholds,
    options: &SolveOptions,
) -> SweepRow {
    let run = || -> Result<SweepRow> {
        let g = game.with_sizes(pair_sizes(game, i, j, x)?)?;
        let eq = solve_bwe(&g, options)?;
        let rep = regime_report(&g, thresholds, &eq);
        let status = if !eq.certified {
            "uncertified"
        } else if !rep.consistent {
            "inconsistent"
        } else {
            "ok"
        };
        Ok(SweepRow {
            lambda_i: x,
            potential: eq.potential,
            cost_i: eq.population_costs[i],
            cost_j: eq.population_costs[j],
            relative_value: rep.relative_value,
            regime: rep.regime,
            load_deviation: rep.load_deviation,
            status: status.into(),
        })
    };
    run().unwrap_or_else(|e| SweepRow {
        lambda_i: x,
        potential: f64::NAN,
        cost_i: f64::NAN,
        cost_j: f64::NAN,
        relative_value: f64::NAN,
        regime: Regime::Degenerate,
        load_deviation: f64::NAN,
        status: format!("error: {e}"),
    })
}

/// Check the decreasing/flat/increasing shape of `Ψ` against the
/// thresholds. Grid points within one grid step of a threshold are exempt
/// from the flatness check.
pub fn bathtub_verdict(
    rows: &[SweepRow],
    thresholds: &Thresholds,
    flat_tol: f64,
    value_slack: f64,
) -> BathtubVerdict {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.potential.is_finite()).collect();
    let step = ok
        .windows(2)
        .map(|w| w[1].lambda_i - w[0].lambda_i)
        .fold(0.0, f64::max);
    let (lo, hi) = (thresholds.lower, thresholds.upper);
    let near = |x: f64| (x - lo).abs() < step || (x - hi).abs() < step;
    let pairs = || ok.windows(2).map(|w| (w[0], w[1]));
    let nonincreasing_before = pairs()
        .filter(|(a, b)| a.lambda_i < lo && b.lambda_i <= lo)
        .all(|(a, b)| b.potential <= a.potential + flat_tol);
    let strictly_decreasing_before = pairs()
        .filter(|(a, b)| a.lambda_i < lo && b.lambda_i < lo && !near(b.lambda_i))
        .all(|(a, b)| b.potential < a.potential);
    let nondecreasing_after = pairs()
        .filter(|(a, b)| a.lambda_i >= hi && b.lambda_i > hi)
        .all(|(a, b)| b.potential + flat_tol >= a.potential);
    let potential_min = ok.iter().map(|r| r.potential).fold(f64::INFINITY, f64::min);
    let flat_middle = ok
        .iter()
        .filter(|r| r.lambda_i >= lo && r.lambda_i <= hi && !near(r.lambda_i))
        .all(|r| r.potential <= potential_min + flat_tol);
    let value_nonincreasing =
        pairs().all(|(a, b)| b.relative_value <= a.relative_value + value_slack);
    let flat: Vec<f64> = ok
        .iter()
        .filter(|r| r.potential <= potential_min + flat_tol)
        .map(|r| r.lambda_i)
        .collect();
    BathtubVerdict {
        nonincreasing_before,
        strictly_decreasing_before,
        flat_middle,
        nondecreasing_after,
        value_nonincreasing,
        potential_min,
        flat_interval: flat.first().zip(flat.last()).map(|(a, b)| (*a, *b)),
        flat_tol,
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn grid_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `NaN` as JSON `null`.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}
