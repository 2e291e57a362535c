//! Regimes, value of information, adoption rates and inefficiency.

mod adoption;
mod inefficiency;
mod regime;
mod sweep;

pub use adoption::{
    compute_adoption_set, verify_adoption_equilibrium, AdoptionReport, AdoptionSet, AdoptionVerdict,
};
pub use inefficiency::{
    homogeneous_spot_check, inefficiency_report, HomogeneousCheck, SocialReport,
};
pub use regime::{
    classify_regime, compute_thresholds, regime_report_for, relative_value, Regime, RegimeReport,
    RelativeValue, Thresholds,
};
pub use sweep::{bathtub_sweep, bathtub_verdict, grid_points, BathtubVerdict, Sweep, SweepRow};

use crate::error::{Error, Result};
use crate::game::GameSpec;

/// Width of the edge-load band around `w†` in the threshold and adoption
/// LPs, relative to the demand.
pub const LOAD_BAND_REL: f64 = 1e-7;

/// Step in `λ` for the directional-derivative check.
pub const DIRECTIONAL_EPS: f64 = 1e-4;

/// Sizes with `λ^i = x`, `λ^j = 1 - |λ^{-ij}| - x` and the rest unchanged.
pub fn pair_sizes(game: &GameSpec, i: usize, j: usize, x: f64) -> Result<Vec<f64>> {
    check_pair(game, i, j)?;
    let rest: f64 = game
        .sizes()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i && *k != j)
        .map(|(_, l)| l)
        .sum();
    let mut sizes = game.sizes().to_vec();
    sizes[i] = x;
    sizes[j] = 1.0 - rest - x;
    if sizes[j] < 0.0 && sizes[j] > -1e-15 {
        sizes[j] = 0.0;
    }
    Ok(sizes)
}

/// `|λ^{-ij}|`.
pub fn rest_size(game: &GameSpec, i: usize, j: usize) -> f64 {
    game.sizes()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i && *k != j)
        .map(|(_, l)| l)
        .sum()
}

fn check_pair(game: &GameSpec, i: usize, j: usize) -> Result<()> {
    let n = game.num_populations();
    if i >= n || j >= n || i == j {
        return Err(Error::InvalidGame(format!(
            "invalid population pair ({}, {}) for {n} populations",
            i + 1,
            j + 1
        )));
    }
    Ok(())
}
