use serde::{Deserialize, Serialize};

use super::adoption::AdoptionSet;
use super::pair_sizes;
use crate::error::Result;
use crate::game::GameSpec;
use crate::model::{check_homogeneous_condition, HomogeneityRejection};
use crate::solver::{solve_bwe, solve_full_info_optimum, solve_social_optimum, SolveOptions};

/// Tolerance on `C*/C^opt = 1` under the homogeneous condition.
pub const HOMOGENEOUS_RATIO_TOL: f64 = 5e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialReport {
    pub sizes: Vec<f64>,
    /// Equilibrium average cost `C*(λ)`.
    pub c_star: f64,
    pub c_opt: f64,
    pub c_so: f64,
    /// `C* / C^opt`.
    pub ratio_opt: f64,
    /// `C* / C^so`.
    pub ratio_so: f64,
    pub homogeneous: bool,
    pub homogeneous_degree: Option<usize>,
    pub rejection: Option<HomogeneityRejection>,
    /// `C^so ≤ C^opt ≤ C*` within `tolerance`.
    pub ordering_holds: bool,
    /// Under the homogeneous condition, `|ratio_opt - 1| ≤ 5e-4`.
    pub ratio_one: Option<bool>,
    pub tolerance: f64,
    pub certified: bool,
}

pub fn inefficiency_report(game: &GameSpec, options: &SolveOptions) -> Result<SocialReport> {
    let eq = solve_bwe(game, options)?;
    let opt = solve_social_optimum(game, options)?;
    let so = solve_full_info_optimum(game, options)?;
    let c_star = eq.average_cost;
    let tolerance = 2.0 * eq.tolerances.cost;
    let verdict = check_homogeneous_condition(game.network(), game.costs());
    let ratio_opt = c_star / opt.c_opt;
    let (homogeneous, homogeneous_degree, rejection) = match verdict {
        Ok(dec) => (true, Some(dec.degree), None),
        Err(r) => (false, None, Some(r)),
    };
    let ratio_one = homogeneous.then(|| (ratio_opt - 1.0).abs() <= HOMOGENEOUS_RATIO_TOL);
    if ratio_one == Some(false) {
        log::warn!("homogeneous costs but C*/C^opt = {ratio_opt}");
    }
    Ok(SocialReport {
        sizes: game.sizes().to_vec(),
        c_star,
        c_opt: opt.c_opt,
        c_so: so.c_so,
        ratio_opt,
        ratio_so: c_star / so.c_so,
        homogeneous,
        homogeneous_degree,
        rejection,
        ordering_holds: so.c_so <= opt.c_opt + tolerance && opt.c_opt <= c_star + tolerance,
        ratio_one,
        tolerance,
        certified: eq.certified && opt.modified.certified,
    })
}

/// Ratio and argmin checks along a pairwise size grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousCheck {
    pub lambdas: Vec<f64>,
    pub ratios: Vec<f64>,
    pub c_star: Vec<f64>,
    pub max_ratio_error: f64,
    /// Grid points where `C*` is within tolerance of its grid minimum.
    pub argmin: Vec<f64>,
    /// Every argmin point lies in the adoption set.
    pub argmin_in_adoption_set: bool,
}

pub fn homogeneous_spot_check(
    game: &GameSpec,
    i: usize,
    j: usize,
    grid: &[f64],
    adoption: &AdoptionSet,
    options: &SolveOptions,
) -> Result<HomogeneousCheck> {
    let mut ratios = Vec::with_capacity(grid.len());
    let mut c_star = Vec::with_capacity(grid.len());
    let mut tol: f64 = 0.0;
    for &x in grid {
        let g = game.with_sizes(pair_sizes(game, i, j, x)?)?;
        let eq = solve_bwe(&g, options)?;
        let opt = solve_social_optimum(&g, options)?;
        tol = tol.max(eq.tolerances.cost);
        ratios.push(eq.average_cost / opt.c_opt);
        c_star.push(eq.average_cost);
    }
    let min = c_star.iter().copied().fold(f64::INFINITY, f64::min);
    let mut argmin = Vec::new();
    let mut inside = true;
    for (&x, &c) in grid.iter().zip(&c_star) {
        if c <= min + tol {
            argmin.push(x);
            inside &= adoption.contains(game, &pair_sizes(game, i, j, x)?)?;
        }
    }
    Ok(HomogeneousCheck {
        lambdas: grid.to_vec(),
        max_ratio_error: ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max),
        ratios,
        c_star,
        argmin,
        argmin_in_adoption_set: inside,
    })
}
