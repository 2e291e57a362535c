use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bwe_core::analysis::{
    bathtub_sweep, compute_adoption_set, compute_thresholds, grid_points, inefficiency_report,
    pair_sizes, regime_report_for, relative_value, verify_adoption_equilibrium, AdoptionReport,
    AdoptionVerdict, RegimeReport, RelativeValue, SocialReport, Sweep, Thresholds,
};
use bwe_core::solver::{solve_bwe, EquilibriumReport, SolveOptions};
use bwe_core::{GameSpec, Instance};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "bwe",
    version,
    about = "Bayesian Wardrop equilibria with heterogeneous information"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the equilibrium at the instance sizes.
    Solve(Common),
    /// Regime thresholds of a population pair.
    Thresholds(PairArgs),
    /// Pairwise size sweep: potential, costs, value of information, regime.
    Sweep(GridArgs),
    /// Equilibrium adoption rates.
    Adoption(OptionalGrid),
    /// Equilibrium, planner and fully informed average costs.
    Social(OptionalGrid),
}

#[derive(Args)]
struct Common {
    /// Instance file (JSON).
    instance: PathBuf,
    /// Output directory for report.json and, for grid commands, sweep.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Absolute gap tolerance.
    #[arg(long)]
    tol_gap: Option<f64>,
    /// Edge-load tolerance.
    #[arg(long)]
    tol_load: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    max_iterations: usize,
    /// Number of deterministic starting points.
    #[arg(long, default_value_t = 1)]
    starts: u64,
    /// Worker threads for grid commands.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the instance sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<f64>>,
}

#[derive(Args)]
struct PairArgs {
    #[command(flatten)]
    common: Common,
    /// Population pair, 1-based.
    #[arg(long, num_args = 2, value_names = ["I", "J"], default_values_t = [1, 2])]
    pair: Vec<usize>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// `a:b:n`, n points from a to b inclusive.
    #[arg(long, default_value = "0:1:51")]
    grid: Grid,
}

#[derive(Args)]
struct OptionalGrid {
    #[command(flatten)]
    pair: PairArgs,
    /// `a:b:n`, also evaluate n pair sizes from a to b inclusive.
    #[arg(long)]
    grid: Option<Grid>,
}

#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected a:b:n, got `{s}`"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        let (a, b) = (num(a)?, num(b)?);
        let n: usize = n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?;
        if n == 0 {
            return Err("grid needs at least one point".into());
        }
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
            return Err(format!(
                "grid bounds must satisfy 0 <= a <= b <= 1, got {a}:{b}"
            ));
        }
        Ok(Grid(grid_points(a, b, n)))
    }
}

struct Loaded {
    instance: Instance,
    game: GameSpec,
    options: SolveOptions,
}

impl Common {
    fn load(&self) -> Result<Loaded> {
        let mut instance = Instance::load(&self.instance)
            .with_context(|| format!("loading {}", self.instance.display()))?;
        if let Some(sizes) = &self.sizes {
            instance.sizes = sizes.clone();
        }
        let game = instance
            .to_game()
            .with_context(|| format!("validating {}", self.instance.display()))?;
        let options = SolveOptions {
            max_iterations: self.max_iterations,
            gap_tol: self.tol_gap,
            load_tol: self.tol_load,
            ..SolveOptions::default()
        };
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        Ok(Loaded {
            instance,
            game,
            options,
        })
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            b = b.num_threads(j.max(1));
        }
        Ok(b.build()?)
    }
}

impl PairArgs {
    fn pair(&self, game: &GameSpec) -> Result<(usize, usize)> {
        let (i, j) = (self.pair[0], self.pair[1]);
        let n = game.num_populations();
        if i == 0 || j == 0 || i > n || j > n || i == j {
            bail!("--pair {i} {j}: need two distinct populations in 1..={n}");
        }
        Ok((i - 1, j - 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub instance: Option<String>,
    pub report: EquilibriumReport,
    /// Edge loads from every start; index 0 is `report`.
    pub starts: Vec<StartSummary>,
    /// Largest edge-load deviation between starts.
    pub start_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub seed: u64,
    pub potential: f64,
    pub gap: f64,
    pub certified: bool,
    pub load_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOutput {
    pub instance: Option<String>,
    pub thresholds: Thresholds,
    pub regime: RegimeReport,
    pub relative_value: RelativeValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdoptionOutput {
    pub instance: Option<String>,
    pub adoption: AdoptionReport,
    pub verdict: AdoptionVerdict,
    pub member: bool,
    pub grid: Vec<MembershipRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipRow {
    pub lambda_i: f64,
    pub member: bool,
    pub equilibrium: bool,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialOutput {
    pub instance: Option<String>,
    pub report: SocialReport,
    pub grid: Vec<SocialRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialRow {
    pub lambda_i: f64,
    pub report: Option<SocialReport>,
    pub status: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// `Ok(certified)`.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(c) => solve(&c),
        Command::Thresholds(p) => thresholds(&p),
        Command::Sweep(g) => sweep(&g),
        Command::Adoption(g) => adoption(&g),
        Command::Social(g) => social(&g),
    }
}

fn write_json<T: Serialize>(dir: &Path, value: &T) -> Result<()> {
    let path = dir.join("report.json");
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_csv(dir: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let path = dir.join("sweep.csv");
    let mut text = header.join(",") + "\n";
    for row in rows {
        text += &row.join(",");
        text.push('\n');
    }
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// Fixed-point decimal with 12 significant digits.
fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return "NaN".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).clamp(0, 40) as usize;
    let s = format!("{x:.decimals$}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        "0".into()
    } else {
        s
    }
}

fn solve(c: &Common) -> Result<bool> {
    let Loaded {
        instance,
        game,
        options,
    } = c.load()?;
    let seeds: Vec<u64> = (0..c.starts.max(1)).collect();
    let reports = c.pool()?.install(|| {
        seeds
            .par_iter()
            .map(|&s| solve_bwe(&game, &options.with_seed(s)))
            .collect::<bwe_core::Result<Vec<_>>>()
    })?;
    let base = &reports[0];
    let starts: Vec<StartSummary> = seeds
        .iter()
        .zip(&reports)
        .map(|(&seed, r)| StartSummary {
            seed,
            potential: r.potential,
            gap: r.gap,
            certified: r.certified,
            load_deviation: game.load_deviation(&r.w, &base.w),
        })
        .collect();
    let start_deviation = starts.iter().map(|s| s.load_deviation).fold(0.0, f64::max);
    let certified = starts.iter().all(|s| s.certified) && start_deviation <= base.tolerances.load;
    print_solve(&instance, &game, base, start_deviation, starts.len());
    let out = SolveOutput {
        instance: instance.name.clone(),
        report: base.clone(),
        starts,
        start_deviation,
    };
    write_json(&c.out, &out)?;
    Ok(certified)
}

fn print_solve(inst: &Instance, game: &GameSpec, r: &EquilibriumReport, dev: f64, starts: usize) {
    let mut s = String::new();
    let names = inst.population_names();
    let _ = writeln!(s, "sizes {:?}", r.sizes);
    let _ = writeln!(s, "potential {:.12}", r.potential);
    let _ = writeln!(s, "average cost {:.12}", r.average_cost);
    for (i, c) in r.population_costs.iter().enumerate() {
        let _ = writeln!(s, "cost of {} {:.12}", names[i], c);
    }
    let profiles = game.info().profiles();
    for t in 0..profiles.count() {
        let _ = writeln!(s, "load at profile {:?} {:?}", profiles.decode(t), r.w.w[t]);
    }
    let _ = writeln!(
        s,
        "gap {:.3e} (tol {:.3e}), passes {}, max cost slack {:.3e}, kkt violation {:.3e}",
        r.gap,
        r.tolerances.gap,
        r.iterations,
        r.max_cost_slack,
        r.kkt.max_violation()
    );
    if starts > 1 {
        let _ = writeln!(s, "load deviation across {starts} starts {dev:.3e}");
    }
    let _ = writeln!(
        s,
        "{}",
        if r.certified {
            "certified"
        } else {
            "NOT certified"
        }
    );
    print!("{s}");
}

fn thresholds(p: &PairArgs) -> Result<bool> {
    let Loaded {
        instance,
        game,
        options,
    } = p.common.load()?;
    let (i, j) = p.pair(&game)?;
    let th = compute_thresholds(&game, i, j, &options)?;
    let regime = regime_report_for(&game, &th, &options)?;
    let value = relative_value(&game, i, j, &options)?;
    println!("lower threshold {}", sig12(th.lower));
    println!("upper threshold {}", sig12(th.upper));
    println!("regime {} at sizes {:?}", regime.regime, regime.sizes);
    println!("relative value {}", sig12(value.value));
    let certified = regime.certified && regime.consistent && th.converged;
    write_json(
        &p.common.out,
        &ThresholdOutput {
            instance: instance.name,
            thresholds: th,
            regime,
            relative_value: value,
        },
    )?;
    Ok(certified)
}

fn sweep(g: &GridArgs) -> Result<bool> {
    let c = &g.pair.common;
    let Loaded {
        instance,
        game,
        options,
    } = c.load()?;
    let (i, j) = g.pair.pair(&game)?;
    let sw: Sweep = c
        .pool()?
        .install(|| bathtub_sweep(&game, i, j, &g.grid.0, &options))?;
    let rows: Vec<Vec<String>> = sw
        .rows
        .iter()
        .map(|r| {
            vec![
                sig12(r.lambda_i),
                sig12(r.potential),
                sig12(r.cost_i),
                sig12(r.cost_j),
                sig12(r.relative_value),
                r.regime.to_string(),
                sig12(r.load_deviation),
                csv_field(&r.status),
            ]
        })
        .collect();
    write_csv(
        &c.out,
        &[
            "lambda_i", "Psi", "C_i", "C_j", "V_ij", "regime", "load_dev", "status",
        ],
        &rows,
    )?;
    println!(
        "thresholds [{}, {}], bathtub {}",
        sig12(sw.thresholds.lower),
        sig12(sw.thresholds.upper),
        if sw.verdict.holds() {
            "holds"
        } else {
            "violated"
        }
    );
    let ok = sw.rows.iter().all(|r| r.is_ok());
    let out = serde_json::json!({ "instance": instance.name, "sweep": sw });
    write_json(&c.out, &out)?;
    Ok(ok)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn adoption(g: &OptionalGrid) -> Result<bool> {
    let c = &g.pair.common;
    let Loaded {
        instance,
        game,
        options,
    } = c.load()?;
    let report = compute_adoption_set(&game, &options)?;
    let verdict = verify_adoption_equilibrium(&game, &options)?;
    let member = report.set.contains(&game, game.sizes())?;
    let names = instance.population_names();
    for (k, (lo, hi)) in report.ranges.iter().enumerate() {
        println!(
            "{} adoption range [{}, {}]",
            names[k],
            sig12(*lo),
            sig12(*hi)
        );
    }
    println!(
        "sizes {:?}: {} the adoption set, {}",
        game.sizes(),
        if member { "inside" } else { "outside" },
        if verdict.equilibrium {
            "adoption equilibrium"
        } else {
            "not an adoption equilibrium"
        }
    );
    let mut grid = Vec::new();
    if let Some(points) = &g.grid {
        let (i, j) = g.pair.pair(&game)?;
        grid = c.pool()?.install(|| {
            points
                .0
                .par_iter()
                .map(|&x| membership_row(&game, &report, i, j, x, &options))
                .collect()
        });
        let rows: Vec<Vec<String>> = grid
            .iter()
            .map(|r: &MembershipRow| {
                vec![
                    sig12(r.lambda_i),
                    r.member.to_string(),
                    r.equilibrium.to_string(),
                    csv_field(&r.status),
                ]
            })
            .collect();
        write_csv(
            &c.out,
            &["lambda_i", "member", "equilibrium", "status"],
            &rows,
        )?;
    }
    let certified =
        verdict.certified && report.set.converged && grid.iter().all(|r| r.status == "ok");
    write_json(
        &c.out,
        &AdoptionOutput {
            instance: instance.name,
            adoption: report,
            verdict,
            member,
            grid,
        },
    )?;
    Ok(certified)
}

fn membership_row(
    game: &GameSpec,
    report: &AdoptionReport,
    i: usize,
    j: usize,
    x: f64,
    options: &SolveOptions,
) -> MembershipRow {
    let run = || -> bwe_core::Result<(bool, bool, bool)> {
        let sizes = pair_sizes(game, i, j, x)?;
        let member = report.set.contains(game, &sizes)?;
        let v = verify_adoption_equilibrium(&game.with_sizes(sizes)?, options)?;
        Ok((member, v.equilibrium, v.certified))
    };
    match run() {
        Ok((member, equilibrium, certified)) => MembershipRow {
            lambda_i: x,
            member,
            equilibrium,
            status: if certified { "ok" } else { "uncertified" }.into(),
        },
        Err(e) => MembershipRow {
            lambda_i: x,
            member: false,
            equilibrium: false,
            status: format!("error: {e}"),
        },
    }
}

fn social(g: &OptionalGrid) -> Result<bool> {
    let c = &g.pair.common;
    let Loaded {
        instance,
        game,
        options,
    } = c.load()?;
    let report = inefficiency_report(&game, &options)?;
    println!("C* {}", sig12(report.c_star));
    println!("C^opt {}", sig12(report.c_opt));
    println!("C^so {}", sig12(report.c_so));
    println!("C*/C^opt {}", sig12(report.ratio_opt));
    println!("C*/C^so {}", sig12(report.ratio_so));
    let mut grid = Vec::new();
    if let Some(points) = &g.grid {
        let (i, j) = g.pair.pair(&game)?;
        grid = c.pool()?.install(|| {
            points
                .0
                .par_iter()
                .map(|&x| {
                    let run = || -> bwe_core::Result<SocialReport> {
                        inefficiency_report(
                            &game.with_sizes(pair_sizes(&game, i, j, x)?)?,
                            &options,
                        )
                    };
                    match run() {
                        Ok(r) => SocialRow {
                            lambda_i: x,
                            status: if r.certified { "ok" } else { "uncertified" }.into(),
                            report: Some(r),
                        },
                        Err(e) => SocialRow {
                            lambda_i: x,
                            report: None,
                            status: format!("error: {e}"),
                        },
                    }
                })
                .collect()
        });
        let rows: Vec<Vec<String>> = grid
            .iter()
            .map(|r: &SocialRow| {
                let v = |f: fn(&SocialReport) -> f64| sig12(r.report.as_ref().map_or(f64::NAN, f));
                vec![
                    sig12(r.lambda_i),
                    v(|r| r.c_star),
                    v(|r| r.c_opt),
                    v(|r| r.c_so),
                    v(|r| r.ratio_opt),
                    v(|r| r.ratio_so),
                    csv_field(&r.status),
                ]
            })
            .collect();
        write_csv(
            &c.out,
            &[
                "lambda_i",
                "C_star",
                "C_opt",
                "C_so",
                "ratio_opt",
                "ratio_so",
                "status",
            ],
            &rows,
        )?;
    }
    let certified = report.certified && grid.iter().all(|r| r.status == "ok");
    write_json(
        &c.out,
        &SocialOutput {
            instance: instance.name,
            report,
            grid,
        },
    )?;
    Ok(certified)
}
