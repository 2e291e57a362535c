//! Dense bounded-variable primal simplex (two-phase, Bland's rule).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const REDUCED_COST_TOL: f64 = 1e-9;
const RATIO_TIE_TOL: f64 = 1e-12;
const REFACTOR_EVERY: usize = 50;

/// `min c·x` s.t. `A_eq x = b_eq`, `A_in x ≤ b_in`, `l ≤ x ≤ u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_in: Vec<Vec<f64>>,
    pub b_in: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// `n` variables in `[0, ∞)`, zero objective, no rows.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            a_in: Vec::new(),
            b_in: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.a_eq.len() + self.a_in.len()
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.a_in.push(row);
        self.b_in.push(rhs);
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) {
        self.a_in.push(row.into_iter().map(|a| -a).collect());
        self.b_in.push(-rhs);
    }

    /// Sparse variants taking `(index, coefficient)` pairs.
    pub fn add_eq_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let row = self.dense(terms);
        self.add_eq(row, rhs);
    }

    pub fn add_le_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let row = self.dense(terms);
        self.add_le(row, rhs);
    }

    pub fn add_ge_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let row = self.dense(terms);
        self.add_ge(row, rhs);
    }

    fn dense(&self, terms: &[(usize, f64)]) -> Vec<f64> {
        let mut row = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            row[j] += a;
        }
        row
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq = self
            .a_eq
            .iter()
            .zip(&self.b_eq)
            .map(|(r, b)| (dot(r) - b).abs());
        let ineq = self
            .a_in
            .iter()
            .zip(&self.b_in)
            .map(|(r, b)| (dot(r) - b).max(0.0));
        let bounds = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| (l - v).max(v - u).max(0.0));
        eq.chain(ineq).chain(bounds).fold(0.0, f64::max)
    }

    /// Plain-text dump: a header, the objective, one line per row, then
    /// bounds.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(
            s,
            "lp vars {} eq {} le {}",
            self.num_vars(),
            self.a_eq.len(),
            self.a_in.len()
        );
        let _ = writeln!(s, "min {}", join(&self.objective));
        for (r, b) in self.a_eq.iter().zip(&self.b_eq) {
            let _ = writeln!(s, "eq {} = {b:?}", join(r));
        }
        for (r, b) in self.a_in.iter().zip(&self.b_in) {
            let _ = writeln!(s, "le {} <= {b:?}", join(r));
        }
        for (j, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            let _ = writeln!(s, "bound {j} {l:?} {u:?}");
        }
        s
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Lp(
                "bound vectors do not match variable count".into(),
            ));
        }
        if self.a_eq.len() != self.b_eq.len() || self.a_in.len() != self.b_in.len() {
            return Err(Error::Lp("row and right-hand-side counts differ".into()));
        }
        if let Some(r) = self
            .a_eq
            .iter()
            .chain(&self.a_in)
            .position(|r| r.len() != n)
        {
            return Err(Error::Lp(format!("row {r} has the wrong length")));
        }
        if self.b_eq.iter().chain(&self.b_in).any(|b| !b.is_finite()) {
            return Err(Error::Lp("right-hand side must be finite".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Lp("objective must be finite".into()));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::Lp(format!(
                    "variable {j} has invalid bounds [{l}, {u}]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variables; meaningful when optimal (a feasible point when
    /// unbounded).
    pub x: Vec<f64>,
    pub objective: f64,
    /// Basic column per row. Columns `0..n` are structural, then one slack
    /// per inequality row, then one artificial per row.
    pub basis: Vec<usize>,
    /// Row prices `y = c_B B⁻¹`, equality rows first.
    pub duals: Vec<f64>,
    /// `c_j - yᵀA_j` for the structural variables.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

/// Solve an LP to optimality or report infeasibility/unboundedness.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let mut sx = Simplex::build(lp);
    sx.refactor()?;
    let phase_one: Vec<f64> = (0..sx.ncols)
        .map(|j| if j >= sx.first_artificial { 1.0 } else { 0.0 })
        .collect();
    if sx.basis.iter().any(|&j| j >= sx.first_artificial) {
        sx.run(&phase_one)?;
        let infeasibility: f64 = (sx.first_artificial..sx.ncols).map(|j| sx.x[j]).sum();
        let scale = 1.0
            + lp.b_eq
                .iter()
                .chain(&lp.b_in)
                .fold(0.0f64, |m, b| m.max(b.abs()));
        if infeasibility > 1e-9 * scale {
            return Ok(sx.solution(lp, LpStatus::Infeasible, &phase_one));
        }
    }
    sx.retire_artificials()?;
    let cost = sx.extend_cost(&lp.objective);
    let status = if sx.run(&cost)? {
        LpStatus::Optimal
    } else {
        LpStatus::Unbounded
    };
    sx.refactor()?;
    Ok(sx.solution(lp, status, &cost))
}

/// Phase-one feasibility: a point satisfying every row when one exists.
pub fn feasibility(lp: &LinearProgram) -> Result<Option<Vec<f64>>> {
    let mut zero = lp.clone();
    zero.objective = vec![0.0; lp.num_vars()];
    let sol = solve_lp(&zero)?;
    Ok(match sol.status {
        LpStatus::Infeasible => None,
        _ => Some(sol.x),
    })
}

struct Simplex {
    m: usize,
    n: usize,
    ncols: usize,
    first_artificial: usize,
    /// Column-major constraint matrix.
    cols: Vec<Vec<f64>>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    /// Row of each basic column, `usize::MAX` when nonbasic.
    position: Vec<usize>,
    /// Row-major `B⁻¹`.
    binv: Vec<Vec<f64>>,
    since_refactor: usize,
    iterations: usize,
}

impl Simplex {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m_eq = lp.a_eq.len();
        let m_in = lp.a_in.len();
        let m = m_eq + m_in;
        let first_artificial = n + m_in;
        let ncols = first_artificial + m;
        let rows: Vec<&Vec<f64>> = lp.a_eq.iter().chain(&lp.a_in).collect();
        let b: Vec<f64> = lp.b_eq.iter().chain(&lp.b_in).copied().collect();
        let mut cols = vec![vec![0.0; m]; ncols];
        for (i, row) in rows.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                cols[j][i] = a;
            }
        }
        for k in 0..m_in {
            cols[n + k][m_eq + k] = 1.0;
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        lower.extend(std::iter::repeat_n(0.0, m_in + m));
        upper.extend(std::iter::repeat_n(f64::INFINITY, m_in + m));
        let mut x = vec![0.0; ncols];
        for j in 0..n {
            x[j] = nonbasic_value(lower[j], upper[j]);
        }
        let mut basis = vec![0; m];
        for i in 0..m {
            let residual = b[i] - (0..n).map(|j| cols[j][i] * x[j]).sum::<f64>();
            let slack = if i >= m_eq { Some(n + i - m_eq) } else { None };
            match slack {
                Some(s) if residual >= 0.0 => {
                    basis[i] = s;
                    // Unused artificial: fixed at zero.
                    upper[first_artificial + i] = 0.0;
                }
                _ => {
                    let a = first_artificial + i;
                    cols[a][i] = if residual >= 0.0 { 1.0 } else { -1.0 };
                    basis[i] = a;
                }
            }
        }
        let mut position = vec![usize::MAX; ncols];
        for (i, &j) in basis.iter().enumerate() {
            position[j] = i;
        }
        Self {
            m,
            n,
            ncols,
            first_artificial,
            cols,
            b,
            lower,
            upper,
            x,
            basis,
            position,
            binv: vec![vec![0.0; m]; m],
            since_refactor: 0,
            iterations: 0,
        }
    }

    fn extend_cost(&self, c: &[f64]) -> Vec<f64> {
        let mut full = c.to_vec();
        full.resize(self.ncols, 0.0);
        full
    }

    /// Recompute `B⁻¹` by LU and the basic values from the nonbasic ones.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        if m == 0 {
            return Ok(());
        }
        let bmat = DMatrix::from_fn(m, m, |i, k| self.cols[self.basis[k]][i]);
        let inv = bmat
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Lp("singular basis after refactorization".into()))?;
        for i in 0..m {
            for k in 0..m {
                self.binv[i][k] = inv[(i, k)];
            }
        }
        let mut rhs = self.b.clone();
        for j in 0..self.ncols {
            if self.position[j] == usize::MAX && self.x[j] != 0.0 {
                for (r, a) in rhs.iter_mut().zip(&self.cols[j]) {
                    *r -= a * self.x[j];
                }
            }
        }
        for i in 0..m {
            let v: f64 = (0..m).map(|k| self.binv[i][k] * rhs[k]).sum();
            self.x[self.basis[i]] = v;
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = cost[j];
            if cb != 0.0 {
                for (yk, bk) in y.iter_mut().zip(&self.binv[i]) {
                    *yk += cb * bk;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j] - self.cols[j].iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        self.binv
            .iter()
            .map(|row| row.iter().zip(&self.cols[j]).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Iterate to optimality; `false` means unbounded.
    fn run(&mut self, cost: &[f64]) -> Result<bool> {
        let cmax = cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if cmax == 0.0 {
            return Ok(true);
        }
        let tol = REDUCED_COST_TOL * cmax;
        let limit = 50_000 + 200 * (self.m + self.ncols);
        loop {
            if self.iterations > limit {
                return Err(Error::Lp(format!(
                    "iteration limit {limit} reached without convergence"
                )));
            }
            let y = self.duals(cost);
            let mut entering = None;
            for j in 0..self.ncols {
                if self.position[j] != usize::MAX || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced_cost(cost, &y, j);
                if d < -tol && self.x[j] < self.upper[j] {
                    entering = Some((j, 1.0));
                    break;
                }
                if d > tol && self.x[j] > self.lower[j] {
                    entering = Some((j, -1.0));
                    break;
                }
            }
            let Some((j, dir)) = entering else {
                return Ok(true);
            };
            let alpha = self.column(j);
            let mut theta = self.upper[j] - self.lower[j];
            let mut leaving: Option<(usize, f64)> = None;
            let mut leaving_col = j;
            for i in 0..self.m {
                if alpha[i].abs() <= PIVOT_TOL {
                    continue;
                }
                let bj = self.basis[i];
                let rate = -dir * alpha[i];
                let (room, bound) = if rate < 0.0 {
                    (self.x[bj] - self.lower[bj], self.lower[bj])
                } else {
                    (self.upper[bj] - self.x[bj], self.upper[bj])
                };
                if !room.is_finite() {
                    continue;
                }
                let step = room.max(0.0) / rate.abs();
                let better = step < theta - RATIO_TIE_TOL
                    || (step <= theta + RATIO_TIE_TOL && bj < leaving_col);
                if better {
                    theta = step;
                    leaving = Some((i, bound));
                    leaving_col = bj;
                }
            }
            if !theta.is_finite() {
                return Ok(false);
            }
            self.iterations += 1;
            self.x[j] += dir * theta;
            for i in 0..self.m {
                self.x[self.basis[i]] -= dir * theta * alpha[i];
            }
            match leaving {
                None => {
                    // Bound flip.
                    self.x[j] = if dir > 0.0 {
                        self.upper[j]
                    } else {
                        self.lower[j]
                    };
                }
                Some((r, bound)) => {
                    let out = self.basis[r];
                    self.x[out] = bound;
                    self.pivot(r, j, &alpha)?;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize, alpha: &[f64]) -> Result<()> {
        let out = self.basis[r];
        self.position[out] = usize::MAX;
        self.basis[r] = j;
        self.position[j] = r;
        let p = alpha[r];
        let pivot_row: Vec<f64> = self.binv[r].iter().map(|v| v / p).collect();
        for i in 0..self.m {
            if i == r || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for (v, pr) in self.binv[i].iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
        }
        self.binv[r] = pivot_row;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        Ok(())
    }

    /// Fix artificials at zero and pivot basic ones out where possible.
    fn retire_artificials(&mut self) -> Result<()> {
        for j in self.first_artificial..self.ncols {
            if self.position[j] == usize::MAX {
                self.x[j] = 0.0;
            }
            self.upper[j] = 0.0;
        }
        for r in 0..self.m {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.first_artificial {
                if self.position[j] != usize::MAX {
                    continue;
                }
                let rho: f64 = self.binv[r]
                    .iter()
                    .zip(&self.cols[j])
                    .map(|(a, b)| a * b)
                    .sum();
                if rho.abs() > 1e-7 && best.is_none_or(|(_, b)| rho.abs() > b.abs()) {
                    best = Some((j, rho));
                }
            }
            if let Some((j, _)) = best {
                let out = self.basis[r];
                let alpha = self.column(j);
                self.pivot(r, j, &alpha)?;
                self.x[out] = 0.0;
            }
        }
        self.refactor()
    }

    fn solution(&self, lp: &LinearProgram, status: LpStatus, cost: &[f64]) -> LpSolution {
        let n = self.n;
        let mut x: Vec<f64> = self.x[..n].to_vec();
        for j in 0..n {
            let (l, u) = (lp.lower[j], lp.upper[j]);
            if x[j] < l && l - x[j] < 1e-10 {
                x[j] = l;
            }
            if x[j] > u && x[j] - u < 1e-10 {
                x[j] = u;
            }
        }
        let y = self.duals(cost);
        let reduced_costs = (0..n).map(|j| self.reduced_cost(cost, &y, j)).collect();
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpSolution {
            status,
            x,
            objective,
            basis: self.basis.clone(),
            duals: y,
            reduced_costs,
            iterations: self.iterations,
        }
    }
}

fn nonbasic_value(l: f64, u: f64) -> f64 {
    if l.is_finite() {
        l
    } else if u.is_finite() {
        u
    } else {
        0.0
    }
}
