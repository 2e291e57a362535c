//! Independent numerical oracles.

use nalgebra::{DMatrix, DVector};

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 50)
}

/// Central difference `(f(x+h) - f(x-h)) / 2h`.
pub fn central_difference(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Minimum of `c·x` over `{A_eq x = b_eq, A_in x ≤ b_in, l ≤ x ≤ u}` with
/// finite bounds, by enumerating every basic solution.
pub fn vertex_enumeration(
    c: &[f64],
    a_eq: &[Vec<f64>],
    b_eq: &[f64],
    a_in: &[Vec<f64>],
    b_in: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Option<(f64, Vec<f64>)> {
    let n = c.len();
    let mut ineq: Vec<(Vec<f64>, f64)> = a_in.iter().cloned().zip(b_in.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        ineq.push((e.clone(), upper[j]));
        e[j] = -1.0;
        ineq.push((e, -lower[j]));
    }
    let need = n.checked_sub(a_eq.len())?;
    let feasible = |x: &[f64]| {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        a_eq.iter()
            .zip(b_eq)
            .all(|(r, b)| (dot(r) - b).abs() <= 1e-9)
            && ineq.iter().all(|(r, b)| dot(r) <= b + 1e-9)
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut pick = Vec::with_capacity(need);
    combinations(ineq.len(), need, &mut pick, &mut |subset| {
        let rows: Vec<(&Vec<f64>, f64)> = a_eq
            .iter()
            .zip(b_eq.iter().copied())
            .chain(subset.iter().map(|&k| (&ineq[k].0, ineq[k].1)))
            .collect();
        let m = DMatrix::from_fn(n, n, |i, j| rows[i].0[j]);
        let rhs = DVector::from_fn(n, |i, _| rows[i].1);
        let Some(x) = m.lu().solve(&rhs) else { return };
        let x: Vec<f64> = x.iter().copied().collect();
        if x.iter().any(|v| !v.is_finite()) || !feasible(&x) {
            return;
        }
        let val: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            best = Some((val, x));
        }
    });
    best
}

fn combinations(n: usize, k: usize, pick: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    fn go(
        start: usize,
        n: usize,
        k: usize,
        pick: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if pick.len() == k {
            visit(pick);
            return;
        }
        for i in start..n {
            if n - i < k - pick.len() {
                break;
            }
            pick.push(i);
            go(i + 1, n, k, pick, visit);
            pick.pop();
        }
    }
    go(0, n, k, pick, visit);
}

/// Multi-resolution grid minimization over a box: a full grid at
/// `coarse` (relative to each side), then repeated refinement around the
/// incumbent until the step is at most `fine`.
pub fn grid_minimize(
    bounds: &[(f64, f64)],
    coarse: f64,
    fine: f64,
    f: &dyn Fn(&[f64]) -> f64,
) -> (Vec<f64>, f64) {
    let dim = bounds.len();
    let mut step: Vec<f64> = bounds.iter().map(|(l, u)| (u - l) * coarse).collect();
    let mut centers: Vec<Vec<f64>> = bounds
        .iter()
        .zip(&step)
        .map(|((l, u), s)| {
            let k = ((u - l) / s).round() as usize;
            (0..=k).map(|i| (l + i as f64 * s).min(*u)).collect()
        })
        .collect();
    let mut best = (vec![0.0; dim], f64::INFINITY);
    let mut rel = coarse;
    loop {
        let mut idx = vec![0usize; dim];
        let mut x = vec![0.0; dim];
        'outer: loop {
            for d in 0..dim {
                x[d] = centers[d][idx[d]];
            }
            let v = f(&x);
            if v < best.1 {
                best = (x.clone(), v);
            }
            for d in 0..dim {
                idx[d] += 1;
                if idx[d] < centers[d].len() {
                    continue 'outer;
                }
                idx[d] = 0;
            }
            break;
        }
        if rel <= fine * (1.0 + 1e-9) {
            return best;
        }
        let factor = if rel / 5.0 >= fine { 5.0 } else { rel / fine };
        rel /= factor;
        for d in 0..dim {
            let (l, u) = bounds[d];
            let old = step[d];
            step[d] = old / factor;
            let half = (old / step[d]).ceil() as i64 + 1;
            centers[d] = (-half..=half)
                .map(|k| best.0[d] + k as f64 * step[d])
                .filter(|v| *v >= l - 1e-15 && *v <= u + 1e-15)
                .map(|v| v.clamp(l, u))
                .collect();
        }
    }
}
