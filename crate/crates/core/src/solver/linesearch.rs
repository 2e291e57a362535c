//! Exact line search on a convex univariate function via its derivative.

/// Minimize a convex function on `[0, hi]` given `φ'` and `φ''`.
///
/// `dphi0 = φ'(0)` must be negative. Safeguarded Newton with bisection.
pub(crate) fn minimize_on_interval(
    hi: f64,
    dphi0: f64,
    mut eval: impl FnMut(f64) -> (f64, f64),
) -> f64 {
    debug_assert!(dphi0 < 0.0);
    if hi <= 0.0 {
        return 0.0;
    }
    let (d_hi, _) = eval(hi);
    if d_hi <= 0.0 {
        return hi;
    }
    let scale = dphi0.abs().max(d_hi.abs());
    let (mut lo, mut up) = (0.0, hi);
    let mut x = 0.0;
    let (mut d, mut dd) = (dphi0, eval(0.0).1);
    for _ in 0..200 {
        let newton = if dd > 0.0 { x - d / dd } else { f64::NAN };
        let next = if newton.is_finite() && newton > lo && newton < up {
            newton
        } else {
            0.5 * (lo + up)
        };
        let (dn, ddn) = eval(next);
        if dn < 0.0 {
            lo = next;
        } else {
            up = next;
        }
        x = next;
        d = dn;
        dd = ddn;
        if dn.abs() <= 1e-15 * scale || up - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    x
}
