//! Scalar bracketing helpers shared by the solvers.

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs (or one
/// is zero). Runs until the bracket stops shrinking in floating point.
pub(crate) fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Points of `(0, 1)` that are uniform in the logit, so both ends are
/// resolved down to roughly `1e-13`.
pub(crate) fn logit_grid(n: usize) -> Vec<f64> {
    let span = 30.0;
    (0..n)
        .map(|i| {
            let t = -span + 2.0 * span * i as f64 / (n - 1) as f64;
            1.0 / (1.0 + (-t).exp())
        })
        .filter(|&x| x > 0.0 && x < 1.0)
        .collect()
}

/// Sign changes of `f` on the sorted grid, refined by bisection.
pub(crate) fn roots_on_grid(mut f: impl FnMut(f64) -> f64, grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    for i in 0..grid.len() {
        if vals[i] == 0.0 {
            out.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len() && vals[i + 1] != 0.0 && vals[i].is_finite() && vals[i + 1].is_finite() && (vals[i] > 0.0) != (vals[i + 1] > 0.0) {
            out.push(bisect(&mut f, grid[i], grid[i + 1]));
        }
    }
    out
}
