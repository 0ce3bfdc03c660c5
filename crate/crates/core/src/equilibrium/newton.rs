//! Local interior root finding from a seed.

use super::{make_point, EquilibriumPoint, Field};
use crate::model::{Composition, ModelParams, TypeId};
use crate::roots::bisect;

const MAX_NEWTON: usize = 100;
const MAX_BACKTRACK: usize = 40;
const MAX_SWEEPS: usize = 500;

fn inside(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

fn sup(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// One damped Newton step on the scaled residual. `None` when the Jacobian is
/// singular or no step length reduces the residual.
fn newton_step(field: &Field, rw: f64, rm: f64) -> Option<(f64, f64)> {
    let s = field.scaled(rw, rm);
    let a = field.ds_dx(TypeId::W, rw);
    let b = field.ds_dy(TypeId::W);
    let c = field.ds_dy(TypeId::M);
    let d = field.ds_dx(TypeId::M, rm);
    let det = a * d - b * c;
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let dw = -(d * s[0] - b * s[1]) / det;
    let dm = -(a * s[1] - c * s[0]) / det;
    let n0 = sup(s);
    let mut lambda = 1.0;
    for _ in 0..MAX_BACKTRACK {
        let (nw, nm) = (rw + lambda * dw, rm + lambda * dm);
        if inside(nw) && inside(nm) {
            let n1 = sup(field.scaled(nw, nm));
            if n1.is_finite() && n1 < n0 * (1.0 - 1e-4 * lambda) {
                return Some((nw, nm));
            }
        }
        lambda *= 0.5;
    }
    None
}

/// Root of `f` nearest to `x` inside `(0, 1)`, by outward bracket expansion.
fn nearest_root(f: impl Fn(f64) -> f64, x: f64) -> Option<f64> {
    let fx = f(x);
    if fx == 0.0 {
        return Some(x);
    }
    let mut d = 1e-4;
    loop {
        let lo = (x - d).max(0.0);
        let hi = (x + d).min(1.0);
        let lo_in = lo > 0.0;
        let hi_in = hi < 1.0;
        if lo_in {
            let v = f(lo);
            if (v > 0.0) != (fx > 0.0) || v == 0.0 {
                return Some(bisect(&f, lo, x));
            }
        }
        if hi_in {
            let v = f(hi);
            if (v > 0.0) != (fx > 0.0) || v == 0.0 {
                return Some(bisect(&f, x, hi));
            }
        }
        if !lo_in && !hi_in {
            return None;
        }
        d *= 2.0;
        if d > 1.0 {
            // Probe the geometric tails near the edges once the bracket spans the square.
            for k in 1..=50 {
                let e = 0.5f64.powi(k) * x.min(1.0 - x);
                for p in [e, 1.0 - e] {
                    let v = f(p);
                    if (v > 0.0) != (fx > 0.0) {
                        return Some(bisect(&f, p.min(x), p.max(x)));
                    }
                }
            }
            return None;
        }
    }
}

fn gauss_seidel(field: &Field, mut rw: f64, mut rm: f64, tol: f64) -> Option<(f64, f64)> {
    for _ in 0..MAX_SWEEPS {
        rw = nearest_root(|x| field.s(TypeId::W, x, rm), rw)?;
        rm = nearest_root(|y| field.s(TypeId::M, y, rw), rm)?;
        if !(inside(rw) && inside(rm)) {
            return None;
        }
        if field.converged(&Composition { r_w: rw, r_m: rm }, tol) {
            return Some((rw, rm));
        }
    }
    None
}

pub(crate) fn find_interior_root(field: &Field, seed: Composition, tol: f64) -> Option<Composition> {
    if !seed.is_interior() {
        return None;
    }
    let (mut rw, mut rm) = (seed.r_w, seed.r_m);
    let true_norm = |w: f64, m: f64| field.residual(&Composition { r_w: w, r_m: m }).norm();
    for _ in 0..MAX_NEWTON {
        let n = true_norm(rw, rm);
        if field.converged(&Composition { r_w: rw, r_m: rm }, tol) {
            // One polishing step when it helps.
            if let Some((pw, pm)) = newton_step(field, rw, rm) {
                if true_norm(pw, pm) < n {
                    return Some(Composition { r_w: pw, r_m: pm });
                }
            }
            return Some(Composition { r_w: rw, r_m: rm });
        }
        match newton_step(field, rw, rm) {
            Some((nw, nm)) => {
                rw = nw;
                rm = nm;
            }
            None => break,
        }
    }
    if field.converged(&Composition { r_w: rw, r_m: rm }, tol) {
        return Some(Composition { r_w: rw, r_m: rm });
    }
    gauss_seidel(field, seed.r_w, seed.r_m, tol).map(|(w, m)| Composition { r_w: w, r_m: m })
}

/// Interior equilibrium reached from `seed` with residual sup-norm below
/// `tol`, or `None` when the iterates stall or head for the boundary.
pub fn solve_from_seed(params: &ModelParams, seed: &Composition, tol: f64) -> Option<EquilibriumPoint> {
    let field = Field::new(params);
    let root = find_interior_root(&field, *seed, tol)?;
    make_point(params, root).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_seed_is_returned() {
        let p = ModelParams::from_gammas(0.3, 0.3, 0.5, 0.5, 1.5).unwrap();
        let e = solve_from_seed(&p, &Composition::new(0.5, 0.5).unwrap(), 1e-12).unwrap();
        assert_eq!((e.comp.r_w, e.comp.r_m), (0.5, 0.5));
    }

    #[test]
    fn center_seed_reaches_closed_form() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let e = solve_from_seed(&p, &Composition::new(0.5, 0.5).unwrap(), 1e-12).unwrap();
        assert!((e.comp.r_w - 0.375).abs() < 1e-12 && (e.comp.r_m - 0.625).abs() < 1e-12);
    }

    #[test]
    fn boundary_seed_is_none() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        assert!(solve_from_seed(&p, &Composition::new(0.0, 0.5).unwrap(), 1e-12).is_none());
    }

    #[test]
    fn corner_regime_has_no_interior_root() {
        // Unique equilibrium (0, 1): nothing interior to converge to.
        let p = ModelParams::from_gammas(0.35, 0.25, 0.3, 0.8, 1.0).unwrap();
        for &(a, b) in &[(0.1, 0.9), (0.5, 0.5), (0.3, 0.8)] {
            assert!(solve_from_seed(&p, &Composition::new(a, b).unwrap(), 1e-10).is_none());
        }
    }

    #[test]
    fn thick_tail_root() {
        // Fig.-5-type parameters at μ_w = 1: one interior stable point near (0.912, 0.154).
        let p = ModelParams::from_gammas(3.5, 3.5, 0.7, 0.5, 2.0).unwrap();
        let e = solve_from_seed(&p, &Composition::new(0.9, 0.2).unwrap(), 1e-10).unwrap();
        assert!((e.comp.r_w - 0.91231).abs() < 1e-4 && (e.comp.r_m - 0.15409).abs() < 1e-4, "{e:?}");
    }
}
