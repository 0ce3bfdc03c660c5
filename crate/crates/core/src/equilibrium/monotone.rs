//! Monotone fixed-point construction starting from the efficient composition.
//!
//! Each step solves the two scalar conditions holding the other share at its
//! previous value. Starting from `r_w^e ≤ r_m^e`, the w-share can only fall and
//! the m-share can only rise, so each step searches one side of the previous
//! iterate for the nearest root.

use super::{make_point, EquilibriumPoint, Field};
use crate::error::{Error, Result};
use crate::model::{Composition, ModelParams, TypeId};
use crate::roots::bisect;

pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

const UNIFORM_STEPS: usize = 512;
const TAIL_STEPS: i32 = 60;

/// Largest root of `f` in `(0, from]`, or 0 when `f` keeps its sign.
fn root_below(f: impl Fn(f64) -> f64, from: f64) -> f64 {
    let f0 = f(from);
    if f0 == 0.0 || from <= 0.0 {
        return from;
    }
    let sign = f0 > 0.0;
    let mut prev = from;
    let uniform = (1..UNIFORM_STEPS).map(|i| from * (1.0 - i as f64 / UNIFORM_STEPS as f64));
    let tail = (1..=TAIL_STEPS).map(|k| from / UNIFORM_STEPS as f64 * 0.5f64.powi(k));
    for x in uniform.chain(tail) {
        let v = f(x);
        if v == 0.0 {
            return x;
        }
        if (v > 0.0) != sign {
            return bisect(&f, x, prev);
        }
        prev = x;
    }
    0.0
}

/// Smallest root of `f` in `[from, 1)`, or 1 when `f` keeps its sign.
fn root_above(f: impl Fn(f64) -> f64, from: f64) -> f64 {
    1.0 - root_below(|u| f(1.0 - u), 1.0 - from)
}

/// Runs the construction with the default iteration cap.
pub fn solve_monotone_iteration(params: &ModelParams, tol: f64) -> Result<EquilibriumPoint> {
    solve_monotone_iteration_with(params, tol, DEFAULT_MAX_ITERATIONS)
}

pub fn solve_monotone_iteration_with(params: &ModelParams, tol: f64, max_iterations: usize) -> Result<EquilibriumPoint> {
    let re = params.efficient();
    if re.w > re.m {
        return Err(Error::Argument(format!(
            "monotone iteration requires r_w^e <= r_m^e, got ({}, {})",
            re.w, re.m
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let field = Field::new(params);
    let (mut rw, mut rm) = (re.w, re.m);
    for _ in 0..max_iterations.max(1) {
        // A residual at rounding level has no reliable sign; stay put.
        let next_w = if field.s_is_noise(TypeId::W, rw, rm) { rw } else { root_below(|x| field.s(TypeId::W, x, rm), rw) };
        let next_m = if field.s_is_noise(TypeId::M, rm, rw) { rm } else { root_above(|y| field.s(TypeId::M, y, rw), rm) };
        // Bisection can land an ulp on the wrong side of the previous iterate.
        let next_w = next_w.min(rw);
        let next_m = next_m.max(rm);
        let moved = (next_w - rw).abs().max((next_m - rm).abs());
        rw = next_w;
        rm = next_m;
        if moved < tol {
            return make_point(params, Composition::clamped(rw, rm));
        }
    }
    Err(Error::Convergence { iterations: max_iterations, last: Composition::clamped(rw, rm) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_zero_returns_efficient() {
        let p = ModelParams::from_gammas(0.3, 0.2, 0.4, 0.6, 0.7).unwrap().with_sigma(0.0).unwrap();
        let e = solve_monotone_iteration(&p, 1e-12).unwrap();
        assert_eq!((e.comp.r_w, e.comp.r_m), (0.4, 0.6));
    }

    #[test]
    fn matches_closed_form() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let e = solve_monotone_iteration(&p, 1e-13).unwrap();
        assert!((e.comp.r_w - 0.375).abs() < 1e-10 && (e.comp.r_m - 0.625).abs() < 1e-10, "{e:?}");
    }

    #[test]
    fn identical_types_fixed() {
        let p = ModelParams::from_gammas(0.3, 0.3, 0.5, 0.5, 1.5).unwrap();
        let e = solve_monotone_iteration(&p, 1e-12).unwrap();
        assert_eq!((e.comp.r_w, e.comp.r_m), (0.5, 0.5));
    }

    #[test]
    fn reaches_corner_when_preferences_dominate() {
        let p = ModelParams::from_gammas(0.4, 0.2, 0.2, 0.6, 1.0).unwrap();
        let e = solve_monotone_iteration(&p, 1e-13).unwrap();
        assert!(e.comp.r_w < 1e-9, "{e:?}");
    }

    #[test]
    fn reversed_order_rejected() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.6, 0.4, 1.0).unwrap();
        assert!(matches!(solve_monotone_iteration(&p, 1e-10), Err(Error::Argument(_))));
    }

    #[test]
    fn iteration_cap_reports_last_iterate() {
        let p = ModelParams::from_gammas(0.45, 0.45, 0.4, 0.6, 1.0).unwrap();
        match solve_monotone_iteration_with(&p, 1e-15, 2) {
            Err(Error::Convergence { iterations, last }) => {
                assert_eq!(iterations, 2);
                assert!(last.r_w <= 0.4 && last.r_m >= 0.6);
            }
            other => panic!("{other:?}"),
        }
    }
}
