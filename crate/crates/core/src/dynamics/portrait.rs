//! Vector field samples and nullclines on a regular grid.

use serde::Serialize;

use super::{flow_field, Velocity, ENUM_GRID, ENUM_TOL};
use crate::equilibrium::{enumerate_equilibria, EquilibriumPoint, Field};
use crate::error::{Error, Result};
use crate::model::{Composition, ModelParams, TypeId};
use crate::roots::bisect;

/// Accuracy required of refined nullcline points.
const NULLCLINE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortraitSample {
    pub comp: Composition,
    pub velocity: Velocity,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhasePortrait {
    pub n: usize,
    /// Row-major over `r_w` (outer) then `r_m` (inner), at cell centers.
    pub grid: Vec<PortraitSample>,
    /// Segments where `e_w = 0`.
    pub nullcline_w: Vec<Vec<[f64; 2]>>,
    /// Segments where `e_m = 0`.
    pub nullcline_m: Vec<Vec<[f64; 2]>>,
    pub equilibria: Vec<EquilibriumPoint>,
}

fn component(field: &Field, t: TypeId, w: f64, m: f64) -> f64 {
    match t {
        TypeId::W => field.s(TypeId::W, w, m),
        TypeId::M => field.s(TypeId::M, m, w),
    }
}

fn true_component(field: &Field, t: TypeId, w: f64, m: f64) -> f64 {
    match t {
        TypeId::W => field.e(TypeId::W, w, m),
        TypeId::M => field.e(TypeId::M, m, w),
    }
}

/// Zero of component `t` on the segment `a → b`, refined by bisection.
fn crossing(field: &Field, t: TypeId, a: [f64; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let at = |u: f64| [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])];
    let u = bisect(
        |u| {
            let p = at(u);
            component(field, t, p[0], p[1])
        },
        0.0,
        1.0,
    );
    let p = at(u);
    (true_component(field, t, p[0], p[1]).abs() < NULLCLINE_TOL).then_some(p)
}

/// Marching squares on the sign of component `t` over the node grid `xs`.
fn nullcline(field: &Field, t: TypeId, xs: &[f64]) -> Vec<Vec<[f64; 2]>> {
    let n = xs.len();
    let val: Vec<f64> = xs.iter().flat_map(|&w| xs.iter().map(move |&m| component(field, t, w, m))).collect();
    let v = |i: usize, j: usize| val[i * n + j];
    let node = |i: usize, j: usize| [xs[i], xs[j]];
    let mut segs = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            // Corners counter-clockwise from (i, j); edge k joins corner k and k + 1.
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let pos: Vec<bool> = corners.iter().map(|&(a, b)| v(a, b) > 0.0).collect();
            let cut: Vec<usize> = (0..4).filter(|&k| pos[k] != pos[(k + 1) % 4]).collect();
            let pt = |k: usize| {
                let (a, b) = corners[k];
                let (c, d) = corners[(k + 1) % 4];
                crossing(field, t, node(a, b), node(c, d))
            };
            let pairs: Vec<(usize, usize)> = match cut.len() {
                2 => vec![(cut[0], cut[1])],
                4 => {
                    let mid = component(field, t, 0.5 * (xs[i] + xs[i + 1]), 0.5 * (xs[j] + xs[j + 1]));
                    // Isolate the two corners whose sign differs from the center.
                    if (mid > 0.0) == pos[0] {
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(3, 0), (1, 2)]
                    }
                }
                _ => Vec::new(),
            };
            for (a, b) in pairs {
                if let (Some(p), Some(q)) = (pt(a), pt(b)) {
                    segs.push(vec![p, q]);
                }
            }
        }
    }
    segs
}

/// Portrait with a supplied equilibrium set.
pub fn phase_portrait_with(params: &ModelParams, n: usize, equilibria: Vec<EquilibriumPoint>) -> Result<PhasePortrait> {
    if n < 16 {
        return Err(Error::Argument(format!("portrait resolution must be at least 16, got {n}")));
    }
    let field = Field::new(params);
    let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let mut grid = Vec::with_capacity(n * n);
    for &w in &xs {
        for &m in &xs {
            let v = flow_field(&field, w, m);
            grid.push(PortraitSample { comp: Composition { r_w: w, r_m: m }, velocity: Velocity { v_w: v[0], v_m: v[1] } });
        }
    }
    Ok(PhasePortrait {
        n,
        grid,
        nullcline_w: nullcline(&field, TypeId::W, &xs),
        nullcline_m: nullcline(&field, TypeId::M, &xs),
        equilibria,
    })
}

/// Flow on an `n × n` grid of cell centers, both nullclines, and the
/// enumerated equilibria.
pub fn phase_portrait(params: &ModelParams, n: usize) -> Result<PhasePortrait> {
    let eqs = enumerate_equilibria(params, ENUM_GRID.max(n), ENUM_TOL)?;
    phase_portrait_with(params, n, eqs)
}
