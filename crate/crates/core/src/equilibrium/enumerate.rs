//! Enumeration of all equilibria: interior roots from many seeds, edge roots
//! along the four sides, and the four vertices.

use rayon::prelude::*;

use super::corner::{corner_condition_field, verify_corner_field};
use super::newton::find_interior_root;
use super::{make_point, CornerSide, EquilibriumPoint, Field};
use crate::error::{Error, Result};
use crate::model::{Composition, ModelParams, TypeId};
use crate::roots::{bisect, logit_grid, roots_on_grid};

const NULLCLINE_POINTS: usize = 8000;
const EDGE_POINTS: usize = 4000;
const SUB_SEEDS: usize = 4;

/// Grid-cell centers plus refined seeds in cells where both scaled residual
/// components change sign.
fn grid_seeds(field: &Field, n: usize) -> Vec<Composition> {
    let centers: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let mut seeds = Vec::with_capacity(n * n);
    let mut signs = vec![[false; 2]; n * n];
    for (i, &w) in centers.iter().enumerate() {
        for (j, &m) in centers.iter().enumerate() {
            seeds.push(Composition { r_w: w, r_m: m });
            let s = field.scaled(w, m);
            signs[i * n + j] = [s[0] > 0.0, s[1] > 0.0];
        }
    }
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let cell = [signs[i * n + j], signs[i * n + j + 1], signs[(i + 1) * n + j], signs[(i + 1) * n + j + 1]];
            let changes = |k: usize| cell.iter().any(|c| c[k] != cell[0][k]);
            if changes(0) && changes(1) {
                for a in 0..SUB_SEEDS {
                    for b in 0..SUB_SEEDS {
                        let fw = (a as f64 + 0.5) / SUB_SEEDS as f64;
                        let fm = (b as f64 + 0.5) / SUB_SEEDS as f64;
                        seeds.push(Composition {
                            r_w: centers[i] + fw * (centers[i + 1] - centers[i]),
                            r_m: centers[j] + fm * (centers[j + 1] - centers[j]),
                        });
                    }
                }
            }
        }
    }
    seeds
}

/// Walks the nullcline of type `t` (solved explicitly for the other share)
/// and returns points where the other type's residual also changes sign.
fn nullcline_seeds(field: &Field, t: TypeId) -> Vec<Composition> {
    let k = field.k[t];
    if k <= 0.0 {
        return Vec::new();
    }
    let other = t.other();
    // s_t(x, y) = 0  ⇔  y = x + C (r_e - x) [x(1-x)]^(1-β) / k
    let partner = |x: f64| x + field.scale[t] * (field.re[t] - x) * (x * (1.0 - x)).powf(1.0 - field.beta[t]) / k;
    let phi = |x: f64| {
        let y = partner(x);
        if y > 0.0 && y < 1.0 {
            Some(field.s(other, y, x))
        } else {
            None
        }
    };
    let to_comp = |x: f64| {
        let y = partner(x).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        let mut c = Composition { r_w: 0.0, r_m: 0.0 };
        c.set(t, x);
        c.set(other, y);
        c
    };
    let grid = logit_grid(NULLCLINE_POINTS);
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in &grid {
        match phi(x) {
            Some(v) if v.is_finite() => {
                if v == 0.0 {
                    out.push(to_comp(x));
                } else if let Some((px, pv)) = prev {
                    if (pv > 0.0) != (v > 0.0) {
                        let root = bisect(|u| phi(u).unwrap_or(f64::NAN), px, x);
                        out.push(to_comp(root));
                    }
                }
                prev = Some((x, v));
            }
            _ => prev = None,
        }
    }
    out
}

fn edge_candidates(field: &Field) -> Vec<Composition> {
    let grid = logit_grid(EDGE_POINTS);
    let mut out = Vec::new();
    for clamped in TypeId::ALL {
        let free = clamped.other();
        for v in [0.0, 1.0] {
            for x in roots_on_grid(|x| field.s(free, x, v), &grid) {
                let mut c = Composition { r_w: 0.0, r_m: 0.0 };
                c.set(clamped, v);
                c.set(free, x);
                let side = CornerSide::of(v).expect("edge value");
                if corner_condition_field(field, clamped, side, x, false).unwrap_or(false) {
                    out.push(c);
                }
            }
        }
    }
    out
}

fn vertex_candidates(field: &Field) -> Vec<Composition> {
    let mut out = Vec::new();
    for w in [0.0, 1.0] {
        for m in [0.0, 1.0] {
            let c = Composition { r_w: w, r_m: m };
            if verify_corner_field(field, &c, false).unwrap_or(false) {
                out.push(c);
            }
        }
    }
    out
}

fn lex(a: &Composition, b: &Composition) -> std::cmp::Ordering {
    a.r_w.total_cmp(&b.r_w).then(a.r_m.total_cmp(&b.r_m))
}

/// Sorts and merges points closer than `radius` in sup-norm, keeping the first
/// of each cluster.
pub(crate) fn dedupe(mut points: Vec<Composition>, radius: f64) -> Vec<Composition> {
    points.sort_by(lex);
    let mut kept: Vec<Composition> = Vec::new();
    for p in points {
        if !kept.iter().any(|k| k.linf(&p) <= radius) {
            kept.push(p);
        }
    }
    kept
}

/// All equilibria found from a `grid_n × grid_n` seed grid (plus refined and
/// nullcline seeds), the four edges and the four vertices, deduplicated at
/// `10 · tol` and sorted lexicographically.
pub fn enumerate_equilibria(params: &ModelParams, grid_n: usize, tol: f64) -> Result<Vec<EquilibriumPoint>> {
    if grid_n < 16 {
        return Err(Error::Argument(format!("grid_n must be at least 16, got {grid_n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let field = Field::new(params);
    let mut seeds = grid_seeds(&field, grid_n);
    seeds.extend(nullcline_seeds(&field, TypeId::W));
    seeds.extend(nullcline_seeds(&field, TypeId::M));
    let mut found: Vec<Composition> = seeds.par_iter().filter_map(|s| find_interior_root(&field, *s, tol)).collect();
    found.extend(edge_candidates(&field));
    found.extend(vertex_candidates(&field));
    let unique = dedupe(found, 10.0 * tol);
    unique.into_par_iter().map(|c| make_point(params, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_grid() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        assert!(enumerate_equilibria(&p, 8, 1e-10).is_err());
    }

    #[test]
    fn unique_beta_one_point() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let eqs = enumerate_equilibria(&p, 16, 1e-10).unwrap();
        assert_eq!(eqs.len(), 1, "{eqs:?}");
        assert!((eqs[0].comp.r_w - 0.375).abs() < 1e-10);
    }

    #[test]
    fn sigma_zero_unique_efficient() {
        let p = ModelParams::from_gammas(0.3, 0.3, 0.4, 0.6, 0.05).unwrap().with_sigma(0.0).unwrap();
        let eqs = enumerate_equilibria(&p, 16, 1e-10).unwrap();
        assert_eq!(eqs.len(), 1);
        assert!((eqs[0].comp.r_w - 0.4).abs() < 1e-12 && (eqs[0].comp.r_m - 0.6).abs() < 1e-12);
    }

    #[test]
    fn weak_preferences_near_zero_beta_count() {
        let p = ModelParams::from_gammas(0.03, 0.03, 0.4, 0.6, 0.05).unwrap();
        let eqs = enumerate_equilibria(&p, 64, 1e-10).unwrap();
        assert_eq!(eqs.len(), 17);
        let stable: Vec<_> = eqs.iter().filter(|e| e.is_stable()).collect();
        assert_eq!(stable.len(), 7);
        let interior: Vec<_> = stable.iter().filter(|e| e.kind == crate::equilibrium::EqKind::Interior).collect();
        assert_eq!(interior.len(), 1);
        let c = interior[0].comp;
        assert!(c.r_w < 0.4 && c.r_m > 0.6 && (c.r_w - 0.4).abs() < 0.05 && (c.r_m - 0.6).abs() < 0.05);
    }

    #[test]
    fn dedupe_merges_clusters() {
        let pts = vec![
            Composition { r_w: 0.5, r_m: 0.5 },
            Composition { r_w: 0.5 + 1e-12, r_m: 0.5 },
            Composition { r_w: 0.2, r_m: 0.9 },
        ];
        let d = dedupe(pts, 1e-9);
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].r_w, 0.2);
    }
}
