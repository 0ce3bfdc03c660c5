//! Linear stability of equilibria under the best-response flow.

use num_complex::Complex64;

use super::corner::corner_condition_field;
use super::{CornerSide, EquilibriumPoint, Field};
use crate::error::Result;
use crate::model::{Composition, ModelParams, TypeId};

const ZERO_BAND: f64 = 1e-8;
const MAX_STEP: f64 = 1e-6;

fn fd_step(x: f64) -> f64 {
    MAX_STEP.min(0.5 * x.min(1.0 - x))
}

/// Eigenvalues of `[[a, b], [c, d]]`.
pub(crate) fn eigen2(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 2] {
    let half_tr = 0.5 * (a + d);
    let det = a * d - b * c;
    let disc = half_tr * half_tr - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        // Avoid cancellation in the smaller root.
        let big = if half_tr >= 0.0 { half_tr + r } else { half_tr - r };
        let small = if big != 0.0 { det / big } else { half_tr - r };
        let (lo, hi) = if big < small { (big, small) } else { (small, big) };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half_tr, -im), Complex64::new(half_tr, im)]
    }
}

/// Central-difference Jacobian of the residual `(e_w, e_m)` at an interior point.
pub(crate) fn jacobian(field: &Field, c: &Composition) -> [[f64; 2]; 2] {
    let hw = fd_step(c.r_w);
    let hm = fd_step(c.r_m);
    let ew = |w: f64, m: f64| field.e(TypeId::W, w, m);
    let em = |w: f64, m: f64| field.e(TypeId::M, m, w);
    [
        [
            (ew(c.r_w + hw, c.r_m) - ew(c.r_w - hw, c.r_m)) / (2.0 * hw),
            (ew(c.r_w, c.r_m + hm) - ew(c.r_w, c.r_m - hm)) / (2.0 * hm),
        ],
        [
            (em(c.r_w + hw, c.r_m) - em(c.r_w - hw, c.r_m)) / (2.0 * hw),
            (em(c.r_w, c.r_m + hm) - em(c.r_w, c.r_m - hm)) / (2.0 * hm),
        ],
    ]
}

fn label_interior(ev: &[Complex64; 2]) -> super::Stability {
    use super::Stability::*;
    if ev.iter().any(|z| z.re.abs() <= ZERO_BAND) {
        Degenerate
    } else if ev.iter().all(|z| z.re < 0.0) {
        Stable
    } else if ev.iter().all(|z| z.re > 0.0) {
        Unstable
    } else {
        Saddle
    }
}

/// Stability label and eigenvalues of an equilibrium.
///
/// Interior points use the eigenvalues of the residual Jacobian. Edge points
/// combine the derivative along the free coordinate with the corner test of
/// the clamped one; vertices use the corner tests alone.
pub fn classify_stability(params: &ModelParams, eq: &EquilibriumPoint) -> Result<(super::Stability, Vec<Complex64>)> {
    use super::Stability::*;
    let field = Field::new(params);
    let c = eq.comp;
    let sides = [CornerSide::of(c.r_w), CornerSide::of(c.r_m)];
    match sides {
        [None, None] => {
            let j = jacobian(&field, &c);
            let ev = eigen2(j[0][0], j[0][1], j[1][0], j[1][1]);
            Ok((label_interior(&ev), ev.to_vec()))
        }
        [Some(_), Some(_)] => {
            let mut held = 0;
            for t in TypeId::ALL {
                let side = CornerSide::of(c.get(t)).expect("vertex coordinate");
                if corner_condition_field(&field, t, side, c.get(t.other()), false)? {
                    held += 1;
                }
            }
            let s = match held {
                2 => BoundaryStable,
                1 => Saddle,
                _ => Unstable,
            };
            Ok((s, Vec::new()))
        }
        _ => {
            let (clamped, free) = if sides[0].is_some() { (TypeId::W, TypeId::M) } else { (TypeId::M, TypeId::W) };
            let x = c.get(free);
            let y = c.get(clamped);
            let h = fd_step(x);
            let d = (field.e(free, x + h, y) - field.e(free, x - h, y)) / (2.0 * h);
            let side = CornerSide::of(y).expect("clamped coordinate");
            let corner = corner_condition_field(&field, clamped, side, x, false)?;
            let s = if d.abs() <= ZERO_BAND {
                Degenerate
            } else {
                match (d < 0.0, corner) {
                    (true, true) => BoundaryStable,
                    (false, false) => Unstable,
                    _ => Saddle,
                }
            };
            Ok((s, vec![Complex64::new(d, 0.0)]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{make_point, Stability};
    use super::*;

    #[test]
    fn eigen_closed_form() {
        let ev = eigen2(-2.0, 0.0, 0.0, -3.0);
        assert_eq!(ev[0].re, -3.0);
        assert_eq!(ev[1].re, -2.0);
        let ev = eigen2(0.0, -1.0, 1.0, 0.0);
        assert_eq!(ev[0], Complex64::new(0.0, -1.0));
        let ev = eigen2(1.0, 2.0, 3.0, 4.0);
        let tr: Complex64 = ev[0] + ev[1];
        let det: Complex64 = ev[0] * ev[1];
        assert!((tr.re - 5.0).abs() < 1e-12 && (det.re + 2.0).abs() < 1e-12);
    }

    #[test]
    fn pure_roy_is_stable() {
        let p = ModelParams::from_gammas(0.2, 0.2, 0.4, 0.6, 0.5).unwrap().with_sigma(0.0).unwrap();
        let e = make_point(&p, Composition::new(0.4, 0.6).unwrap()).unwrap();
        assert_eq!(e.stability, Stability::Stable);
        assert!(e.eigenvalues.iter().all(|z| z.im == 0.0 && z.re < 0.0));
    }

    #[test]
    fn parity_is_unstable_when_preferences_steeper() {
        // At identical types g has slope k/(x(1-x)) against the quantile slope.
        let p = ModelParams::from_gammas(2.0, 2.0, 0.5, 0.5, 1.0).unwrap();
        let e = make_point(&p, Composition::new(0.5, 0.5).unwrap()).unwrap();
        assert!(matches!(e.stability, Stability::Unstable | Stability::Saddle));
    }

    #[test]
    fn corner_vertex_boundary_stable() {
        let p = ModelParams::from_gammas(0.11, 0.11, 0.4, 0.6, 0.05).unwrap();
        let e = make_point(&p, Composition::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(e.stability, Stability::BoundaryStable);
        assert!(e.eigenvalues.is_empty());
        let e = make_point(&p, Composition::new(0.0, 0.0).unwrap()).unwrap();
        assert_ne!(e.stability, Stability::BoundaryStable);
    }
}
