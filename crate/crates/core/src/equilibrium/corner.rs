//! Corner conditions: does a small mass of a type that is fully segregated
//! into one sector want to switch?
//!
//! With own share `x` clamped at 0, the condition is `F⁻¹(1 - δ) ≤ σ g(δ, y, z)`
//! for all small `δ`; at `x = 1` it is `F⁻¹(δ) ≥ σ g(1 - δ, y, z)`. The
//! quantile tail is of order `δ^-β` and the composition term of order `δ^-1`,
//! so the verdict is decided by comparing exponents, and by the leading
//! coefficients when `β = 1`.

use log::{debug, warn};

use super::Field;
use crate::error::{Error, Result};
use crate::model::{Composition, ModelParams, TypeId};

/// Which boundary the clamped coordinate sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerSide {
    /// Own share 0: the whole type is in sector 2.
    Zero,
    /// Own share 1: the whole type is in sector 1.
    One,
}

impl CornerSide {
    pub fn of(x: f64) -> Option<CornerSide> {
        if x == 0.0 {
            Some(CornerSide::Zero)
        } else if x == 1.0 {
            Some(CornerSide::One)
        } else {
            None
        }
    }
}

/// Distance from each edge to its nearest representable interior point.
const EDGE_NEIGHBOUR: [f64; 2] = [f64::MIN_POSITIVE, f64::EPSILON / 2.0];

/// `δ = 10^-k` for these `k`; the verdict reads the last three.
const NUMERIC_EXPONENTS: [i32; 7] = [2, 3, 4, 5, 6, 7, 8];
const VERDICT_TAIL: usize = 3;

/// Gain from switching for a mass `δ` leaving the boundary, signed so that a
/// nonpositive value means nobody wants to move.
fn switching_gain(field: &Field, t: TypeId, side: CornerSide, y: f64, delta: f64) -> f64 {
    match side {
        CornerSide::Zero => field.e(t, delta, y),
        CornerSide::One => -field.e(t, 1.0 - delta, y),
    }
}

fn analytic(field: &Field, t: TypeId, side: CornerSide, y: f64) -> bool {
    let presence = match side {
        CornerSide::Zero => y,
        CornerSide::One => 1.0 - y,
    };
    let k = field.k[t];
    let beta = field.beta[t];
    if beta < 1.0 {
        return k * presence > 0.0;
    }
    if beta > 1.0 {
        // The tail wins in the limit, but an interior root can sit closer to
        // the edge than any f64; then the edge is the representable answer.
        return switching_gain(field, t, side, y, EDGE_NEIGHBOUR[side as usize]) <= 0.0;
    }
    let c = field.scale[t];
    let tail = match side {
        CornerSide::Zero => c * field.re[t],
        CornerSide::One => c * (1.0 - field.re[t]),
    };
    let lead = k * presence - tail;
    // Shares built to cancel the leading terms leave a rounding residue.
    if lead.abs() > 8.0 * f64::EPSILON * (k * presence + tail) {
        return lead > 0.0;
    }
    // Equal leading terms: the gain tends to the finite limit of the next order.
    k <= c
}

/// Limit of the residual component of type `t` as its own share approaches
/// `side`: zero when the corner condition holds (the flow is clamped), else
/// the inward-pointing limit, infinite unless the leading terms cancel.
pub(crate) fn boundary_flow(field: &Field, t: TypeId, side: CornerSide, y: f64) -> f64 {
    if analytic(field, t, side, y) {
        return 0.0;
    }
    let inward = match side {
        CornerSide::Zero => 1.0,
        CornerSide::One => -1.0,
    };
    if field.beta[t] == 1.0 {
        let (presence, tail) = match side {
            CornerSide::Zero => (y, field.re[t]),
            CornerSide::One => (1.0 - y, 1.0 - field.re[t]),
        };
        let (a, b) = (field.k[t] * presence, field.scale[t] * tail);
        if (a - b).abs() <= 8.0 * f64::EPSILON * (a + b) {
            return inward * (field.k[t] - field.scale[t]);
        }
    }
    inward * f64::INFINITY
}

fn numeric(field: &Field, t: TypeId, side: CornerSide, y: f64) -> (bool, Vec<f64>) {
    let gains: Vec<f64> = NUMERIC_EXPONENTS.iter().map(|&k| switching_gain(field, t, side, y, 10f64.powi(-k))).collect();
    let verdict = gains[gains.len() - VERDICT_TAIL..].iter().all(|&g| g <= 0.0);
    (verdict, gains)
}

/// Corner condition for type `t` with own share clamped to `side` and the
/// other type's share `y`. For `β ≠ 1` the exponent comparison decides and a
/// numeric disagreement is only logged; for `β = 1` a disagreement is an
/// [`Error::InconsistentCorner`].
pub fn corner_condition(params: &ModelParams, t: TypeId, side: CornerSide, y: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("other share must lie in [0, 1], got {y}")));
    }
    let field = Field::new(params);
    corner_condition_field(&field, t, side, y, true)
}

pub(crate) fn corner_condition_field(field: &Field, t: TypeId, side: CornerSide, y: f64, strict: bool) -> Result<bool> {
    let a = analytic(field, t, side, y);
    let (n, gains) = numeric(field, t, side, y);
    if a != n {
        if field.beta[t] == 1.0 {
            let msg = format!(
                "type {} at {:?}: coefficient test says {a}, delta sequence says {n} (gains {gains:?})",
                t.as_str(),
                side
            );
            if strict {
                return Err(Error::InconsistentCorner(msg));
            }
            warn!("{msg}; keeping the coefficient verdict");
        } else {
            debug!("type {} at {:?}: exponent test {a} overrides delta sequence {n}", t.as_str(), side);
        }
    }
    Ok(a)
}

/// Checks the corner condition for every clamped coordinate of
/// `candidate`.
pub fn verify_corner(params: &ModelParams, candidate: &Composition) -> Result<bool> {
    let field = Field::new(params);
    verify_corner_field(&field, candidate, true)
}

pub(crate) fn verify_corner_field(field: &Field, candidate: &Composition, strict: bool) -> Result<bool> {
    let mut clamped = false;
    for t in TypeId::ALL {
        let x = candidate.get(t);
        if let Some(side) = CornerSide::of(x) {
            clamped = true;
            if !corner_condition_field(field, t, side, candidate.get(t.other()), strict)? {
                return Ok(false);
            }
        }
    }
    if !clamped {
        return Err(Error::Argument(format!(
            "verify_corner needs a clamped coordinate, got ({}, {})",
            candidate.r_w, candidate.r_m
        )));
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(a: f64, b: f64) -> Composition {
        Composition::new(a, b).unwrap()
    }

    #[test]
    fn beta_one_contrarian_corner() {
        // γ_w r_m^e = 0.45 > (1 - γ_m) r_w^e = 0.42
        let p = ModelParams::from_gammas(0.9, 0.4, 0.7, 0.5, 1.0).unwrap();
        let y = 0.5 / (1.0 - 0.4);
        assert!(verify_corner(&p, &comp(0.0, y)).unwrap());
        let p = ModelParams::from_gammas(0.8, 0.4, 0.7, 0.5, 1.0).unwrap();
        assert!(!verify_corner(&p, &comp(0.0, y)).unwrap());
    }

    #[test]
    fn thick_tails_exclude_segregation() {
        let p = ModelParams::from_gammas(0.5, 0.5, 0.4, 0.6, 2.0).unwrap();
        for y in [0.1, 0.5, 0.9, 1.0] {
            assert!(!verify_corner(&p, &comp(0.0, y)).unwrap());
            assert!(!verify_corner(&p, &comp(1.0, 1.0 - y)).unwrap());
        }
    }

    #[test]
    fn thin_tails_allow_segregation() {
        let p = ModelParams::from_gammas(0.3, 0.3, 0.4, 0.6, 0.5).unwrap();
        assert!(verify_corner(&p, &comp(0.0, 0.5)).unwrap());
        assert!(verify_corner(&p, &comp(1.0, 0.5)).unwrap());
        assert!(!verify_corner(&p, &comp(0.0, 0.0)).unwrap());
        assert!(verify_corner(&p, &comp(0.0, 1.0)).unwrap());
    }

    #[test]
    fn no_preference_never_segregates() {
        let p = ModelParams::from_gammas(0.0, 0.0, 0.4, 0.6, 0.3).unwrap();
        assert!(!verify_corner(&p, &comp(0.0, 0.5)).unwrap());
        assert!(!verify_corner(&p, &comp(1.0, 0.5)).unwrap());
    }

    #[test]
    fn upper_side_beta_one() {
        // At x = 1 the condition is σ c z (1 - y) ≥ C (1 - r_e).
        let p = ModelParams::from_gammas(0.5, 0.1, 0.6, 0.4, 1.0).unwrap();
        assert!(corner_condition(&p, TypeId::W, CornerSide::One, 0.1).unwrap());
        assert!(!corner_condition(&p, TypeId::W, CornerSide::One, 0.5).unwrap());
    }

    #[test]
    fn interior_candidate_is_rejected() {
        let p = ModelParams::from_gammas(0.5, 0.1, 0.6, 0.4, 1.0).unwrap();
        assert!(matches!(verify_corner(&p, &comp(0.3, 0.5)), Err(Error::Argument(_))));
    }
}
