//! Equilibrium conditions, solvers, corner verification, enumeration and
//! stability classification.
//!
//! For type w with own share `x = r_w` and other share `y = r_m` the interior
//! condition reads
//!
//! ```text
//! e_w = F⁻¹_w(1 - r_w) - σ g_w(r_w, r_m, μ_m/μ_w) = 0
//! ```
//!
//! and symmetrically for type m. Solvers work with the scaled form
//! `s_t = x(1 - x) e_t`, which stays bounded near the edges and is linear in
//! the shares when `β = 1`.

mod closed_form;
mod corner;
mod enumerate;
mod monotone;
mod newton;
mod stability;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Composition, ModelParams, PerType, TypeId};

pub use closed_form::{closed_form_regime, solve_closed_form_beta1, ClosedFormRegime};
pub use corner::{corner_condition, verify_corner, CornerSide};
pub(crate) use corner::boundary_flow;
pub use enumerate::enumerate_equilibria;
pub use monotone::{solve_monotone_iteration, solve_monotone_iteration_with, DEFAULT_MAX_ITERATIONS};
pub use newton::solve_from_seed;
pub use stability::classify_stability;

/// Residual of the two interior equilibrium conditions, in income units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub e_w: f64,
    pub e_m: f64,
}

impl Residual {
    pub fn norm(&self) -> f64 {
        self.e_w.abs().max(self.e_m.abs())
    }
}

/// Where an equilibrium sits in the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EqKind {
    Interior,
    EdgeW0,
    EdgeW1,
    EdgeM0,
    EdgeM1,
    Vertex,
}

impl EqKind {
    pub fn of(comp: &Composition) -> EqKind {
        let w_edge = comp.r_w == 0.0 || comp.r_w == 1.0;
        let m_edge = comp.r_m == 0.0 || comp.r_m == 1.0;
        match (w_edge, m_edge) {
            (false, false) => EqKind::Interior,
            (true, true) => EqKind::Vertex,
            (true, false) => {
                if comp.r_w == 0.0 {
                    EqKind::EdgeW0
                } else {
                    EqKind::EdgeW1
                }
            }
            (false, true) => {
                if comp.r_m == 0.0 {
                    EqKind::EdgeM0
                } else {
                    EqKind::EdgeM1
                }
            }
        }
    }

    pub fn is_boundary(self) -> bool {
        self != EqKind::Interior
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Saddle,
    Unstable,
    BoundaryStable,
    /// Linearization inconclusive (an eigenvalue on the imaginary axis).
    Degenerate,
}

impl Stability {
    /// Attracting: stable in the interior or at the boundary.
    pub fn is_stable(self) -> bool {
        matches!(self, Stability::Stable | Stability::BoundaryStable)
    }
}

/// An equilibrium composition with its classification.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint {
    pub comp: Composition,
    pub kind: EqKind,
    pub stability: Stability,
    /// Two for interior points, one (along the free coordinate) for edge
    /// points, none for vertices.
    pub eigenvalues: Vec<Complex64>,
    /// Sup-norm of the residual over the free coordinates.
    pub residual_norm: f64,
}

impl EquilibriumPoint {
    pub fn is_stable(&self) -> bool {
        self.stability.is_stable()
    }
}

#[derive(Serialize, Deserialize)]
struct EigenJson {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct EquilibriumJson {
    r_w: f64,
    r_m: f64,
    kind: EqKind,
    stability: Stability,
    eigenvalues: Vec<EigenJson>,
    residual_norm: f64,
}

impl Serialize for EquilibriumPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EquilibriumJson {
            r_w: self.comp.r_w,
            r_m: self.comp.r_m,
            kind: self.kind,
            stability: self.stability,
            eigenvalues: self.eigenvalues.iter().map(|z| EigenJson { re: z.re, im: z.im }).collect(),
            residual_norm: self.residual_norm,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EquilibriumPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = EquilibriumJson::deserialize(d)?;
        Ok(EquilibriumPoint {
            comp: Composition::new(j.r_w, j.r_m).map_err(serde::de::Error::custom)?,
            kind: j.kind,
            stability: j.stability,
            eigenvalues: j.eigenvalues.into_iter().map(|e| Complex64::new(e.re, e.im)).collect(),
            residual_norm: j.residual_norm,
        })
    }
}

/// Flattened coefficients of the residual for fast repeated evaluation.
///
/// For own share `x` and other share `y` of type `t`:
/// `e_t = C (r_e - x) / [x(1-x)]^β - k (y - x) / (x(1-x))` with `k = σ c z`.
/// Relative perturbation of a share used to bound residual rounding.
const ROUNDING: f64 = 8.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Field {
    pub scale: PerType<f64>,
    pub re: PerType<f64>,
    pub beta: PerType<f64>,
    pub k: PerType<f64>,
}

impl Field {
    pub fn new(params: &ModelParams) -> Self {
        let k = |t: TypeId| params.sigma * params.pref[t].strength() * params.z(t);
        Field {
            scale: params.adv.map(|a| a.scale()),
            re: params.adv.map(|a| a.efficient()),
            beta: params.adv.map(|a| a.beta()),
            k: PerType::new(k(TypeId::W), k(TypeId::M)),
        }
    }

    #[inline]
    fn weight_pow(w: f64, exponent: f64) -> f64 {
        if exponent == 0.0 {
            1.0
        } else if exponent == 1.0 {
            w
        } else if exponent == -1.0 {
            1.0 / w
        } else {
            w.powf(exponent)
        }
    }

    /// True residual of type `t` at own share `x ∈ (0, 1)`, other share `y`.
    #[inline]
    pub fn e(&self, t: TypeId, x: f64, y: f64) -> f64 {
        let w = x * (1.0 - x);
        let q = self.scale[t] * (self.re[t] - x) / Self::weight_pow(w, self.beta[t]);
        q - self.k[t] * (y - x) / w
    }

    /// Scaled residual `x(1 - x) e_t`.
    #[inline]
    pub fn s(&self, t: TypeId, x: f64, y: f64) -> f64 {
        let w = x * (1.0 - x);
        self.scale[t] * (self.re[t] - x) * Self::weight_pow(w, 1.0 - self.beta[t]) - self.k[t] * (y - x)
    }

    /// Whether `s_t(x, y)` is within the rounding error of its two terms.
    pub fn s_is_noise(&self, t: TypeId, x: f64, y: f64) -> bool {
        let w = x * (1.0 - x);
        let a = self.scale[t] * (self.re[t] - x) * Self::weight_pow(w, 1.0 - self.beta[t]);
        let b = self.k[t] * (y - x);
        (a - b).abs() <= ROUNDING * (a.abs() + b.abs())
    }

    /// `∂s_t/∂x` (own share).
    #[inline]
    pub fn ds_dx(&self, t: TypeId, x: f64) -> f64 {
        let b = self.beta[t];
        let w = x * (1.0 - x);
        let mut d = -Self::weight_pow(w, 1.0 - b);
        if b != 1.0 {
            d += (self.re[t] - x) * (1.0 - b) * Self::weight_pow(w, -b) * (1.0 - 2.0 * x);
        }
        self.scale[t] * d + self.k[t]
    }

    /// `∂s_t/∂y` (other share).
    #[inline]
    pub fn ds_dy(&self, t: TypeId) -> f64 {
        -self.k[t]
    }

    /// Both true residual components at an interior point.
    #[inline]
    pub fn residual(&self, c: &Composition) -> Residual {
        Residual { e_w: self.e(TypeId::W, c.r_w, c.r_m), e_m: self.e(TypeId::M, c.r_m, c.r_w) }
    }

    /// Whether `c` solves both equations to within `tol`, or each failing
    /// component changes sign between the floats adjacent to its share (a root
    /// closer to an edge than `tol` can resolve).
    pub fn converged(&self, c: &Composition, tol: f64) -> bool {
        TypeId::ALL.iter().all(|&t| {
            let (x, y) = own_other(c, t);
            if self.e(t, x, y).abs() < tol {
                return true;
            }
            let (below, above) = (x.next_down(), x.next_up());
            if below <= 0.0 || above >= 1.0 {
                return false;
            }
            let (lo, hi) = (self.s(t, below, y), self.s(t, above, y));
            lo.is_finite() && hi.is_finite() && ((lo <= 0.0 && hi >= 0.0) || (lo >= 0.0 && hi <= 0.0))
        })
    }

    /// Both scaled components.
    #[inline]
    pub fn scaled(&self, r_w: f64, r_m: f64) -> [f64; 2] {
        [self.s(TypeId::W, r_w, r_m), self.s(TypeId::M, r_m, r_w)]
    }
}

/// Own and other share of type `t` at `comp`.
#[inline]
pub(crate) fn own_other(comp: &Composition, t: TypeId) -> (f64, f64) {
    (comp.get(t), comp.get(t.other()))
}

/// Interior residual `(e_w, e_m)`.
pub fn residual(params: &ModelParams, comp: &Composition) -> Result<Residual> {
    if !comp.is_interior() {
        return Err(Error::Domain(format!(
            "residual requires an interior composition, got ({}, {}); use the corner machinery on the boundary",
            comp.r_w, comp.r_m
        )));
    }
    Ok(Field::new(params).residual(comp))
}

/// `(r_w^e, r_m^e) = (Pr[Δ_w > 0], Pr[Δ_m > 0])`.
pub fn efficient_composition(params: &ModelParams) -> Composition {
    let e = params.efficient();
    Composition { r_w: e.w, r_m: e.m }
}

/// Sup-norm of the residual over the coordinates of `comp` that are not
/// clamped to the boundary.
pub(crate) fn free_residual_norm(field: &Field, comp: &Composition) -> f64 {
    let mut n: f64 = 0.0;
    for t in TypeId::ALL {
        let (x, y) = own_other(comp, t);
        if x > 0.0 && x < 1.0 {
            n = n.max(field.e(t, x, y).abs());
        }
    }
    n
}

/// Builds a classified point; fails only when the stability check itself errors.
pub(crate) fn make_point(params: &ModelParams, comp: Composition) -> Result<EquilibriumPoint> {
    let field = Field::new(params);
    let mut p = EquilibriumPoint {
        comp,
        kind: EqKind::of(&comp),
        stability: Stability::Degenerate,
        eigenvalues: Vec::new(),
        residual_norm: free_residual_norm(&field, &comp),
    };
    let (s, ev) = classify_stability(params, &p)?;
    p.stability = s;
    p.eigenvalues = ev;
    Ok(p)
}
