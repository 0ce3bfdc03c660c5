//! Structural primitives: types, composition preferences, sector-1 advantage
//! distributions and the parameter bundle every solver consumes.
//!
//! Preferences are hyperbolic, `h(u) = c / u`, and the sector-1 advantage of a
//! type has the location-scale quantile
//!
//! ```text
//! F⁻¹(1 - u) = C (r_e - u) / [u (1 - u)]^β
//! ```
//!
//! so that `r_e = Pr[Δ > 0]` is the efficient composition and `β` governs tail
//! thickness.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid size used to validate quantile monotonicity at construction.
const MONOTONICITY_GRID: usize = 501;

/// The two population types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeId {
    W,
    M,
}

impl TypeId {
    pub const ALL: [TypeId; 2] = [TypeId::W, TypeId::M];

    pub fn other(self) -> TypeId {
        match self {
            TypeId::W => TypeId::M,
            TypeId::M => TypeId::W,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TypeId::W => "w",
            TypeId::M => "m",
        }
    }
}

impl std::str::FromStr for TypeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "w" | "W" => Ok(TypeId::W),
            "m" | "M" => Ok(TypeId::M),
            other => Err(Error::Argument(format!("unknown type '{other}' (expected w or m)"))),
        }
    }
}

/// A value for each type.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerType<T> {
    pub w: T,
    pub m: T,
}

impl<T> PerType<T> {
    pub fn new(w: T, m: T) -> Self {
        Self { w, m }
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> PerType<U> {
        PerType { w: f(self.w), m: f(self.m) }
    }
}

impl<T: Clone> PerType<T> {
    pub fn splat(v: T) -> Self {
        Self { w: v.clone(), m: v }
    }
}

impl<T> Index<TypeId> for PerType<T> {
    type Output = T;

    fn index(&self, t: TypeId) -> &T {
        match t {
            TypeId::W => &self.w,
            TypeId::M => &self.m,
        }
    }
}

impl<T> IndexMut<TypeId> for PerType<T> {
    fn index_mut(&mut self, t: TypeId) -> &mut T {
        match t {
            TypeId::W => &mut self.w,
            TypeId::M => &mut self.m,
        }
    }
}

/// Composition preference strength `c` of a type (`h(u) = c / u`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceSpec {
    c: f64,
}

impl PreferenceSpec {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidParameter(format!("preference strength c must be finite and >= 0, got {c}")));
        }
        Ok(Self { c })
    }

    pub fn strength(&self) -> f64 {
        self.c
    }

    /// Disutility of holding own-type share `u` in a sector.
    pub fn h(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("h is defined on (0, 1], got u = {u}")));
        }
        Ok(self.c / u)
    }

    /// Net composition gain `g(x, y, z) = h(share in sector 1) - h(share in sector 2)`
    /// where `x` is the own type's sector-1 share, `y` the other type's and `z`
    /// the other-to-own mass ratio.
    ///
    /// On the boundary `x ∈ {0, 1}` the limit is returned: `+∞` at `x = 0`
    /// when `y > 0`, `-∞` at `x = 1` when `y < 1`, and the finite limits
    /// `-c z` and `c z` in the remaining two cases.
    pub fn g(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return Err(Error::Domain(format!("g requires x, y in [0, 1], got x = {x}, y = {y}")));
        }
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Domain(format!("g requires z > 0, got {z}")));
        }
        if self.c == 0.0 {
            return Ok(0.0);
        }
        let cz = self.c * z;
        Ok(if x == 0.0 {
            if y > 0.0 {
                f64::INFINITY
            } else {
                -cz
            }
        } else if x == 1.0 {
            if y < 1.0 {
                f64::NEG_INFINITY
            } else {
                cz
            }
        } else {
            cz * (y - x) / (x * (1.0 - x))
        })
    }
}

/// Distribution of sector-1 advantage `Δ = Y₁ - Y₂` for one type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvantageSpec {
    scale: f64,
    efficient: f64,
    beta: f64,
}

impl AdvantageSpec {
    /// Builds the spec and checks the quantile is strictly increasing on a
    /// 501-point grid (large `β` can break monotonicity).
    pub fn new(scale: f64, efficient: f64, beta: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("advantage scale C must be > 0, got {scale}")));
        }
        if !(efficient > 0.0 && efficient < 1.0) {
            return Err(Error::InvalidParameter(format!("efficient composition r_e must lie in (0, 1), got {efficient}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("tail exponent beta must be > 0, got {beta}")));
        }
        let spec = Self { scale, efficient, beta };
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=MONOTONICITY_GRID {
            let p = i as f64 / (MONOTONICITY_GRID + 1) as f64;
            let q = spec.quantile_unchecked(p);
            if q <= prev {
                return Err(Error::InvalidParameter(format!(
                    "advantage quantile is not strictly increasing near p = {p:.4} (C = {scale}, r_e = {efficient}, beta = {beta})"
                )));
            }
            prev = q;
        }
        Ok(spec)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn efficient(&self) -> f64 {
        self.efficient
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `[u (1 - u)]^β`, with the `β = 1` case kept exact.
    #[inline]
    pub(crate) fn tail_weight(&self, u: f64) -> f64 {
        let v = u * (1.0 - u);
        if self.beta == 1.0 {
            v
        } else {
            v.powf(self.beta)
        }
    }

    fn quantile_unchecked(&self, p: f64) -> f64 {
        // p - (1 - r_e) vanishes exactly at p = 1 - r_e.
        self.scale * (p - (1.0 - self.efficient)) / self.tail_weight(p)
    }

    /// `F⁻¹(p)` for `p ∈ (0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("advantage quantile requires p in (0, 1), got {p}")));
        }
        Ok(self.quantile_unchecked(p))
    }

    /// `F⁻¹(1 - u)`, the advantage of the marginal member when a share `u` of
    /// the type is in sector 1. Zero exactly at `u = r_e`.
    #[inline]
    pub fn upper_quantile(&self, u: f64) -> f64 {
        self.scale * (self.efficient - u) / self.tail_weight(u)
    }

    /// `F(d) = Pr[Δ ≤ d]` by bracketed bisection on the quantile.
    pub fn cdf(&self, d: f64) -> f64 {
        let anchor = 1.0 - self.efficient;
        if d == 0.0 {
            return anchor;
        }
        if d.is_nan() {
            return f64::NAN;
        }
        if d == f64::INFINITY {
            return 1.0;
        }
        if d == f64::NEG_INFINITY {
            return 0.0;
        }
        let (mut lo, mut hi) = if d > 0.0 {
            let lo = anchor;
            let mut gap = 1.0 - anchor;
            let mut hi = anchor;
            while gap > 1e-300 {
                gap *= 0.5;
                hi = 1.0 - gap;
                if hi >= 1.0 || self.quantile_unchecked(hi) >= d {
                    break;
                }
            }
            (lo, hi)
        } else {
            let hi = anchor;
            let mut lo = anchor;
            while lo > 1e-300 {
                lo *= 0.5;
                if self.quantile_unchecked(lo) <= d {
                    break;
                }
            }
            (lo, hi)
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 1e-14 {
                break;
            }
            if self.quantile_unchecked(mid) < d {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// All structural primitives of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu: PerType<f64>,
    pub pref: PerType<PreferenceSpec>,
    pub adv: PerType<AdvantageSpec>,
    pub sigma: f64,
}

impl ModelParams {
    pub fn new(mu: PerType<f64>, pref: PerType<PreferenceSpec>, adv: PerType<AdvantageSpec>, sigma: f64) -> Result<Self> {
        for t in TypeId::ALL {
            if !(mu[t] > 0.0 && mu[t].is_finite()) {
                return Err(Error::InvalidParameter(format!("mass mu_{} must be > 0, got {}", t.as_str(), mu[t])));
            }
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("preference scale sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { mu, pref, adv, sigma })
    }

    /// Unit masses and advantage scales with `c_t = γ_t`, so the preference
    /// ratios equal the given gammas.
    pub fn from_gammas(gamma_w: f64, gamma_m: f64, re_w: f64, re_m: f64, beta: f64) -> Result<Self> {
        Self::new(
            PerType::splat(1.0),
            PerType::new(PreferenceSpec::new(gamma_w)?, PreferenceSpec::new(gamma_m)?),
            PerType::new(AdvantageSpec::new(1.0, re_w, beta)?, AdvantageSpec::new(1.0, re_m, beta)?),
            1.0,
        )
    }

    /// Common tail exponent (both types share it in the wire format).
    pub fn beta(&self) -> f64 {
        self.adv.w.beta()
    }

    /// `r = μ_w / μ_m`.
    pub fn mass_ratio(&self) -> f64 {
        self.mu.w / self.mu.m
    }

    /// Other-to-own mass ratio `z` that enters `g` for type `t`: `1/r` for w, `r` for m.
    pub fn z(&self, t: TypeId) -> f64 {
        self.mu[t.other()] / self.mu[t]
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("preference scale sigma must be >= 0, got {sigma}")));
        }
        self.sigma = sigma;
        Ok(self)
    }

    pub fn efficient(&self) -> PerType<f64> {
        self.adv.map(|a| a.efficient())
    }
}

/// `γ_w = (μ_m/μ_w)(c_w/C_w)`, `γ_m = (μ_w/μ_m)(c_m/C_m)`.
pub fn gammas(params: &ModelParams) -> PerType<f64> {
    let g = |t: TypeId| params.z(t) * params.pref[t].strength() / params.adv[t].scale();
    PerType::new(g(TypeId::W), g(TypeId::M))
}

/// `h_t(u)`.
pub fn h_eval(pref: &PreferenceSpec, u: f64) -> Result<f64> {
    pref.h(u)
}

/// `g_t(x, y, z)` with boundary limits.
pub fn g_eval(pref: &PreferenceSpec, x: f64, y: f64, z: f64) -> Result<f64> {
    pref.g(x, y, z)
}

pub fn advantage_quantile(adv: &AdvantageSpec, p: f64) -> Result<f64> {
    adv.quantile(p)
}

pub fn advantage_cdf(adv: &AdvantageSpec, d: f64) -> f64 {
    adv.cdf(d)
}

/// Sector-1 shares `(r_w, r_m)` of each type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub r_w: f64,
    pub r_m: f64,
}

impl Composition {
    pub fn new(r_w: f64, r_m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r_w) || !(0.0..=1.0).contains(&r_m) {
            return Err(Error::Domain(format!("composition must lie in [0, 1]^2, got ({r_w}, {r_m})")));
        }
        Ok(Self { r_w, r_m })
    }

    /// Clamps both coordinates into `[0, 1]`.
    pub fn clamped(r_w: f64, r_m: f64) -> Self {
        Self { r_w: r_w.clamp(0.0, 1.0), r_m: r_m.clamp(0.0, 1.0) }
    }

    pub fn get(&self, t: TypeId) -> f64 {
        match t {
            TypeId::W => self.r_w,
            TypeId::M => self.r_m,
        }
    }

    pub fn set(&mut self, t: TypeId, v: f64) {
        match t {
            TypeId::W => self.r_w = v,
            TypeId::M => self.r_m = v,
        }
    }

    pub fn is_interior(&self) -> bool {
        self.r_w > 0.0 && self.r_w < 1.0 && self.r_m > 0.0 && self.r_m < 1.0
    }

    pub fn linf(&self, other: &Composition) -> f64 {
        (self.r_w - other.r_w).abs().max((self.r_m - other.r_m).abs())
    }

    /// `(μ_1w, μ_1m, μ_2w, μ_2m)`.
    pub fn sector_masses(&self, params: &ModelParams) -> [f64; 4] {
        [
            params.mu.w * self.r_w,
            params.mu.m * self.r_m,
            params.mu.w * (1.0 - self.r_w),
            params.mu.m * (1.0 - self.r_m),
        ]
    }

    /// `|r_w - r_m|`.
    pub fn segregation(&self) -> f64 {
        (self.r_w - self.r_m).abs()
    }
}

/// Within-sector type shares; `None` marks an empty sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorShares {
    pub sector1: Option<PerType<f64>>,
    pub sector2: Option<PerType<f64>>,
}

pub fn sector_shares(comp: &Composition, params: &ModelParams) -> SectorShares {
    let [m1w, m1m, m2w, m2m] = comp.sector_masses(params);
    let split = |a: f64, b: f64| {
        let total = a + b;
        (total > 0.0).then(|| PerType::new(a / total, b / total))
    };
    SectorShares { sector1: split(m1w, m1m), sector2: split(m2w, m2m) }
}

/// Flat JSON form with keys `mu_w, mu_m, c_w, c_m, C_w, C_m, beta, re_w, re_m, sigma`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParamsJson {
    pub mu_w: f64,
    pub mu_m: f64,
    pub c_w: f64,
    pub c_m: f64,
    #[serde(rename = "C_w")]
    pub big_c_w: f64,
    #[serde(rename = "C_m")]
    pub big_c_m: f64,
    pub beta: f64,
    pub re_w: f64,
    pub re_m: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn default_sigma() -> f64 {
    1.0
}

impl TryFrom<ModelParamsJson> for ModelParams {
    type Error = Error;

    fn try_from(j: ModelParamsJson) -> Result<Self> {
        ModelParams::new(
            PerType::new(j.mu_w, j.mu_m),
            PerType::new(PreferenceSpec::new(j.c_w)?, PreferenceSpec::new(j.c_m)?),
            PerType::new(AdvantageSpec::new(j.big_c_w, j.re_w, j.beta)?, AdvantageSpec::new(j.big_c_m, j.re_m, j.beta)?),
            j.sigma,
        )
    }
}

impl From<ModelParams> for ModelParamsJson {
    fn from(p: ModelParams) -> Self {
        Self {
            mu_w: p.mu.w,
            mu_m: p.mu.m,
            c_w: p.pref.w.strength(),
            c_m: p.pref.m.strength(),
            big_c_w: p.adv.w.scale(),
            big_c_m: p.adv.m.scale(),
            beta: p.beta(),
            re_w: p.adv.w.efficient(),
            re_m: p.adv.m.efficient(),
            sigma: p.sigma,
        }
    }
}

impl Serialize for ModelParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelParamsJson::from(*self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModelParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ModelParamsJson::deserialize(d)?;
        ModelParams::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adv(c: f64, re: f64, beta: f64) -> AdvantageSpec {
        AdvantageSpec::new(c, re, beta).unwrap()
    }

    #[test]
    fn h_values() {
        assert_eq!(PreferenceSpec::new(1.0).unwrap().h(1.0).unwrap(), 1.0);
        assert_eq!(PreferenceSpec::new(0.0).unwrap().h(0.3).unwrap(), 0.0);
        assert_eq!(PreferenceSpec::new(2.0).unwrap().h(0.5).unwrap(), 4.0);
        assert!(matches!(PreferenceSpec::new(1.0).unwrap().h(0.0), Err(Error::Domain(_))));
        assert!(PreferenceSpec::new(-0.1).is_err());
    }

    #[test]
    fn g_values_and_limits() {
        let p = PreferenceSpec::new(1.0).unwrap();
        assert_eq!(p.g(0.5, 0.5, 2.0).unwrap(), 0.0);
        assert!((p.g(0.4, 0.6, 1.0).unwrap() - 0.2 / 0.24).abs() < 1e-15);
        assert_eq!(p.g(0.0, 0.5, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(p.g(1.0, 0.5, 1.0).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(p.g(1.2, 0.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(p.g(0.5, -0.1, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn g_matches_definition_through_h() {
        // g(x, y, z) = h(1/(1 + z y/x)) - h(1/(1 + z (1-y)/(1-x)))
        let p = PreferenceSpec::new(0.7).unwrap();
        for &(x, y, z) in &[(0.3, 0.8, 0.5), (0.9, 0.1, 2.0), (0.45, 0.46, 1.3)] {
            let direct = p.h(1.0 / (1.0 + z * y / x)).unwrap() - p.h(1.0 / (1.0 + z * (1.0 - y) / (1.0 - x))).unwrap();
            assert!((p.g(x, y, z).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_values() {
        assert_eq!(adv(1.0, 0.5, 1.0).quantile(0.5).unwrap(), 0.0);
        assert!((adv(1.0, 0.5, 1.0).quantile(0.75).unwrap() - 0.25 / (0.25 * 0.75)).abs() < 1e-14);
        assert_eq!(adv(2.0, 0.4, 1.0).quantile(0.6).unwrap(), 0.0);
        assert!(adv(1.0, 0.5, 1.0).quantile(0.0).is_err());
        assert!(adv(1.0, 0.5, 1.0).quantile(1.0).is_err());
    }

    #[test]
    fn quantile_zero_at_efficient_point_exactly() {
        for &re in &[0.1, 0.123456789, 0.3, 0.4, 0.5, 0.6, 0.7, 0.9, 0.987] {
            for &beta in &[0.05, 0.5, 1.0, 2.0] {
                // Thick tails are rejected for lopsided r_e; skip those.
                let Ok(a) = AdvantageSpec::new(1.7, re, beta) else { continue };
                assert_eq!(a.quantile(1.0 - re).unwrap(), 0.0);
                assert_eq!(a.upper_quantile(re), 0.0);
            }
        }
    }

    #[test]
    fn cdf_values() {
        let a = adv(1.0, 0.5, 1.0);
        assert_eq!(a.cdf(0.0), 0.5);
        assert!((a.cdf(4.0 / 3.0) - 0.75).abs() < 1e-9);
        assert!(a.cdf(1e12) > 1.0 - 1e-9);
        assert!(a.cdf(-1e12) < 1e-9);
        assert_eq!(a.cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn cdf_inverts_quantile_on_grid() {
        for &(c, re, beta) in &[(1.0, 0.4, 0.05), (1.0, 0.6, 1.0), (2.5, 0.7, 2.0), (0.3, 0.2, 0.5)] {
            let a = adv(c, re, beta);
            for i in 0..1000 {
                let p = 0.001 + 0.998 * i as f64 / 999.0;
                let d = a.quantile(p).unwrap();
                assert!((a.cdf(d) - p).abs() < 1e-9, "p = {p}, spec = {a:?}");
            }
        }
    }

    #[test]
    fn non_monotone_quantile_rejected() {
        // β large with r_e away from 1/2 bends the quantile backwards.
        assert!(AdvantageSpec::new(1.0, 0.2, 10.0).is_err());
        assert!(AdvantageSpec::new(1.0, 0.0, 1.0).is_err());
        assert!(AdvantageSpec::new(0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn gamma_values() {
        let p = ModelParams::from_gammas(0.11, 0.11, 0.4, 0.6, 0.05).unwrap();
        let g = gammas(&p);
        assert!((g.w - 0.11).abs() < 1e-15 && (g.m - 0.11).abs() < 1e-15);

        let p = ModelParams::new(
            PerType::new(1.0, 2.0),
            PerType::new(PreferenceSpec::new(1.0).unwrap(), PreferenceSpec::new(0.0).unwrap()),
            PerType::new(adv(4.0, 0.4, 1.0), adv(1.0, 0.6, 1.0)),
            1.0,
        )
        .unwrap();
        let g = gammas(&p);
        assert_eq!(g.w, 0.5);
        assert_eq!(g.m, 0.0);
    }

    #[test]
    fn shares() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let s = sector_shares(&Composition::new(0.5, 0.5).unwrap(), &p);
        assert_eq!(s.sector1.unwrap().w, 0.5);
        let s = sector_shares(&Composition::new(0.2, 0.8).unwrap(), &p);
        assert!((s.sector1.unwrap().w - 0.2).abs() < 1e-15);
        let s1 = s.sector1.unwrap();
        assert!((s1.w + s1.m - 1.0).abs() < 1e-15);
        let s = sector_shares(&Composition::new(0.0, 0.5).unwrap(), &p);
        assert_eq!(s.sector1.unwrap().w, 0.0);
        let s = sector_shares(&Composition::new(0.0, 0.0).unwrap(), &p);
        assert!(s.sector1.is_none());
        assert!(s.sector2.is_some());
    }

    #[test]
    fn sector_masses_sum_to_population() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let c = Composition::new(0.3, 0.9).unwrap();
        let total: f64 = c.sector_masses(&p).iter().sum();
        assert!((total - 2.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_and_default_sigma() {
        let text = r#"{"mu_w":1,"mu_m":1,"c_w":0.11,"c_m":0.11,"C_w":1,"C_m":1,"beta":0.05,"re_w":0.4,"re_m":0.6}"#;
        let p: ModelParams = serde_json::from_str(text).unwrap();
        assert_eq!(p.sigma, 1.0);
        let back: ModelParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p, back);
        let bad = r#"{"mu_w":1,"mu_m":1,"c_w":0.11,"c_m":0.11,"C_w":1,"C_m":1,"beta":0.05,"re_w":0.4,"re_m":0.6,"extra":1}"#;
        assert!(serde_json::from_str::<ModelParams>(bad).is_err());
    }
}
