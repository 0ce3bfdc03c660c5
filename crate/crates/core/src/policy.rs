//! Policy experiments: flat tax, quotas, subsidies, amenity shifts and
//! participation changes, with before/after equilibrium sets and tipping.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_with, nudge_and_settle_with, snap, IntegrateOptions, QuotaFloor, SNAP_RADIUS};
use crate::equilibrium::{closed_form_regime, enumerate_equilibria, EquilibriumPoint};
use crate::error::{Error, Result};
use crate::model::{gammas, AdvantageSpec, Composition, ModelParams, ModelParamsJson, PerType, PreferenceSpec};

/// Radius for identifying an equilibrium across policy regimes.
pub const MATCH_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Policy {
    /// Sector-1 advantage shrinks to `(1 - τ) Δ`.
    FlatTax { tau: f64 },
    /// One-time floor on every type's share in every sector.
    Quota { floor: f64 },
    /// Multiplies the advantage scales `C_t`.
    Subsidy {
        #[serde(rename = "scale_C")]
        scale_c: PerType<f64>,
    },
    /// Multiplies the preference strengths `c_t`.
    AmenityShift { scale_c: PerType<f64> },
    /// Replaces the type-w mass.
    Participation { new_mu_w: f64 },
}

impl Policy {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Argument(format!("{what} must be positive, got {v}")))
            }
        };
        match *self {
            Policy::FlatTax { tau } => {
                if !(0.0..1.0).contains(&tau) {
                    return Err(Error::Argument(format!("tax rate must lie in [0, 1), got {tau}")));
                }
            }
            Policy::Quota { floor } => {
                if !(0.0..0.5).contains(&floor) {
                    return Err(Error::Argument(format!("quota floor must lie in [0, 0.5), got {floor}")));
                }
            }
            Policy::Subsidy { scale_c } | Policy::AmenityShift { scale_c } => {
                positive(scale_c.w, "scale multiplier")?;
                positive(scale_c.m, "scale multiplier")?;
            }
            Policy::Participation { new_mu_w } => positive(new_mu_w, "new_mu_w")?,
        }
        Ok(())
    }
}

/// Scales both advantage distributions by `1 - τ`.
pub fn apply_tax(params: &ModelParams, tau: f64) -> Result<ModelParams> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::Argument(format!("tax rate must lie in [0, 1), got {tau}")));
    }
    scale_advantage(params, PerType::splat(1.0 - tau))
}

fn scale_advantage(params: &ModelParams, factor: PerType<f64>) -> Result<ModelParams> {
    let a = |t: AdvantageSpec, f: f64| AdvantageSpec::new(t.scale() * f, t.efficient(), t.beta());
    ModelParams::new(params.mu, params.pref, PerType::new(a(params.adv.w, factor.w)?, a(params.adv.m, factor.m)?), params.sigma)
}

fn scale_preference(params: &ModelParams, factor: PerType<f64>) -> Result<ModelParams> {
    let p = |t: PreferenceSpec, f: f64| PreferenceSpec::new(t.strength() * f);
    ModelParams::new(params.mu, PerType::new(p(params.pref.w, factor.w)?, p(params.pref.m, factor.m)?), params.adv, params.sigma)
}

/// Post-tax equilibrium in the interior regime:
/// `r_w^τ = r_w^e - γ_w Δ^e / (1 - τ - γ_w - γ_m)` and symmetrically for m.
pub fn tax_equilibrium(params: &ModelParams, tau: f64) -> Result<Composition> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::Argument(format!("tax rate must lie in [0, 1), got {tau}")));
    }
    if params.beta() != 1.0 {
        return Err(Error::Argument(format!("tax closed form requires beta = 1, got {}", params.beta())));
    }
    let re = params.efficient();
    if !(re.w < re.m) {
        return Err(Error::Argument(format!("tax closed form requires r_w^e < r_m^e, got ({}, {})", re.w, re.m)));
    }
    let g = gammas(params);
    let (gw, gm) = (params.sigma * g.w, params.sigma * g.m);
    let bar = (gw * re.m / re.w + gm).max(gw + gm * (1.0 - re.w) / (1.0 - re.m));
    if !(bar < 1.0 - tau) {
        return Err(Error::Argument(format!(
            "tax rate {tau} pushes the equilibrium into a corner regime (gamma bar {bar} >= {}); solve the taxed parameters in closed form instead",
            1.0 - tau
        )));
    }
    let spread = (re.m - re.w) / (1.0 - tau - gw - gm);
    Ok(Composition { r_w: re.w - gw * spread, r_m: re.m + gm * spread })
}

/// New parameters, plus the state clamp for quotas.
pub fn apply_policy(params: &ModelParams, policy: &Policy) -> Result<(ModelParams, Option<QuotaFloor>)> {
    policy.validate()?;
    Ok(match *policy {
        Policy::FlatTax { tau } => (apply_tax(params, tau)?, None),
        Policy::Quota { floor } => (*params, Some(QuotaFloor::uniform(floor)?)),
        Policy::Subsidy { scale_c } => (scale_advantage(params, scale_c)?, None),
        Policy::AmenityShift { scale_c } => (scale_preference(params, scale_c)?, None),
        Policy::Participation { new_mu_w } => (ModelParams::new(PerType::new(new_mu_w, params.mu.m), params.pref, params.adv, params.sigma)?, None),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContrarianThreshold {
    /// `γ_w r_m^e - (1 - γ_m) r_w^e`.
    pub condition_value: f64,
    pub corner_exists: bool,
    /// Exactly on the threshold.
    pub on_threshold: bool,
    /// `r_m^e / (1 - γ_m)`, the m-share at the corner when it exists.
    pub corner_r_m: f64,
}

/// Existence test for the stable corner `(0, r_m^e / (1 - γ_m))` at `β = 1`.
pub fn contrarian_threshold(params: &ModelParams) -> Result<ContrarianThreshold> {
    if params.beta() != 1.0 {
        return Err(Error::Argument(format!("contrarian threshold requires beta = 1, got {}", params.beta())));
    }
    let g = gammas(params);
    let (gw, gm) = (params.sigma * g.w, params.sigma * g.m);
    let re = params.efficient();
    let condition_value = gw * re.m - (1.0 - gm) * re.w;
    Ok(ContrarianThreshold {
        condition_value,
        corner_exists: condition_value > 0.0 && gm < 1.0 - re.m,
        on_threshold: condition_value == 0.0,
        corner_r_m: re.m / (1.0 - gm),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub grid_n: usize,
    pub tol: f64,
    pub integrate: IntegrateOptions,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { grid_n: 64, tol: 1e-10, integrate: IntegrateOptions { record: false, ..Default::default() } }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PolicyReport {
    pub policy: Policy,
    pub before: Vec<EquilibriumPoint>,
    pub after: Vec<EquilibriumPoint>,
    /// Pre-policy equilibrium the observed composition sits at.
    pub observed_equilibrium: EquilibriumPoint,
    /// Post-policy equilibrium within the matching radius of the observed one.
    pub counterpart: Option<EquilibriumPoint>,
    pub settled_after: EquilibriumPoint,
    pub segregation_before: f64,
    pub segregation_after: f64,
    pub tipped: bool,
    pub disappeared: Vec<EquilibriumPoint>,
}

fn nearest_within<'a>(c: &Composition, eqs: &'a [EquilibriumPoint], radius: f64) -> Option<&'a EquilibriumPoint> {
    snap(c, eqs, radius)
}

/// Runs `policy` from the observed equilibrium and reports how the
/// equilibrium set and the settled state change.
pub fn compare_with(params: &ModelParams, policy: &Policy, observed: &Composition, opts: &CompareOptions) -> Result<PolicyReport> {
    let before = enumerate_equilibria(params, opts.grid_n, opts.tol)?;
    let observed_equilibrium = nearest_within(observed, &before, opts.integrate.snap_radius)
        .cloned()
        .ok_or_else(|| {
            Error::Inconsistent(format!(
                "observed composition ({}, {}) is not within {} of any equilibrium",
                observed.r_w, observed.r_m, opts.integrate.snap_radius
            ))
        })?;
    let (new_params, clamp) = apply_policy(params, policy)?;
    let (after, settled_after) = match clamp {
        Some(floor) => {
            let out = nudge_and_settle_with(params, &observed_equilibrium.comp, &floor, &before, &opts.integrate)?;
            (before.clone(), out.settled)
        }
        None => {
            let after = enumerate_equilibria(&new_params, opts.grid_n, opts.tol)?;
            let tr = integrate_with(&new_params, &observed_equilibrium.comp, &opts.integrate, &after)?;
            let settled = tr.converged_to.ok_or(Error::Convergence {
                iterations: (opts.integrate.t_end / opts.integrate.dt).round() as usize,
                last: tr.terminal,
            })?;
            (after, settled)
        }
    };
    let counterpart = nearest_within(&observed_equilibrium.comp, &after, MATCH_RADIUS).cloned();
    let tipped = match &counterpart {
        Some(c) => c.comp.linf(&settled_after.comp) > SNAP_RADIUS.max(opts.integrate.snap_radius),
        None => true,
    };
    let disappeared = before.iter().filter(|b| nearest_within(&b.comp, &after, MATCH_RADIUS).is_none()).cloned().collect();
    Ok(PolicyReport {
        policy: *policy,
        segregation_before: observed_equilibrium.comp.segregation(),
        segregation_after: settled_after.comp.segregation(),
        before,
        after,
        observed_equilibrium,
        counterpart,
        settled_after,
        tipped,
        disappeared,
    })
}

pub fn compare(params: &ModelParams, policy: &Policy, observed: &Composition) -> Result<PolicyReport> {
    compare_with(params, policy, observed, &CompareOptions::default())
}

/// Returns `params` with one named parameter replaced. Accepts the JSON keys
/// (`mu_w`, `c_w`, `C_w`, `beta`, `re_w`, `sigma`, ...) plus `gamma_w`,
/// `gamma_m` (set `c_t` to realize the ratio) and `tau` (flat tax).
pub fn with_parameter(params: &ModelParams, name: &str, value: f64) -> Result<ModelParams> {
    let mut j = ModelParamsJson::from(*params);
    match name {
        "mu_w" => j.mu_w = value,
        "mu_m" => j.mu_m = value,
        "c_w" => j.c_w = value,
        "c_m" => j.c_m = value,
        "C_w" => j.big_c_w = value,
        "C_m" => j.big_c_m = value,
        "beta" => j.beta = value,
        "re_w" => j.re_w = value,
        "re_m" => j.re_m = value,
        "sigma" => j.sigma = value,
        "gamma_w" => j.c_w = value * j.big_c_w * j.mu_w / j.mu_m,
        "gamma_m" => j.c_m = value * j.big_c_m * j.mu_m / j.mu_w,
        "tau" => return apply_tax(params, value),
        other => return Err(Error::Argument(format!("unknown sweep parameter '{other}'"))),
    }
    ModelParams::try_from(j)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub equilibria: usize,
    pub stable: usize,
    pub settled: Option<Composition>,
    /// The settled equilibrium is not the continuation of the previous row's.
    pub tipped: bool,
    pub points: Vec<EquilibriumPoint>,
}

/// Re-enumerates equilibria at each value of `parameter` and integrates from
/// `start` to the settled equilibrium.
pub fn sweep(params: &ModelParams, parameter: &str, values: &[f64], start: &Composition, opts: &CompareOptions) -> Result<Vec<SweepRow>> {
    let mut rows = values
        .par_iter()
        .map(|&v| {
            let p = with_parameter(params, parameter, v)?;
            let eqs = enumerate_equilibria(&p, opts.grid_n, opts.tol)?;
            let tr = integrate_with(&p, start, &opts.integrate, &eqs)?;
            Ok(SweepRow {
                value: v,
                equilibria: eqs.len(),
                stable: eqs.iter().filter(|e| e.is_stable()).count(),
                settled: tr.converged_to.map(|e| e.comp),
                tipped: false,
                points: eqs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for i in 1..rows.len() {
        rows[i].tipped = match (rows[i - 1].settled, rows[i].settled) {
            (Some(a), Some(b)) => a.linf(&b) > MATCH_RADIUS,
            (None, None) => false,
            _ => true,
        };
    }
    Ok(rows)
}

/// Equilibria of the `β = 1` model after a tax, through the closed form.
pub fn taxed_closed_form(params: &ModelParams, tau: f64) -> Result<Composition> {
    Ok(closed_form_regime(&apply_tax(params, tau)?)?.comp)
}
