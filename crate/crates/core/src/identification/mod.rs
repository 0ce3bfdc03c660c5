//! Moment-inequality bounds linking observed incomes and compositions to the
//! structural parameters, and the identified set over a parameter grid.
//!
//! An individual of type `t` chooses sector 1 iff `Δ > g*_t + ξ`, where `g*_t`
//! is the composition term at the observed compositions and `ξ` is noise
//! independent of `Δ`. Since both incomes are at least the minimum wage `w̲`,
//!
//! ```text
//! ∫ Pr(g* + ξ < Δ ≤ y − w̲) dF_ξ ≥ Pr(Y ≤ y, D = 1, t)
//! ∫ Pr(w̲ − y ≤ Δ ≤ g* + ξ) dF_ξ ≥ Pr(Y ≤ y, D = 2, t)
//! ```
//!
//! with left sides scaled by the type's population share.

mod data;
mod quadrature;
mod search;
mod simulation;

use serde::{Deserialize, Serialize};

use crate::equilibrium::enumerate_equilibria;
use crate::error::{Error, Result};
use crate::model::{AdvantageSpec, Composition, ModelParams, PerType, PreferenceSpec, TypeId};

pub use data::{read_observed, read_observed_from, write_observed, write_observed_to, DataSidecar};
pub use quadrature::{gauss_legendre, NoiseFamily, NoiseSpec, GAUSS_NODES};
pub use search::{identified_set, write_identified_csv, Axis, CandidateDiagnostic, GridSpec, IdentifiedSet};
pub use simulation::simulate_data;

/// Violations are slacks below this.
pub const SLACK_TOL: f64 = -1e-9;
/// Quantile levels in the default income grid.
pub const DEFAULT_Y_POINTS: usize = 50;
/// Enumeration resolution used by the consistency check.
const CONSISTENCY_GRID: usize = 64;
const CONSISTENCY_SOLVER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    #[serde(rename = "type")]
    pub type_id: TypeId,
    /// 1 or 2.
    pub sector: u8,
    pub income: f64,
}

/// Income samples with the observed compositions, `μ_w/μ_m` and the minimum wage.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedData {
    samples: Vec<Sample>,
    observed_comp: Composition,
    pop_ratio: f64,
    min_wage: f64,
    /// Sorted incomes per `(type, sector)`, indexed by `cell`.
    sorted: [Vec<f64>; 4],
}

fn cell(t: TypeId, sector: u8) -> usize {
    2 * (t as usize) + usize::from(sector == 2)
}

fn check_sector(sector: u8) -> Result<()> {
    if sector == 1 || sector == 2 {
        Ok(())
    } else {
        Err(Error::Argument(format!("sector must be 1 or 2, got {sector}")))
    }
}

impl ObservedData {
    pub fn new(samples: Vec<Sample>, observed_comp: Composition, pop_ratio: f64, min_wage: f64) -> Result<Self> {
        if !(pop_ratio > 0.0 && pop_ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!("population ratio must be positive, got {pop_ratio}")));
        }
        if !(min_wage >= 0.0 && min_wage.is_finite()) {
            return Err(Error::InvalidParameter(format!("minimum wage must be nonnegative, got {min_wage}")));
        }
        let observed_comp = Composition::new(observed_comp.r_w, observed_comp.r_m)?;
        let mut sorted: [Vec<f64>; 4] = Default::default();
        for (i, s) in samples.iter().enumerate() {
            if s.sector != 1 && s.sector != 2 {
                return Err(Error::Data { row: i + 1, message: format!("sector must be 1 or 2, got {}", s.sector) });
            }
            if !(s.income.is_finite() && s.income >= min_wage) {
                return Err(Error::Data { row: i + 1, message: format!("income {} below minimum wage {min_wage}", s.income) });
            }
            sorted[cell(s.type_id, s.sector)].push(s.income);
        }
        for v in &mut sorted {
            v.sort_by(f64::total_cmp);
        }
        Ok(Self { samples, observed_comp, pop_ratio, min_wage, sorted })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn observed_comp(&self) -> Composition {
        self.observed_comp
    }

    pub fn pop_ratio(&self) -> f64 {
        self.pop_ratio
    }

    pub fn min_wage(&self) -> f64 {
        self.min_wage
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `μ_t / (μ_w + μ_m)`.
    pub fn population_share(&self, t: TypeId) -> f64 {
        match t {
            TypeId::W => self.pop_ratio / (1.0 + self.pop_ratio),
            TypeId::M => 1.0 / (1.0 + self.pop_ratio),
        }
    }

    /// Sector-1 fraction of each type's samples (`NaN` for an absent type).
    pub fn sample_shares(&self) -> PerType<f64> {
        PerType::new(TypeId::W, TypeId::M).map(|t| {
            let (a, b) = (self.sorted[cell(t, 1)].len(), self.sorted[cell(t, 2)].len());
            a as f64 / (a + b) as f64
        })
    }

    fn count_le(&self, t: TypeId, sector: u8, y: f64) -> usize {
        self.sorted[cell(t, sector)].partition_point(|&v| v <= y)
    }
}

/// `Pr(Y ≤ y, D = sector, t)` over all samples.
pub fn empirical_joint_cdf(data: &ObservedData, y: f64, sector: u8, t: TypeId) -> Result<f64> {
    check_sector(sector)?;
    if data.is_empty() {
        return Err(Error::Argument("empty dataset".into()));
    }
    Ok(data.count_le(t, sector, y) as f64 / data.len() as f64)
}

/// `Pr(Y > y, D = sector, t)` over all samples.
pub fn empirical_joint_tail(data: &ObservedData, y: f64, sector: u8, t: TypeId) -> Result<f64> {
    check_sector(sector)?;
    if data.is_empty() {
        return Err(Error::Argument("empty dataset".into()));
    }
    let n = data.sorted[cell(t, sector)].len();
    Ok((n - data.count_le(t, sector, y)) as f64 / data.len() as f64)
}

/// One point of the parametric family, with `β` fixed by the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateParams {
    pub re_w: f64,
    pub re_m: f64,
    pub c_w: f64,
    pub c_m: f64,
    #[serde(rename = "C_w")]
    pub big_c_w: f64,
    #[serde(rename = "C_m")]
    pub big_c_m: f64,
    pub beta: f64,
}

impl CandidateParams {
    /// Model parameters with `μ = (pop_ratio, 1)` and `σ = 1`.
    pub fn to_params(&self, pop_ratio: f64) -> Result<ModelParams> {
        ModelParams::new(
            PerType::new(pop_ratio, 1.0),
            PerType::new(PreferenceSpec::new(self.c_w)?, PreferenceSpec::new(self.c_m)?),
            PerType::new(AdvantageSpec::new(self.big_c_w, self.re_w, self.beta)?, AdvantageSpec::new(self.big_c_m, self.re_m, self.beta)?),
            1.0,
        )
    }

    pub fn from_params(params: &ModelParams) -> Self {
        let s = params.sigma;
        Self {
            re_w: params.adv.w.efficient(),
            re_m: params.adv.m.efficient(),
            c_w: s * params.pref.w.strength(),
            c_m: s * params.pref.m.strength(),
            big_c_w: params.adv.w.scale(),
            big_c_m: params.adv.m.scale(),
            beta: params.beta(),
        }
    }
}

/// Composition term at the observed compositions, `w` using `z = 1/pop_ratio`.
pub fn g_star(candidate: &CandidateParams, data: &ObservedData) -> Result<PerType<f64>> {
    let comp = data.observed_comp;
    if !comp.is_interior() {
        return Err(Error::Boundary {
            r_w: comp.r_w,
            r_m: comp.r_m,
            reason: "the composition term is infinite at a boundary composition".into(),
        });
    }
    let z = 1.0 / data.pop_ratio;
    Ok(PerType::new(
        PreferenceSpec::new(candidate.c_w)?.g(comp.r_w, comp.r_m, z)?,
        PreferenceSpec::new(candidate.c_m)?.g(comp.r_m, comp.r_w, 1.0 / z)?,
    ))
}

/// Unscaled left side for a known advantage law and `g*`.
fn lhs_core(adv: &AdvantageSpec, g: f64, y: f64, side: u8, noise: &NoiseSpec, min_wage: f64) -> f64 {
    let d = y - min_wage;
    if noise.is_degenerate() {
        return match side {
            1 => (adv.cdf(d) - adv.cdf(g)).max(0.0),
            _ => (adv.cdf(g) - adv.cdf(-d)).max(0.0),
        };
    }
    // In probability space of the noise, split where the integrand's max(0, ·) kinks.
    let inner = |u: f64| adv.cdf(g + noise.quantile(u));
    let v = match side {
        1 => {
            let k = noise.cdf(d - g);
            adv.cdf(d) * k - quadrature::integrate(inner, 0.0, k)
        }
        _ => {
            let k = noise.cdf(-d - g);
            quadrature::integrate(inner, k, 1.0) - adv.cdf(-d) * (1.0 - k)
        }
    };
    v.max(0.0)
}

/// Left side of the sector-`side` inequality for type `t` at income `y`.
pub fn lhs_moment(candidate: &CandidateParams, t: TypeId, y: f64, side: u8, noise: &NoiseSpec, data: &ObservedData) -> Result<f64> {
    check_sector(side)?;
    noise.validate()?;
    let params = candidate.to_params(data.pop_ratio)?;
    let g = g_star(candidate, data)?;
    Ok(data.population_share(t) * lhs_core(&params.adv[t], g[t], y, side, noise, data.min_wage))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub type_id: TypeId,
    pub y: f64,
    pub side: u8,
    /// `lhs − rhs`.
    pub slack: f64,
}

/// Empirical right sides `Pr(Y ≤ y, D = side, t)` for every `(t, side, y)`.
pub(crate) struct RightSides {
    values: [Vec<f64>; 4],
}

impl RightSides {
    pub(crate) fn new(data: &ObservedData, y_grid: &[f64]) -> Result<Self> {
        if y_grid.is_empty() {
            return Err(Error::Argument("income grid is empty".into()));
        }
        if let Some(y) = y_grid.iter().find(|&&y| !(y >= data.min_wage && y.is_finite())) {
            return Err(Error::Argument(format!("income grid point {y} is below the minimum wage {}", data.min_wage)));
        }
        let mut values: [Vec<f64>; 4] = Default::default();
        for t in TypeId::ALL {
            for side in [1, 2] {
                values[cell(t, side)] =
                    y_grid.iter().map(|&y| empirical_joint_cdf(data, y, side, t)).collect::<Result<_>>()?;
            }
        }
        Ok(Self { values })
    }
}

/// Every `(t, y, side)` slack for a candidate, type-major then side then `y`.
pub(crate) fn slacks(
    candidate: &CandidateParams,
    data: &ObservedData,
    y_grid: &[f64],
    noise: &NoiseSpec,
    rhs: &RightSides,
) -> Result<Vec<Violation>> {
    let params = candidate.to_params(data.pop_ratio)?;
    let g = g_star(candidate, data)?;
    let mut out = Vec::with_capacity(4 * y_grid.len());
    for t in TypeId::ALL {
        let share = data.population_share(t);
        for side in [1u8, 2] {
            for (i, &y) in y_grid.iter().enumerate() {
                let lhs = share * lhs_core(&params.adv[t], g[t], y, side, noise, data.min_wage);
                out.push(Violation { type_id: t, y, side, slack: lhs - rhs.values[cell(t, side)][i] });
            }
        }
    }
    Ok(out)
}

/// All inequality violations (slack below `-1e-9`) on `y_grid`.
pub fn check_inequalities(candidate: &CandidateParams, data: &ObservedData, y_grid: &[f64], noise: &NoiseSpec) -> Result<Vec<Violation>> {
    noise.validate()?;
    let rhs = RightSides::new(data, y_grid)?;
    Ok(slacks(candidate, data, y_grid, noise, &rhs)?.into_iter().filter(|v| v.slack < SLACK_TOL).collect())
}

/// Whether some equilibrium of the candidate lies within `tol` (L∞) of the
/// observed compositions.
pub fn equilibrium_consistent(candidate: &CandidateParams, data: &ObservedData, tol: f64) -> Result<bool> {
    if tol >= 1.0 {
        return Ok(true);
    }
    let params = candidate.to_params(data.pop_ratio)?;
    let eqs = enumerate_equilibria(&params, CONSISTENCY_GRID, CONSISTENCY_SOLVER_TOL)?;
    Ok(eqs.iter().any(|e| e.comp.linf(&data.observed_comp) <= tol))
}

/// `n` quantiles of the pooled incomes at levels `k/(n+1)`.
pub fn default_y_grid(data: &ObservedData, n: usize) -> Result<Vec<f64>> {
    if data.is_empty() || n == 0 {
        return Err(Error::Argument("default income grid needs data and at least one point".into()));
    }
    let mut all: Vec<f64> = data.samples.iter().map(|s| s.income).collect();
    all.sort_by(f64::total_cmp);
    let last = (all.len() - 1) as f64;
    let mut grid: Vec<f64> = (1..=n).map(|k| all[(k as f64 / (n + 1) as f64 * last).round() as usize]).collect();
    grid.dedup();
    Ok(grid)
}
