//! Grid search for the identified set.

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{equilibrium_consistent, g_star, slacks, CandidateParams, NoiseSpec, ObservedData, RightSides, SLACK_TOL};
use crate::error::{Error, Result};
use crate::numfmt::fmt_f64;

fn default_consistency_tol() -> f64 {
    1e-3
}

/// `count` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn point(v: f64) -> Self {
        Self { min: v, max: v, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 }).collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.count == 0 || !(self.min <= self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Argument(format!("grid axis {name} needs finite min ≤ max and count ≥ 1, got {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub re_w: Axis,
    pub re_m: Axis,
    pub c_w: Axis,
    pub c_m: Axis,
    #[serde(rename = "C_w")]
    pub big_c_w: Axis,
    #[serde(rename = "C_m")]
    pub big_c_m: Axis,
    pub beta: f64,
    /// L∞ radius for the equilibrium-consistency check.
    #[serde(default = "default_consistency_tol")]
    pub consistency_tol: f64,
}

impl GridSpec {
    /// Candidates in lexicographic order over `(re_w, re_m, c_w, c_m, C_w, C_m)`.
    pub fn candidates(&self) -> Result<Vec<CandidateParams>> {
        let axes = [
            ("re_w", &self.re_w),
            ("re_m", &self.re_m),
            ("c_w", &self.c_w),
            ("c_m", &self.c_m),
            ("C_w", &self.big_c_w),
            ("C_m", &self.big_c_m),
        ];
        for (name, a) in axes {
            a.validate(name)?;
        }
        let vals: Vec<Vec<f64>> = axes.iter().map(|(_, a)| a.values()).collect();
        let mut out = Vec::with_capacity(vals.iter().map(Vec::len).product());
        for &re_w in &vals[0] {
            for &re_m in &vals[1] {
                for &c_w in &vals[2] {
                    for &c_m in &vals[3] {
                        for &big_c_w in &vals[4] {
                            for &big_c_m in &vals[5] {
                                out.push(CandidateParams { re_w, re_m, c_w, c_m, big_c_w, big_c_m, beta: self.beta });
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateDiagnostic {
    pub candidate: CandidateParams,
    /// Smallest `lhs − rhs` over the income grid (`None` when not evaluated).
    pub worst_slack: Option<f64>,
    pub violations: usize,
    pub consistent: bool,
    /// Why the candidate could not be evaluated, if it could not.
    pub invalid: Option<String>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentifiedSet {
    pub grid_spec: GridSpec,
    pub accepted: Vec<CandidateParams>,
    /// One entry per grid candidate, in grid order.
    pub diagnostics: Vec<CandidateDiagnostic>,
}

fn evaluate(c: CandidateParams, grid: &GridSpec, data: &ObservedData, noise: &NoiseSpec, y_grid: &[f64], rhs: &RightSides) -> CandidateDiagnostic {
    let outcome = slacks(&c, data, y_grid, noise, rhs)
        .and_then(|s| Ok((s, equilibrium_consistent(&c, data, grid.consistency_tol)?)));
    match outcome {
        Ok((s, consistent)) => {
            let worst = s.iter().map(|v| v.slack).fold(f64::INFINITY, f64::min);
            let violations = s.iter().filter(|v| v.slack < SLACK_TOL).count();
            CandidateDiagnostic {
                candidate: c,
                worst_slack: Some(worst),
                violations,
                consistent,
                invalid: None,
                accepted: violations == 0 && consistent,
            }
        }
        Err(e) => CandidateDiagnostic {
            candidate: c,
            worst_slack: None,
            violations: 0,
            consistent: false,
            invalid: Some(e.to_string()),
            accepted: false,
        },
    }
}

/// Candidates that pass every inequality on `y_grid` and have an equilibrium
/// near the observed compositions. Candidates whose parameters are invalid
/// are rejected with the reason recorded.
pub fn identified_set(grid: &GridSpec, data: &ObservedData, noise: &NoiseSpec, y_grid: &[f64]) -> Result<IdentifiedSet> {
    noise.validate()?;
    let candidates = grid.candidates()?;
    if let Some(c) = candidates.first() {
        g_star(c, data)?;
    }
    let rhs = RightSides::new(data, y_grid)?;
    let diagnostics: Vec<CandidateDiagnostic> =
        candidates.into_par_iter().map(|c| evaluate(c, grid, data, noise, y_grid, &rhs)).collect();
    let accepted = diagnostics.iter().filter(|d| d.accepted).map(|d| d.candidate).collect();
    Ok(IdentifiedSet { grid_spec: *grid, accepted, diagnostics })
}

/// Accepted candidates, one per row with their worst slack.
pub fn write_identified_csv<W: io::Write>(set: &IdentifiedSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["re_w", "re_m", "c_w", "c_m", "C_w", "C_m", "worst_slack"])?;
    for d in set.diagnostics.iter().filter(|d| d.accepted) {
        let c = d.candidate;
        let slack = d.worst_slack.map_or_else(String::new, fmt_f64);
        w.write_record([fmt_f64(c.re_w), fmt_f64(c.re_m), fmt_f64(c.c_w), fmt_f64(c.c_m), fmt_f64(c.big_c_w), fmt_f64(c.big_c_m), slack])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values() {
        assert_eq!(Axis::point(0.3).values(), vec![0.3]);
        let v = Axis { min: 0.1, max: 0.7, count: 3 }.values();
        assert_eq!(v.len(), 3);
        assert!((v[1] - 0.4).abs() < 1e-15 && v[2] == 0.7);
        assert!(Axis { min: 1.0, max: 0.0, count: 2 }.validate("x").is_err());
    }
}
