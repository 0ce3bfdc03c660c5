//! Best-response dynamics `ṙ_t = e_t(r)`: flow evaluation with boundary
//! limits, fixed-step integration, state nudges, phase portraits and basins.
//!
//! The integrator runs on a rescaled clock. It follows `ρ v / (1 + ρ‖v‖∞)`,
//! which has the same orbits and rest points as `v`; the constant `ρ ≤ 1` is
//! chosen from the fastest eigenvalue among the known equilibria so that
//! explicit steps stay stable near stiff attractors.

mod basins;
mod portrait;
pub mod render;

use serde::Serialize;

use crate::equilibrium::{boundary_flow, enumerate_equilibria, CornerSide, EquilibriumPoint, Field};
use crate::error::{Error, Result};
use crate::model::{Composition, ModelParams, PerType, TypeId};

pub use basins::{basins, basins_with, BasinMap};
pub use portrait::{phase_portrait, phase_portrait_with, PhasePortrait, PortraitSample};

pub const DEFAULT_T_END: f64 = 500.0;
pub const DEFAULT_DT: f64 = 0.01;
pub const SNAP_RADIUS: f64 = 1e-4;
/// Enumeration settings used when a dynamics routine needs the equilibrium set.
pub const ENUM_GRID: usize = 64;
pub const ENUM_TOL: f64 = 1e-10;

const REST_SPEED: f64 = 1e-10;
const REST_STEPS: usize = 10;

/// Velocity of the composition, in income units per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Velocity {
    pub v_w: f64,
    pub v_m: f64,
}

impl Velocity {
    pub fn norm(&self) -> f64 {
        self.v_w.abs().max(self.v_m.abs())
    }
}

pub(crate) fn flow_field(field: &Field, r_w: f64, r_m: f64) -> [f64; 2] {
    let comp = Composition { r_w, r_m };
    let mut v = [0.0; 2];
    for (i, t) in TypeId::ALL.into_iter().enumerate() {
        let x = comp.get(t);
        let y = comp.get(t.other());
        let interior = if x > 0.0 && x < 1.0 { Some(field.e(t, x, y)) } else { None };
        v[i] = match interior {
            Some(e) if !e.is_nan() => e,
            _ => {
                let side = if x < 0.5 { CornerSide::Zero } else { CornerSide::One };
                boundary_flow(field, t, side, y)
            }
        };
    }
    v
}

/// Flow at `comp`. Interior points give the residual; on the boundary a
/// component is zero when the corner condition holds (the flow may not leave
/// the square) and otherwise the inward limit, possibly infinite.
pub fn flow(params: &ModelParams, comp: &Composition) -> Velocity {
    let v = flow_field(&Field::new(params), comp.r_w, comp.r_m);
    Velocity { v_w: v[0], v_m: v[1] }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub t_end: f64,
    pub dt: f64,
    pub snap_radius: f64,
    /// Keep every step in the trajectory; otherwise only the endpoints.
    pub record: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { t_end: DEFAULT_T_END, dt: DEFAULT_DT, snap_radius: SNAP_RADIUS, record: true }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Composition>,
    pub terminal: Composition,
    pub converged_to: Option<EquilibriumPoint>,
}

/// Clock rate `ρ` keeping `ρ |λ| dt ≤ 1` for every known eigenvalue.
pub(crate) fn clock_rate(equilibria: &[EquilibriumPoint], dt: f64) -> f64 {
    let fastest = equilibria
        .iter()
        .flat_map(|e| e.eigenvalues.iter())
        .map(|z| z.norm())
        .filter(|x| x.is_finite())
        .fold(0.0, f64::max);
    if fastest * dt > 1.0 {
        1.0 / (fastest * dt)
    } else {
        1.0
    }
}

fn direction(v: [f64; 2], rho: f64) -> [f64; 2] {
    if v.iter().any(|x| x.is_infinite()) {
        return v.map(|x| if x.is_infinite() { x.signum() } else { 0.0 });
    }
    let r = [rho * v[0], rho * v[1]];
    let n = 1.0 + r[0].abs().max(r[1].abs());
    [r[0] / n, r[1] / n]
}

fn clamp(s: [f64; 2]) -> [f64; 2] {
    [s[0].clamp(0.0, 1.0), s[1].clamp(0.0, 1.0)]
}

/// Nearest equilibrium within `radius` (sup-norm).
pub fn snap<'a>(comp: &Composition, equilibria: &'a [EquilibriumPoint], radius: f64) -> Option<&'a EquilibriumPoint> {
    equilibria
        .iter()
        .map(|e| (e.comp.linf(comp), e))
        .filter(|(d, _)| *d <= radius)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, e)| e)
}

/// Index of the nearest equilibrium within `radius`.
pub(crate) fn snap_index(comp: &Composition, equilibria: &[EquilibriumPoint], radius: f64) -> Option<usize> {
    equilibria
        .iter()
        .enumerate()
        .map(|(i, e)| (e.comp.linf(comp), i))
        .filter(|(d, _)| *d <= radius)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, i)| i)
}

/// Fourth-order Runge–Kutta from `init` with the known equilibria used for
/// snapping and clock calibration.
pub fn integrate_with(
    params: &ModelParams,
    init: &Composition,
    opts: &IntegrateOptions,
    equilibria: &[EquilibriumPoint],
) -> Result<Trajectory> {
    if !(opts.dt > 0.0 && opts.t_end > 0.0 && opts.dt <= opts.t_end) {
        return Err(Error::Argument(format!("need 0 < dt <= t_end, got dt = {}, t_end = {}", opts.dt, opts.t_end)));
    }
    if !(0.0..=1.0).contains(&init.r_w) || !(0.0..=1.0).contains(&init.r_m) {
        return Err(Error::Domain(format!("initial composition ({}, {}) outside [0, 1]^2", init.r_w, init.r_m)));
    }
    let field = Field::new(params);
    let rho = clock_rate(equilibria, opts.dt);
    let dt = opts.dt;
    let rhs = |s: [f64; 2]| direction(flow_field(&field, s[0], s[1]), rho);
    let steps = (opts.t_end / dt).round().max(1.0) as usize;

    let mut s = [init.r_w, init.r_m];
    let mut times = vec![0.0];
    let mut states = vec![*init];
    let mut resting = 0;
    let mut t = 0.0;
    for i in 1..=steps {
        let k1 = rhs(s);
        let k2 = rhs(clamp([s[0] + 0.5 * dt * k1[0], s[1] + 0.5 * dt * k1[1]]));
        let k3 = rhs(clamp([s[0] + 0.5 * dt * k2[0], s[1] + 0.5 * dt * k2[1]]));
        let k4 = rhs(clamp([s[0] + dt * k3[0], s[1] + dt * k3[1]]));
        let next = clamp([
            s[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]);
        t = i as f64 * dt;
        if !(next[0].is_finite() && next[1].is_finite()) {
            return Err(Error::Integration { time: t, last: Composition { r_w: s[0], r_m: s[1] } });
        }
        s = next;
        if opts.record {
            times.push(t);
            states.push(Composition { r_w: s[0], r_m: s[1] });
        }
        let v = flow_field(&field, s[0], s[1]);
        let speed = v[0].abs().max(v[1].abs());
        if speed < REST_SPEED {
            resting += 1;
            if resting >= REST_STEPS {
                break;
            }
        } else {
            resting = 0;
        }
    }
    let terminal = Composition { r_w: s[0], r_m: s[1] };
    if !opts.record {
        times.push(t);
        states.push(terminal);
    }
    let converged_to = snap(&terminal, equilibria, opts.snap_radius).cloned();
    Ok(Trajectory { times, states, terminal, converged_to })
}

/// Integrates with explicit horizon and step; the equilibrium set used for
/// snapping is enumerated on the default grid.
pub fn integrate(params: &ModelParams, init: &Composition, t_end: f64, dt: f64) -> Result<Trajectory> {
    let eqs = enumerate_equilibria(params, ENUM_GRID, ENUM_TOL)?;
    integrate_with(params, init, &IntegrateOptions { t_end, dt, ..Default::default() }, &eqs)
}

/// Minimum share of each type in each sector imposed by a one-time quota.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotaFloor {
    pub sector1: PerType<f64>,
    pub sector2: PerType<f64>,
}

impl QuotaFloor {
    pub fn new(sector1: PerType<f64>, sector2: PerType<f64>) -> Result<Self> {
        for f in [sector1.w, sector1.m, sector2.w, sector2.m] {
            if !(0.0..0.5).contains(&f) {
                return Err(Error::Argument(format!("quota floors must lie in [0, 0.5), got {f}")));
            }
        }
        Ok(Self { sector1, sector2 })
    }

    pub fn uniform(floor: f64) -> Result<Self> {
        Self::new(PerType::splat(floor), PerType::splat(floor))
    }

    /// Clamps each share into `[floor_1, 1 - floor_2]`.
    pub fn apply(&self, comp: &Composition) -> Composition {
        Composition {
            r_w: comp.r_w.clamp(self.sector1.w, 1.0 - self.sector2.w),
            r_m: comp.r_m.clamp(self.sector1.m, 1.0 - self.sector2.m),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NudgeOutcome {
    pub post_nudge: Composition,
    pub settled: EquilibriumPoint,
    /// The settled equilibrium is not the one nearest to the starting state.
    pub tipped: bool,
}

pub fn nudge_and_settle_with(
    params: &ModelParams,
    from: &Composition,
    floor: &QuotaFloor,
    equilibria: &[EquilibriumPoint],
    opts: &IntegrateOptions,
) -> Result<NudgeOutcome> {
    let post_nudge = floor.apply(from);
    let traj = integrate_with(params, &post_nudge, &IntegrateOptions { record: false, ..*opts }, equilibria)?;
    let settled = traj.converged_to.ok_or(Error::Convergence {
        iterations: (opts.t_end / opts.dt).round() as usize,
        last: traj.terminal,
    })?;
    let origin = equilibria.iter().min_by(|a, b| a.comp.linf(from).total_cmp(&b.comp.linf(from)));
    let tipped = match origin {
        Some(o) => o.comp.linf(&settled.comp) > opts.snap_radius,
        None => true,
    };
    Ok(NudgeOutcome { post_nudge, settled, tipped })
}

/// Applies the quota clamp to `from` and integrates to the settled equilibrium.
pub fn nudge_and_settle(params: &ModelParams, from: &Composition, floor: &QuotaFloor) -> Result<NudgeOutcome> {
    let eqs = enumerate_equilibria(params, ENUM_GRID, ENUM_TOL)?;
    nudge_and_settle_with(params, from, floor, &eqs, &IntegrateOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::Stability;

    fn c(a: f64, b: f64) -> Composition {
        Composition::new(a, b).unwrap()
    }

    #[test]
    fn rest_at_equilibria() {
        let p = ModelParams::from_gammas(0.03, 0.03, 0.4, 0.6, 0.05).unwrap();
        for e in enumerate_equilibria(&p, 32, 1e-10).unwrap() {
            assert!(flow(&p, &e.comp).norm() < 1e-6, "{e:?}");
        }
    }

    #[test]
    fn pure_roy_flow_points_to_efficient() {
        let p = ModelParams::from_gammas(0.2, 0.2, 0.4, 0.6, 1.0).unwrap().with_sigma(0.0).unwrap();
        let v = flow(&p, &c(0.2, 0.9));
        assert!(v.v_w > 0.0 && v.v_m < 0.0);
        let v = flow(&p, &c(0.0, 1.0));
        assert_eq!(v.v_w, f64::INFINITY);
        assert_eq!(v.v_m, f64::NEG_INFINITY);
    }

    #[test]
    fn boundary_clamp_at_stable_corner() {
        let p = ModelParams::from_gammas(0.11, 0.11, 0.4, 0.6, 0.05).unwrap();
        let v = flow(&p, &c(0.0, 1.0));
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn stable_point_stays_and_returns() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let eqs = enumerate_equilibria(&p, 16, 1e-12).unwrap();
        let e = eqs[0].comp;
        let tr = integrate_with(&p, &e, &IntegrateOptions::default(), &eqs).unwrap();
        assert!(tr.states.iter().all(|s| s.linf(&e) < 1e-8));
        let tr = integrate_with(&p, &c(e.r_w + 1e-3, e.r_m - 7e-4), &IntegrateOptions::default(), &eqs).unwrap();
        assert!(tr.terminal.linf(&e) < 1e-8);
        assert_eq!(tr.converged_to.unwrap().stability, Stability::Stable);
        assert!(tr.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn states_stay_in_square() {
        let p = ModelParams::from_gammas(0.03, 0.03, 0.4, 0.6, 0.05).unwrap();
        let tr = integrate(&p, &c(0.02, 0.97), 50.0, 0.01).unwrap();
        assert!(tr.states.iter().all(|s| (0.0..=1.0).contains(&s.r_w) && (0.0..=1.0).contains(&s.r_m)));
    }

    #[test]
    fn quota_floor_validation_and_clamp() {
        assert!(QuotaFloor::uniform(0.5).is_err());
        let f = QuotaFloor::uniform(0.1).unwrap();
        assert_eq!(f.apply(&c(0.0, 1.0)), c(0.1, 0.9));
        assert_eq!(f.apply(&c(0.3, 0.5)), c(0.3, 0.5));
    }

    #[test]
    fn zero_floor_does_not_tip() {
        let p = ModelParams::from_gammas(0.03, 0.03, 0.4, 0.6, 0.05).unwrap();
        let eqs = enumerate_equilibria(&p, 32, 1e-10).unwrap();
        let corner = c(0.0, 1.0);
        let out = nudge_and_settle_with(&p, &corner, &QuotaFloor::uniform(0.0).unwrap(), &eqs, &IntegrateOptions::default()).unwrap();
        assert!(!out.tipped);
        assert_eq!(out.settled.comp, corner);
    }

    #[test]
    fn bad_step_rejected() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let o = IntegrateOptions { dt: 2.0, t_end: 1.0, ..Default::default() };
        assert!(matches!(integrate_with(&p, &c(0.5, 0.5), &o, &[]), Err(Error::Argument(_))));
    }
}
