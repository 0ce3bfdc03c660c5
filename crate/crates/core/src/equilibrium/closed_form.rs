//! Closed-form equilibria for `β = 1`.
//!
//! With `γ_w + γ_m < 1` the equilibrium is unique and lies in one of four
//! regions: interior, `(0, r_m)`, `(r_w, 1)` or `(0, 1)`. The preference scale
//! enters through the effective ratios `σ γ_t`.

use serde::{Deserialize, Serialize};

use super::{make_point, EquilibriumPoint};
use crate::error::{Error, Result};
use crate::model::{gammas, Composition, ModelParams};

/// Selected region and its composition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormRegime {
    /// 1 interior, 2 `(0, r_m)`, 3 `(r_w, 1)`, 4 `(0, 1)`.
    pub case: u8,
    /// Some tested inequality holds with equality; the region assignment is
    /// then a measure-zero tie.
    pub on_boundary: bool,
    pub comp: Composition,
}

pub fn closed_form_regime(params: &ModelParams) -> Result<ClosedFormRegime> {
    if params.beta() != 1.0 || params.adv.m.beta() != 1.0 {
        return Err(Error::Argument(format!("closed form requires beta = 1, got {}", params.beta())));
    }
    let re = params.efficient();
    let (rw, rm) = (re.w, re.m);
    if !(rw < rm) {
        return Err(Error::Argument(format!("closed form requires r_w^e < r_m^e, got {rw} >= {rm}")));
    }
    let g = gammas(params);
    let (gw, gm) = (params.sigma * g.w, params.sigma * g.m);
    if !(gw + gm < 1.0) {
        return Err(Error::Argument(format!("closed form requires gamma_w + gamma_m < 1, got {}", gw + gm)));
    }

    let a = gw * rm / rw + gm;
    let b = gw + gm * (1.0 - rw) / (1.0 - rm);
    let ties = [a - 1.0, b - 1.0, gm - (1.0 - rm), gw - rw];
    let on_boundary = ties.contains(&0.0);

    let (case, r_w, r_m) = if a.max(b) < 1.0 {
        let spread = (rm - rw) / (1.0 - gw - gm);
        (1, rw - gw * spread, rm + gm * spread)
    } else if a >= 1.0 && gm < 1.0 - rm {
        (2, 0.0, rm / (1.0 - gm))
    } else if gw < rw && b >= 1.0 {
        (3, (rw - gw) / (1.0 - gw), 1.0)
    } else if gw >= rw && gm >= 1.0 - rm {
        (4, 0.0, 1.0)
    } else {
        return Err(Error::Inconsistent(format!(
            "gamma = ({gw}, {gm}), r_e = ({rw}, {rm}) fall in none of the four closed-form regions"
        )));
    };
    Ok(ClosedFormRegime { case, on_boundary, comp: Composition::clamped(r_w, r_m) })
}

/// The unique `β = 1` equilibrium, classified.
pub fn solve_closed_form_beta1(params: &ModelParams) -> Result<EquilibriumPoint> {
    let regime = closed_form_regime(params)?;
    make_point(params, regime.comp)
}
