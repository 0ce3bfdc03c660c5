//! Basins of attraction on a grid of initial compositions.

use rayon::prelude::*;
use serde::Serialize;

use super::{integrate_with, snap_index, IntegrateOptions, ENUM_GRID, ENUM_TOL};
use crate::equilibrium::{enumerate_equilibria, EquilibriumPoint};
use crate::error::{Error, Result};
use crate::model::{Composition, ModelParams};

#[derive(Debug, Clone, Serialize)]
pub struct BasinMap {
    pub resolution: usize,
    /// Row-major over `r_w` (outer) then `r_m`; `None` marks cells whose
    /// trajectory did not settle near any equilibrium.
    pub labels: Vec<Option<usize>>,
    pub equilibria: Vec<EquilibriumPoint>,
}

impl BasinMap {
    /// Cell center of flat index `k`.
    pub fn cell(&self, k: usize) -> Composition {
        let n = self.resolution as f64;
        Composition { r_w: ((k / self.resolution) as f64 + 0.5) / n, r_m: ((k % self.resolution) as f64 + 0.5) / n }
    }

    /// Equilibrium indices whose basin is nonempty, ascending.
    pub fn nonempty(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.labels.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn unresolved(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }
}

pub fn basins_with(params: &ModelParams, n: usize, equilibria: Vec<EquilibriumPoint>, opts: &IntegrateOptions) -> Result<BasinMap> {
    if n < 16 {
        return Err(Error::Argument(format!("basin resolution must be at least 16, got {n}")));
    }
    let opts = IntegrateOptions { record: false, ..*opts };
    let labels = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let init = Composition { r_w: ((k / n) as f64 + 0.5) / n as f64, r_m: ((k % n) as f64 + 0.5) / n as f64 };
            let tr = integrate_with(params, &init, &opts, &equilibria)?;
            Ok(snap_index(&tr.terminal, &equilibria, opts.snap_radius))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasinMap { resolution: n, labels, equilibria })
}

/// Integrates from every cell center (`t_end = 500`, `dt = 0.01`) and labels
/// the cell by the equilibrium its trajectory settles at.
pub fn basins(params: &ModelParams, n: usize) -> Result<BasinMap> {
    let eqs = enumerate_equilibria(params, ENUM_GRID, ENUM_TOL)?;
    basins_with(params, n, eqs, &IntegrateOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_equilibrium_owns_everything() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let b = basins(&p, 16).unwrap();
        assert_eq!(b.equilibria.len(), 1);
        assert!(b.labels.iter().all(|l| *l == Some(0)));
    }

    #[test]
    fn labels_are_attractors() {
        let p = ModelParams::from_gammas(0.03, 0.03, 0.4, 0.6, 0.05).unwrap();
        let b = basins(&p, 16).unwrap();
        for i in b.nonempty() {
            assert!(b.equilibria[i].is_stable(), "{:?}", b.equilibria[i]);
        }
        assert_eq!(b.cell(0), Composition { r_w: 1.0 / 32.0, r_m: 1.0 / 32.0 });
    }
}
