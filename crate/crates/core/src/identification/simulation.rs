//! Synthetic income data generated from a known candidate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{g_star, CandidateParams, NoiseSpec, ObservedData, Sample};
use crate::error::{Error, Result};
use crate::model::{Composition, TypeId};

/// Level added to both incomes above the minimum wage.
const LEVEL: f64 = 1.0;

/// Draws `n` individuals split between types by population share.
///
/// Advantages use stratified uniforms `(i + U_i)/n_t`. Sector 1 is chosen with
/// probability `F_ξ(Δ − g*)` (`g*` at `comp`, also recorded as the observed
/// composition), realized by systematic sampling over advantage-ordered
/// individuals so sector counts on every advantage range match their
/// expectation to within one. Incomes are `Y₂ = w̲ + 1 + max(0, −Δ)` and
/// `Y₁ = Y₂ + Δ`, so both are at least `w̲ + 1`.
pub fn simulate_data(
    candidate: &CandidateParams,
    comp: Composition,
    pop_ratio: f64,
    min_wage: f64,
    noise: &NoiseSpec,
    n: usize,
    seed: u64,
) -> Result<ObservedData> {
    noise.validate()?;
    let params = candidate.to_params(pop_ratio)?;
    let shell = ObservedData::new(Vec::new(), comp, pop_ratio, min_wage)?;
    let g = g_star(candidate, &shell)?;
    let n_w = (n as f64 * shell.population_share(TypeId::W)).round() as usize;
    let counts = [(TypeId::W, n_w), (TypeId::M, n.saturating_sub(n_w))];
    if counts.iter().any(|&(_, k)| k == 0) {
        return Err(Error::Argument(format!("sample size {n} leaves a type without observations")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n);
    for (t, k) in counts {
        let mut mass = rng.sample::<f64, _>(rand::distr::Open01);
        for i in 0..k {
            let u = (i as f64 + rng.sample::<f64, _>(rand::distr::Open01)) / k as f64;
            let delta = params.adv[t].quantile(u)?;
            let before = mass.floor();
            mass += if noise.is_degenerate() { f64::from(u8::from(delta > g[t])) } else { noise.cdf(delta - g[t]) };
            let sector = if mass.floor() > before { 1 } else { 2 };
            // Y₁ = Y₂ + Δ, written without cancellation.
            let income = min_wage + LEVEL + if sector == 1 { delta.max(0.0) } else { (-delta).max(0.0) };
            samples.push(Sample { type_id: t, sector, income });
        }
    }
    ObservedData::new(samples, comp, pop_ratio, min_wage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identification::{check_inequalities, default_y_grid, NoiseFamily, DEFAULT_Y_POINTS};

    fn truth() -> CandidateParams {
        CandidateParams { re_w: 0.4, re_m: 0.6, c_w: 0.1, c_m: 0.1, big_c_w: 1.0, big_c_m: 1.0, beta: 1.0 }
    }

    #[test]
    fn shares_match_equilibrium() {
        let comp = Composition::new(0.375, 0.625).unwrap();
        let d = simulate_data(&truth(), comp, 1.0, 1.0, &NoiseSpec::DEGENERATE, 20_000, 3).unwrap();
        let s = d.sample_shares();
        assert!((s.w - 0.375).abs() < 1e-3 && (s.m - 0.625).abs() < 1e-3, "{s:?}");
        assert!(d.samples().iter().all(|x| x.income >= 2.0));
        assert_eq!(d, simulate_data(&truth(), comp, 1.0, 1.0, &NoiseSpec::DEGENERATE, 20_000, 3).unwrap());
    }

    #[test]
    fn truth_passes_and_shift_fails() {
        let comp = Composition::new(0.375, 0.625).unwrap();
        for noise in [NoiseSpec::DEGENERATE, NoiseSpec::new(NoiseFamily::Logistic, 0.2).unwrap()] {
            let d = simulate_data(&truth(), comp, 1.0, 0.5, &noise, 20_000, 9).unwrap();
            let y = default_y_grid(&d, DEFAULT_Y_POINTS).unwrap();
            assert!(check_inequalities(&truth(), &d, &y, &noise).unwrap().is_empty());
            let shifted = CandidateParams { re_w: 0.7, ..truth() };
            assert!(!check_inequalities(&shifted, &d, &y, &noise).unwrap().is_empty());
        }
    }
}
