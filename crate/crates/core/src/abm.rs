//! Finite-agent oracle: sampled advantages, best-response updating over
//! discrete agents, and the empirical shares it settles at.
//!
//! Each agent compares its advantage with the composition term evaluated at
//! the current empirical shares. A type absent from a nonempty sector faces
//! infinite disutility there; an empty sector carries no composition term.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Composition, ModelParams, PerType, TypeId};

pub const DEFAULT_MAX_ROUNDS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Agent {
    pub type_id: TypeId,
    /// Sector-1 advantage `Y₁ - Y₂`.
    pub delta: f64,
    /// 1 or 2.
    pub sector: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentPopulation {
    pub agents: Vec<Agent>,
    pub counts: PerType<usize>,
    pub seed: u64,
    in_sector1: PerType<usize>,
}

impl AgentPopulation {
    /// Empirical sector-1 fraction of each type.
    pub fn shares(&self) -> Composition {
        Composition {
            r_w: self.in_sector1.w as f64 / self.counts.w as f64,
            r_m: self.in_sector1.m as f64 / self.counts.m as f64,
        }
    }

    /// Places, for each type, the agents with the largest advantages in sector
    /// 1 so that its share is as close as possible to `comp`.
    pub fn assign(&mut self, comp: &Composition) {
        for t in TypeId::ALL {
            let mut idx: Vec<usize> = (0..self.agents.len()).filter(|&i| self.agents[i].type_id == t).collect();
            idx.sort_by(|&a, &b| self.agents[b].delta.total_cmp(&self.agents[a].delta).then(a.cmp(&b)));
            let k = (comp.get(t) * self.counts[t] as f64).round() as usize;
            for (rank, &i) in idx.iter().enumerate() {
                self.agents[i].sector = if rank < k { 1 } else { 2 };
            }
            self.in_sector1[t] = k.min(self.counts[t]);
        }
    }

    fn recount(&mut self) {
        let mut c = PerType::new(0, 0);
        for a in &self.agents {
            if a.sector == 1 {
                c[a.type_id] += 1;
            }
        }
        self.in_sector1 = c;
    }
}

/// Draws `n_w` and `n_m` advantages by inverse transform; every agent starts in
/// the sector its advantage favors.
pub fn sample_population(params: &ModelParams, n_w: usize, n_m: usize, seed: u64) -> Result<AgentPopulation> {
    if n_w == 0 || n_m == 0 {
        return Err(Error::Argument(format!("need at least one agent of each type, got ({n_w}, {n_m})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agents = Vec::with_capacity(n_w + n_m);
    for (t, n) in [(TypeId::W, n_w), (TypeId::M, n_m)] {
        for _ in 0..n {
            let u: f64 = rng.sample(rand::distr::Open01);
            let delta = params.adv[t].quantile(u)?;
            agents.push(Agent { type_id: t, delta, sector: if delta > 0.0 { 1 } else { 2 } });
        }
    }
    let mut pop = AgentPopulation { agents, counts: PerType::new(n_w, n_m), seed, in_sector1: PerType::new(0, 0) };
    pop.recount();
    Ok(pop)
}

/// Composition disutility difference `h(own share in 1) - h(own share in 2)`
/// for type `t` at the current counts.
fn composition_gap(params: &ModelParams, in1: PerType<usize>, counts: PerType<usize>, t: TypeId) -> f64 {
    let c = params.pref[t].strength();
    if c == 0.0 || params.sigma == 0.0 {
        return 0.0;
    }
    let mass = |ty: TypeId, k: usize| params.mu[ty] * k as f64 / counts[ty] as f64;
    let o = t.other();
    let h = |own: f64, other: f64| {
        let total = own + other;
        if total == 0.0 {
            0.0
        } else if own == 0.0 {
            f64::INFINITY
        } else {
            c * total / own
        }
    };
    let h1 = h(mass(t, in1[t]), mass(o, in1[o]));
    let h2 = h(mass(t, counts[t] - in1[t]), mass(o, counts[o] - in1[o]));
    params.sigma * (h1 - h2)
}

/// Net gain from sector 1 over sector 2 for an agent; `NaN` never arises
/// because a type cannot be absent from both sectors.
fn utility_gap(params: &ModelParams, pop_in1: PerType<usize>, counts: PerType<usize>, a: &Agent) -> f64 {
    a.delta - composition_gap(params, pop_in1, counts, a.type_id)
}

fn wants_switch(gap: f64, sector: u8) -> bool {
    (sector == 2 && gap > 0.0) || (sector == 1 && gap < 0.0)
}

/// One sequential pass in a seeded random order; shares update after every
/// switch. Returns the number of switches.
pub fn best_response_round(pop: &mut AgentPopulation, params: &ModelParams, order_seed: u64) -> usize {
    let mut order: Vec<usize> = (0..pop.agents.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(order_seed));
    let mut switched = 0;
    for i in order {
        let a = pop.agents[i];
        let gap = utility_gap(params, pop.in_sector1, pop.counts, &a);
        if wants_switch(gap, a.sector) {
            let t = a.type_id;
            if a.sector == 1 {
                pop.agents[i].sector = 2;
                pop.in_sector1[t] -= 1;
            } else {
                pop.agents[i].sector = 1;
                pop.in_sector1[t] += 1;
            }
            switched += 1;
        }
    }
    switched
}

/// Diagnostic synchronous round: every agent responds to the shares at the
/// start of the round.
pub fn best_response_round_sync(pop: &mut AgentPopulation, params: &ModelParams) -> usize {
    let (in1, counts) = (pop.in_sector1, pop.counts);
    let gaps = PerType::new(composition_gap(params, in1, counts, TypeId::W), composition_gap(params, in1, counts, TypeId::M));
    let mut switched = 0;
    for a in pop.agents.iter_mut() {
        let gap = a.delta - gaps[a.type_id];
        if wants_switch(gap, a.sector) {
            a.sector = 3 - a.sector;
            switched += 1;
        }
    }
    pop.recount();
    switched
}

/// Agents that would strictly gain by switching at the current shares.
pub fn profitable_deviations(pop: &AgentPopulation, params: &ModelParams) -> usize {
    pop.agents.iter().filter(|a| wants_switch(utility_gap(params, pop.in_sector1, pop.counts, a), a.sector)).count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    #[serde(rename = "N_w")]
    pub n_w: usize,
    #[serde(rename = "N_m")]
    pub n_m: usize,
    pub seed: u64,
    pub rounds: usize,
    pub converged: bool,
    pub r_w: f64,
    pub r_m: f64,
    /// Shares after each round, starting with the initial state.
    #[serde(skip)]
    pub history: Vec<Composition>,
}

/// Runs sequential rounds (round `k` shuffled with `order_seed + k`) until no
/// agent switches or `max_rounds` is reached.
pub fn run_to_convergence(pop: &mut AgentPopulation, params: &ModelParams, max_rounds: usize, order_seed: u64) -> RunSummary {
    let mut history = vec![pop.shares()];
    let mut rounds = 0;
    let mut converged = false;
    while rounds < max_rounds.max(1) {
        let switched = best_response_round(pop, params, order_seed.wrapping_add(rounds as u64));
        rounds += 1;
        history.push(pop.shares());
        if switched == 0 {
            converged = true;
            break;
        }
    }
    let s = pop.shares();
    RunSummary { n_w: pop.counts.w, n_m: pop.counts.m, seed: pop.seed, rounds, converged, r_w: s.r_w, r_m: s.r_m, history }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn efficient_fraction_and_determinism() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let pop = sample_population(&p, 100_000, 10, 7).unwrap();
        let s = pop.shares();
        assert!((s.r_w - 0.4).abs() < 0.01, "{s:?}");
        assert_eq!(pop, sample_population(&p, 100_000, 10, 7).unwrap());
        assert_ne!(pop, sample_population(&p, 100_000, 10, 8).unwrap());
        let one = sample_population(&p, 1, 1, 0).unwrap();
        assert_eq!(one.agents.len(), 2);
        assert!(sample_population(&p, 0, 1, 0).is_err());
    }

    #[test]
    fn pure_income_maximization() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap().with_sigma(0.0).unwrap();
        let mut pop = sample_population(&p, 1000, 1000, 3).unwrap();
        pop.assign(&Composition::new(0.9, 0.1).unwrap());
        best_response_round(&mut pop, &p, 0);
        assert!(pop.agents.iter().all(|a| (a.sector == 1) == (a.delta > 0.0)));
        assert_eq!(best_response_round(&mut pop, &p, 1), 0);
    }

    #[test]
    fn converges_near_closed_form() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let mut pop = sample_population(&p, 20_000, 20_000, 11).unwrap();
        let r = run_to_convergence(&mut pop, &p, DEFAULT_MAX_ROUNDS, 5);
        assert!(r.converged);
        assert!((r.r_w - 0.375).abs() < 0.03 && (r.r_m - 0.625).abs() < 0.03, "{r:?}");
        assert_eq!(profitable_deviations(&pop, &p), 0);
    }

    #[test]
    fn corner_persists_with_thin_tails() {
        let p = ModelParams::from_gammas(0.11, 0.11, 0.4, 0.6, 0.05).unwrap();
        let mut pop = sample_population(&p, 2000, 2000, 1).unwrap();
        pop.assign(&Composition::new(0.0, 1.0).unwrap());
        let r = run_to_convergence(&mut pop, &p, 50, 0);
        assert!(r.converged);
        assert_eq!((r.r_w, r.r_m), (0.0, 1.0));
    }

    #[test]
    fn sync_mode_runs() {
        let p = ModelParams::from_gammas(0.1, 0.1, 0.4, 0.6, 1.0).unwrap();
        let mut pop = sample_population(&p, 500, 500, 2).unwrap();
        best_response_round_sync(&mut pop, &p);
        let s = pop.shares();
        assert!((0.0..=1.0).contains(&s.r_w));
    }
}
