//! Run configuration: a JSON file (or bundled preset) merged with flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Subcommand, ValueEnum};
use roysim_core::identification::{Axis, CandidateParams, GridSpec, NoiseSpec, DEFAULT_Y_POINTS};
use roysim_core::policy::Policy;
use roysim_core::{Composition, Error, ModelParams, Result};
use serde::Deserialize;

pub const DEFAULT_RESOLUTION: usize = 64;
pub const DEFAULT_PHASE_RESOLUTION: usize = 25;
pub const DEFAULT_BASIN_RESOLUTION: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_ORACLE_AGENTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Equilibria: the closed form when beta = 1 and it applies, else enumeration.
    #[command(long_about = "Equilibria as JSON. Uses the closed form when beta = 1, r_w^e < r_m^e and \
sigma*(gamma_w + gamma_m) < 1; otherwise enumerates.\n\nConfig keys: params (required), resolution \
[default: 64, enumeration seed grid], tol [default: 1e-10].")]
    Solve,
    /// Every equilibrium found by seeded Newton search plus boundary checks.
    #[command(long_about = "All equilibria as JSON, sorted by (r_w, r_m).\n\nConfig keys: params (required), \
resolution [default: 64, enumeration seed grid], tol [default: 1e-10].")]
    Enumerate,
    /// Phase portrait: phase.csv and phase.svg in the --out directory.
    #[command(long_about = "Writes phase.csv (grid flow) and phase.svg (flow arrows, nullclines, red stable \
and black unstable equilibria) into the --out directory [default: current directory].\n\nConfig keys: \
params (required), resolution [default: 25, portrait grid], tol [default: 1e-10].")]
    Phase,
    /// Basins of attraction: basins.csv and basins.svg in the --out directory.
    #[command(long_about = "Integrates from every cell center and labels the cell by the equilibrium it \
settles at. Writes basins.csv and basins.svg into the --out directory [default: current directory].\n\n\
Config keys: params (required), resolution [default: 50, cells per side, at least 16].")]
    Basins,
    /// Policy counterfactual from an observed equilibrium.
    #[command(long_about = "Runs a policy from the observed composition and reports the equilibrium sets \
before and after, the settled state and whether it tipped, as JSON.\n\nConfig keys: params (required), \
policy (required; {\"kind\": \"flat_tax\", \"tau\"} | {\"kind\": \"quota\", \"floor\"} | {\"kind\": \
\"subsidy\", \"scale_C\": {w, m}} | {\"kind\": \"amenity_shift\", \"scale_c\": {w, m}} | {\"kind\": \
\"participation\", \"new_mu_w\"}), observed (required; {r_w, r_m}), resolution [default: 64], tol \
[default: 1e-10].\n\nExits with code 4 when the observed composition is not near an equilibrium.")]
    Policy,
    /// Equilibrium and stable counts along a parameter sweep, as CSV.
    #[command(long_about = "Re-enumerates equilibria at each parameter value and integrates from a start \
composition. CSV columns: value, equilibria, stable, settled_r_w, settled_r_m, tipped.\n\nConfig keys: \
params (required), sweep (required; parameter, and values or range {min, max, count}; start \
[default: efficient composition]), resolution [default: 64], tol [default: 1e-10]. Parameters: mu_w, \
mu_m, c_w, c_m, C_w, C_m, beta, re_w, re_m, sigma, gamma_w, gamma_m, tau.")]
    Sweep,
    /// Finite-agent best-response oracle.
    #[command(long_about = "Samples agents and runs sequential best-response rounds until nobody \
switches. Reports the run summary and the nearest enumerated equilibrium as JSON.\n\nConfig keys: params \
(required), oracle.n_w and oracle.n_m [default: 100000 each], oracle.max_rounds [default: 1000], seed \
[default: 0], resolution [default: 64], tol [default: 1e-10].")]
    Oracle,
    /// Identified set from income data by moment inequalities.
    #[command(long_about = "Grid search for the candidates satisfying every moment inequality and \
having an equilibrium near the observed composition. Writes identified.csv (accepted candidates) and \
identified.json (per-candidate diagnostics) into the --out directory [default: current directory].\n\n\
Config keys: identify.grid (required; axes re_w, re_m, c_w, c_m, C_w, C_m as {min, max, count}, beta, \
consistency_tol [default: 0.001]), identify.data and identify.sidecar (CSV type,sector,income and its \
JSON sidecar), identify.y_points [default: 50], identify.simulate (optional; truth, n, pop_ratio \
[default: 1], min_wage [default: 0.5], noise [default: degenerate]). With simulate, data are \
generated from the truth (using seed) and written to identify.data/identify.sidecar when those are \
given. Relative paths resolve against the config file's directory.")]
    Identify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Enumerate => "enumerate",
            Command::Phase => "phase",
            Command::Basins => "basins",
            Command::Policy => "policy",
            Command::Sweep => "sweep",
            Command::Oracle => "oracle",
            Command::Identify => "identify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig4,
    Fig5Left,
    Fig5Right,
}

impl Preset {
    fn text(self) -> &'static str {
        match self {
            Preset::Fig4 => include_str!("../../../configs/fig4.json"),
            Preset::Fig5Left => include_str!("../../../configs/fig5-left.json"),
            Preset::Fig5Right => include_str!("../../../configs/fig5-right.json"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub range: Option<Axis>,
    #[serde(default)]
    pub start: Option<Composition>,
}

impl SweepConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        match (&self.values, &self.range) {
            (Some(v), None) if !v.is_empty() => Ok(v.clone()),
            (None, Some(a)) if a.count > 0 && a.min <= a.max => Ok(a.values()),
            _ => Err(Error::Argument("sweep needs exactly one of a nonempty values list or a valid range".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_agents")]
    pub n_w: usize,
    #[serde(default = "default_agents")]
    pub n_m: usize,
    #[serde(default = "default_rounds")]
    pub max_rounds: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { n_w: DEFAULT_ORACLE_AGENTS, n_m: DEFAULT_ORACLE_AGENTS, max_rounds: roysim_core::abm::DEFAULT_MAX_ROUNDS }
    }
}

fn default_agents() -> usize {
    DEFAULT_ORACLE_AGENTS
}

fn default_rounds() -> usize {
    roysim_core::abm::DEFAULT_MAX_ROUNDS
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub truth: CandidateParams,
    pub n: usize,
    #[serde(default = "one")]
    pub pop_ratio: f64,
    #[serde(default = "half")]
    pub min_wage: f64,
    #[serde(default = "degenerate")]
    pub noise: NoiseSpec,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn degenerate() -> NoiseSpec {
    NoiseSpec::DEGENERATE
}

fn y_points() -> usize {
    DEFAULT_Y_POINTS
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifyConfig {
    pub grid: GridSpec,
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub sidecar: Option<PathBuf>,
    #[serde(default = "y_points")]
    pub y_points: usize,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub params: Option<ModelParams>,
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub policy: Option<Policy>,
    #[serde(default)]
    pub observed: Option<Composition>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub identify: Option<IdentifyConfig>,
    /// Directory that relative data paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn preset(p: Preset) -> Self {
        Self::parse(p.text()).expect("bundled presets are valid")
    }

    pub fn params(&self) -> Result<ModelParams> {
        self.params.ok_or_else(|| Error::Argument("config has no params".into()))
    }

    pub fn tol(&self) -> Result<f64> {
        let tol = self.tol.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Argument(format!("tol must be positive, got {tol}")));
        }
        Ok(tol)
    }

    pub fn resolution_or(&self, default: usize) -> usize {
        self.resolution.unwrap_or(default)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for p in [Preset::Fig4, Preset::Fig5Left, Preset::Fig5Right] {
            let c = RunConfig::preset(p);
            assert!(c.params.is_some() && c.command.is_some());
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse(r#"{"command": "solve", "bogus": 1}"#).is_err());
        assert!(RunConfig::parse(r#"{"oracle": {"n_w": 10, "n": 3}}"#).is_err());
        assert!(RunConfig::parse(r#"{"command": "solve"}"#).is_ok());
    }

    #[test]
    fn sweep_values() {
        let s = SweepConfig { parameter: "gamma_w".into(), values: None, range: Some(Axis { min: 0.0, max: 1.0, count: 5 }), start: None };
        assert_eq!(s.values().unwrap().len(), 5);
        let both = SweepConfig { values: Some(vec![0.1]), ..s };
        assert!(both.values().is_err());
    }
}
