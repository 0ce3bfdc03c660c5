use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use roysim_core::abm::{run_to_convergence, sample_population};
use roysim_core::dynamics::render::{basins_svg, portrait_svg, write_basins_csv, write_portrait_csv};
use roysim_core::dynamics::{basins_with, phase_portrait_with, snap, IntegrateOptions, ENUM_GRID};
use roysim_core::equilibrium::{closed_form_regime, enumerate_equilibria, solve_closed_form_beta1, EquilibriumPoint};
use roysim_core::identification::{
    default_y_grid, identified_set, read_observed, simulate_data, write_identified_csv, write_observed, CandidateParams, NoiseSpec,
    ObservedData,
};
use roysim_core::numfmt::{fmt_f64, write_json};
use roysim_core::policy::{compare_with, sweep, CompareOptions};
use roysim_core::{Composition, Error, ModelParams, Result};
use serde::Serialize;

use crate::config::{Command, RunConfig, DEFAULT_BASIN_RESOLUTION, DEFAULT_PHASE_RESOLUTION, DEFAULT_RESOLUTION};

pub fn run(command: Command, cfg: &RunConfig) -> Result<()> {
    info!("running {}", command.name());
    match command {
        Command::Solve => cmd_solve(cfg),
        Command::Enumerate => cmd_enumerate(cfg),
        Command::Phase => cmd_phase(cfg),
        Command::Basins => cmd_basins(cfg),
        Command::Policy => cmd_policy(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Oracle => cmd_oracle(cfg),
        Command::Identify => cmd_identify(cfg),
    }
}

/// `--out` as a file, or stdout.
fn output(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `--out` as a directory, created when missing.
fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn emit_json<T: Serialize + ?Sized>(cfg: &RunConfig, value: &T) -> Result<()> {
    let mut w = output(cfg)?;
    write_json(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    info!("wrote {}", path.display());
    Ok(())
}

fn enumerate(cfg: &RunConfig, params: &ModelParams) -> Result<Vec<EquilibriumPoint>> {
    enumerate_equilibria(params, cfg.resolution_or(DEFAULT_RESOLUTION), cfg.tol()?)
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let points = match closed_form_regime(&params) {
        Ok(_) => vec![solve_closed_form_beta1(&params)?],
        Err(e) => {
            info!("closed form not applicable ({e}); enumerating");
            enumerate(cfg, &params)?
        }
    };
    emit_json(cfg, &points)
}

pub fn cmd_enumerate(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    emit_json(cfg, &enumerate(cfg, &params)?)
}

pub fn cmd_phase(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let n = cfg.resolution_or(DEFAULT_PHASE_RESOLUTION);
    let eqs = enumerate_equilibria(&params, ENUM_GRID.max(n), cfg.tol()?)?;
    let portrait = phase_portrait_with(&params, n, eqs)?;
    let dir = out_dir(cfg)?;
    write_file(&dir.join("phase.csv"), |w| write_portrait_csv(&portrait, w))?;
    write_file(&dir.join("phase.svg"), |w| Ok(w.write_all(portrait_svg(&portrait).as_bytes())?))
}

pub fn cmd_basins(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let n = cfg.resolution_or(DEFAULT_BASIN_RESOLUTION);
    let eqs = enumerate_equilibria(&params, ENUM_GRID, cfg.tol()?)?;
    let map = basins_with(&params, n, eqs, &IntegrateOptions::default())?;
    let dir = out_dir(cfg)?;
    write_file(&dir.join("basins.csv"), |w| write_basins_csv(&map, w))?;
    write_file(&dir.join("basins.svg"), |w| Ok(w.write_all(basins_svg(&map).as_bytes())?))
}

fn compare_options(cfg: &RunConfig) -> Result<CompareOptions> {
    Ok(CompareOptions { grid_n: cfg.resolution_or(DEFAULT_RESOLUTION), tol: cfg.tol()?, ..Default::default() })
}

pub fn cmd_policy(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let policy = cfg.policy.ok_or_else(|| Error::Argument("policy needs a policy spec".into()))?;
    let observed = cfg.observed.ok_or_else(|| Error::Argument("policy needs an observed composition".into()))?;
    let observed = Composition::new(observed.r_w, observed.r_m)?;
    let report = compare_with(&params, &policy, &observed, &compare_options(cfg)?)?;
    emit_json(cfg, &report)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let spec = cfg.sweep.as_ref().ok_or_else(|| Error::Argument("sweep needs a sweep spec".into()))?;
    let start = match spec.start {
        Some(s) => Composition::new(s.r_w, s.r_m)?,
        None => roysim_core::equilibrium::efficient_composition(&params),
    };
    let rows = sweep(&params, &spec.parameter, &spec.values()?, &start, &compare_options(cfg)?)?;
    let mut w = output(cfg)?;
    writeln!(w, "value,equilibria,stable,settled_r_w,settled_r_m,tipped")?;
    for r in rows {
        let (sw, sm) = r.settled.map_or((String::new(), String::new()), |c| (fmt_f64(c.r_w), fmt_f64(c.r_m)));
        writeln!(w, "{},{},{},{sw},{sm},{}", fmt_f64(r.value), r.equilibria, r.stable, r.tipped)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    summary: roysim_core::abm::RunSummary,
    nearest_equilibrium: Option<EquilibriumPoint>,
    distance: Option<f64>,
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let o = cfg.oracle.unwrap_or_default();
    let seed = cfg.seed.unwrap_or(0);
    let mut pop = sample_population(&params, o.n_w, o.n_m, seed)?;
    let summary = run_to_convergence(&mut pop, &params, o.max_rounds, seed);
    let eqs = enumerate(cfg, &params)?;
    let shares = Composition { r_w: summary.r_w, r_m: summary.r_m };
    let nearest = snap(&shares, &eqs, f64::INFINITY).cloned();
    let distance = nearest.as_ref().map(|e| e.comp.linf(&shares));
    emit_json(cfg, &OracleReport { summary, nearest_equilibrium: nearest, distance })
}

/// Observed composition for simulated data: the configured one, the closed
/// form when it applies, or the unique enumerated equilibrium.
fn truth_composition(cfg: &RunConfig, truth: &CandidateParams, pop_ratio: f64) -> Result<Composition> {
    if let Some(c) = cfg.observed {
        return Composition::new(c.r_w, c.r_m);
    }
    let params = truth.to_params(pop_ratio)?;
    if let Ok(r) = closed_form_regime(&params) {
        return Ok(r.comp);
    }
    match enumerate(cfg, &params)?.as_slice() {
        [only] => Ok(only.comp),
        many => Err(Error::Argument(format!(
            "the simulated truth has {} equilibria; set observed to choose one",
            many.len()
        ))),
    }
}

fn load_data(cfg: &RunConfig) -> Result<(ObservedData, NoiseSpec)> {
    let id = cfg.identify.as_ref().ok_or_else(|| Error::Argument("identify needs an identify spec".into()))?;
    let paths = match (&id.data, &id.sidecar) {
        (Some(d), Some(s)) => Some((cfg.resolve(d), cfg.resolve(s))),
        (None, None) => None,
        _ => return Err(Error::Argument("identify.data and identify.sidecar go together".into())),
    };
    match (&id.simulate, paths) {
        (Some(sim), paths) => {
            let comp = truth_composition(cfg, &sim.truth, sim.pop_ratio)?;
            let data = simulate_data(&sim.truth, comp, sim.pop_ratio, sim.min_wage, &sim.noise, sim.n, cfg.seed.unwrap_or(0))?;
            if let Some((d, s)) = paths {
                write_observed(&data, &sim.noise, &d, &s)?;
                info!("wrote simulated data to {}", d.display());
            }
            Ok((data, sim.noise))
        }
        (None, Some((d, s))) => read_observed(&d, &s),
        (None, None) => Err(Error::Argument("identify needs data and sidecar paths or a simulate block".into())),
    }
}

pub fn cmd_identify(cfg: &RunConfig) -> Result<()> {
    let (data, noise) = load_data(cfg)?;
    let id = cfg.identify.as_ref().expect("checked by load_data");
    let y = default_y_grid(&data, id.y_points)?;
    let set = identified_set(&id.grid, &data, &noise, &y)?;
    info!("{} of {} candidates accepted", set.accepted.len(), set.diagnostics.len());
    let dir = out_dir(cfg)?;
    write_file(&dir.join("identified.csv"), |w| write_identified_csv(&set, w))?;
    write_file(&dir.join("identified.json"), |w| {
        write_json(&mut *w, &set)?;
        Ok(writeln!(w)?)
    })
}
